#ifndef PSLAB_IO_HPP
#define PSLAB_IO_HPP

#include <string>
#include <vector>

#include "pslab/experiments.hpp"

namespace pslab {

inline constexpr unsigned kStateFormatVersion = 1;
inline constexpr const char* kReportSchemaVersion = "pslab-report-1";

/// Binary state file: "PSLB" magic, format version, D, hbar, grid spec,
/// branches as weight + interleaved re/im f64 (little-endian, native layout).
/// Version mismatch on load is a hard error.
void save_state(const std::string& path, const QuantumState& s);
QuantumState load_state(const std::string& path);

/// Measures: columnar binary (header + f64 columns x..p, mass) and CSV/JSON.
void save_measure(const std::string& path, const PhaseSpaceMeasure& m);
PhaseSpaceMeasure load_measure(const std::string& path);
void save_measure_csv(const std::string& path, const PhaseSpaceMeasure& m);
nlohmann::ordered_json measure_to_json(const PhaseSpaceMeasure& m);
PhaseSpaceMeasure measure_from_json(const nlohmann::json& j);

/// Report serialization.  Timing fields are excluded by default so identical
/// runs produce byte-identical files; pass include_timing for profiling dumps.
nlohmann::ordered_json report_to_json(const SweepReport& r, bool include_timing = false);
std::string report_to_csv(const SweepReport& r, bool include_timing = false);

void write_trajectory_csv(const std::string& path, const std::vector<TrajectorySample>& traj);

/// Log-log scatter of (x, y) series with optional straight bound lines
/// y = c * x^s, rendered as a standalone SVG.
struct PlotSeries {
  std::string label;
  std::vector<double> x, y;
};
struct BoundLine {
  std::string label;
  double coeff, exponent;
};
void write_loglog_svg(const std::string& path, const std::string& title,
                      const std::vector<PlotSeries>& series, const std::vector<BoundLine>& bounds);

/// Husimi heatmap of a lattice-supported measure (D=1: x-p plane) as PPM.
void write_heatmap_ppm(const std::string& path, const PhaseSpaceMeasure& m);

}  // namespace pslab

#endif
