#ifndef PSLAB_EXPERIMENTS_HPP
#define PSLAB_EXPERIMENTS_HPP

#include <string>
#include <vector>

#include <json.hpp>

#include "pslab/dynamics.hpp"
#include "pslab/transport.hpp"

namespace pslab {

/// One sweep configuration.  Parsed from JSON with strict unknown-key
/// rejection; every field has a workable default except `model` and `check`.
struct Scenario {
  std::string name = "scenario";
  std::string check;        // egorov | meanfield | localization | local_unitary | operator_egorov
  std::string model;        // harmonic | free | pendulum | quartic | nonseparable | affine
  int dim = 1;
  std::string initial = "coherent";  // coherent | cat | mixture | random
  VectorXd alpha0;                   // default (0.8, 0.4, ...) per dim
  double cat_separation = 2.0;
  double mixture_sigma2 = 0.3;
  int mixture_nodes = 3;  // per phase-space axis (3 -> 9 atoms at D=1)
  unsigned seed = 1234;
  int rank = 4;
  std::vector<double> hbar_list = {0.2, 0.1, 0.05, 0.025, 0.0125};
  std::vector<double> T_list = {0.5, 1.0, 2.0};
  std::vector<int> p_list = {2};
  int sobolev_k = 1;                          // localization check
  std::vector<double> alpha_mags = {1, 2, 4};  // local-unitary, in units of sqrt(hbar)
  std::string observable = "sin_x";            // operator egorov: sin_x | x
  // grid policy
  double box_halfwidth = 7.0;
  double p_need = 2.0;
  int n_x = 0;      // 0 = auto from hbar
  int n_cap = 4096; // dense checks force <= kDenseCap
};

Scenario scenario_from_json(const nlohmann::json& j);
nlohmann::ordered_json scenario_to_json(const Scenario& s);
/// Built-in scenarios by name ("harmonic-sanity").
Scenario bundled_scenario(const std::string& name);

struct SweepRow {
  double hbar = 0, T = 0;
  int p = 0;
  double aux = 0;       // |alpha| (local unitary), k (localization), ...
  double distance = 0;  // measured quantity (distance, Q-ratio, norm)
  double bound = 0;     // gate threshold for this row
  double gap = 0;       // solver + support-reduction certificate
  double lambda_h = 0;
  double c_cal = 0;
  double runtime_s = 0;
  bool pass = true;
  std::string note;
};

struct FitResult {
  double slope = 0, intercept = 0, ci = 0;
};

struct SweepReport {
  std::string scenario, check;
  std::vector<SweepRow> rows;
  std::vector<std::pair<std::string, FitResult>> fits;
  bool all_pass = true;
  std::string summary;
};

/// Grid sized so the momentum support (p_need plus localization margin) fits
/// inside the Fourier band and dx resolves sqrt(hbar) structure.
PhaseSpaceGrid scenario_grid(const Scenario& s, double hbar);
QuantumState initial_state(const Scenario& s, const PhaseSpaceGrid& g);
/// Haar-style random low-rank mixture: <= 8 coherent plus <= 2 first-excited
/// (Hermite) branches at seeded centers.
QuantumState random_low_rank(const PhaseSpaceGrid& g, unsigned seed, int rank);

/// Cheap preflight: builds every (hbar) grid and initial state and runs the
/// boundary-mass monitor.  Throws DomainError with diagnostics on failure.
void preflight(const Scenario& s);

SweepReport run_egorov_sweep(const Scenario& s);
SweepReport run_meanfield_check(const Scenario& s);
SweepReport run_localization_check(const Scenario& s);
SweepReport run_local_unitary_check(const Scenario& s);
SweepReport run_operator_egorov_check(const Scenario& s, const SymbolFn& G,
                                      const std::string& g_name);
/// Dispatch on s.check (operator_egorov uses s.observable).
SweepReport run_scenario(const Scenario& s);

/// Least squares on log-log with jackknife confidence interval.
/// Requires >= 4 points spanning >= 1 decade in x, all positive.
FitResult fit_scaling(const std::vector<double>& x, const std::vector<double>& y);

/// d_{W_p} between two phase-space measures with the standard reduction
/// pipeline (clamp roundoff negatives, prune, thin to the entropic cap);
/// *gap accumulates the solver certificate plus reduction error bounds.
double measure_distance(const PhaseSpaceMeasure& mu, const PhaseSpaceMeasure& nu, int p,
                        double* gap);

/// Triangle decomposition of one egorov row through the noising channel:
/// direct <= noising leg + mixture leg + classical leg (+ certificates).
struct TriangleReport {
  double direct = 0, noise_leg = 0, mixture_leg = 0, classical_leg = 0;
  double gap_total = 0;
  bool holds = false;
};
TriangleReport run_triangle_check(const Scenario& s, double hbar, double T, int p);

}  // namespace pslab

#endif
