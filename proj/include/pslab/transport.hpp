#ifndef PSLAB_TRANSPORT_HPP
#define PSLAB_TRANSPORT_HPP

#include <string>
#include <vector>

#include "pslab/measure.hpp"

namespace pslab {

inline constexpr long kExactCap = 600;     // per-side support cap, exact solver
inline constexpr long kEntropicCap = 5000; // per-side support cap, entropic solver

struct TransportProblem {
  PhaseSpaceMeasure mu, nu;
  int p = 2;  // Wasserstein order, in {1, 2, 4}
};

struct CouplingEntry {
  long i, j;
  double mass;
};

struct TransportResult {
  double distance = 0;    // certified upper value of d_{W_p}
  double lower = 0;       // dual lower value
  double bound_gap = 0;   // distance - lower, plus any support-reduction slack
  VectorXd dual_f, dual_g;
  std::vector<CouplingEntry> plan;  // exact solver only
  std::string solver;               // "exact" | "entropic"
  double epsilon_final = 0;
  int iterations = 0;
};

/// d_{W_p}(mu, nu).  Exact network-simplex-free solver (successive shortest
/// paths) when both supports are <= kExactCap; log-domain Sinkhorn with
/// epsilon annealing and a c-transform dual certificate otherwise.
/// force_solver in {"", "exact", "entropic"} pins the backend (tests).
TransportResult wasserstein(const TransportProblem& prob, const std::string& force_solver = "");

/// Closed form: d_{W_p}(mu, delta_alpha) = (int |z-alpha|^p dmu)^{1/p}.
double wasserstein_to_point(const PhaseSpaceMeasure& mu, const VectorXd& alpha, int p);

struct ReducedMeasure {
  PhaseSpaceMeasure measure;
  double dropped_mass = 0;     // pruning
  double aggregation_radius = 0;  // thinning
  /// Additive d_{W_p} error bound from the reduction.
  double error_bound(int p, double diameter) const;
};

/// Drop atoms of mass < threshold (absolute), renormalize.
ReducedMeasure prune_support(const PhaseSpaceMeasure& m, double threshold);
inline constexpr double kPruneCap = 1e-5;

/// Reduce to <= max_atoms by aggregating mass onto a coarser point set.
ReducedMeasure thin_support(const PhaseSpaceMeasure& m, long max_atoms);

/// Mixture convexity: d(sum w_b mu_b, sum w_b nu_b) <= (sum w_b d_b^p)^{1/p}.
double convexity_bound(const VectorXd& weights, const VectorXd& distances, int p);

/// Support diameter of the union of two measures' supports.
double support_diameter(const PhaseSpaceMeasure& a, const PhaseSpaceMeasure& b);

}  // namespace pslab

#endif
