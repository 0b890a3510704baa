#ifndef PSLAB_STATE_HPP
#define PSLAB_STATE_HPP

#include <vector>

#include "pslab/grid.hpp"

namespace pslab {

/// One pure component of a (possibly mixed) state: weight * |psi><psi|.
struct Branch {
  double weight = 1.0;
  VectorXcd psi;  // amplitudes over the position grid, unit L2 norm
};

/// A density operator as a low-rank mixture of pure wavefunctions on the
/// position grid.  A pure state is the single-branch case.
struct QuantumState {
  PhaseSpaceGrid grid;
  std::vector<Branch> branches;

  bool pure() const { return branches.size() == 1; }
  double trace() const;
  void validate(double weight_tol = 1e-12, double norm_tol = 1e-10) const;
};

/// L2 inner product <a|b> with grid quadrature weights.
Complex inner(const PhaseSpaceGrid& g, const VectorXcd& a, const VectorXcd& b);
double l2_norm(const PhaseSpaceGrid& g, const VectorXcd& psi);

/// |<a|b>| for pure states on the same grid.
double fidelity(const QuantumState& a, const QuantumState& b);

/// Coherent-state amplitudes evaluated on the grid (unit norm):
///   <x|alpha> ~ exp(i alpha_p.(x - alpha_x/2)/hbar) exp(-|x-alpha_x|^2/(2 hbar)).
VectorXcd coherent_amplitudes(const PhaseSpaceGrid& g, const PhasePoint& alpha);
QuantumState coherent_state(const PhaseSpaceGrid& g, const PhasePoint& alpha);

/// Phase-space translation tau_alpha applied to every branch.  Factored form:
/// Fourier-phase shift by alpha_x, then multiply exp(i alpha_p.(x-alpha_x/2)/hbar).
QuantumState translate(const QuantumState& s, const PhasePoint& alpha);
void translate_amplitudes(const PhaseSpaceGrid& g, VectorXcd& psi, const PhasePoint& alpha);

/// Mixture of coherent states at the given atoms; masses must sum to 1.
QuantumState mix_coherent(const PhaseSpaceGrid& g,
                          const std::vector<std::pair<PhasePoint, double>>& atoms);

/// Gaussian mixture density in phase space: tensor Gauss-Hermite quadrature
/// of a normal with mean `center` and covariance sigma2*Id, nodes per axis.
QuantumState mix_coherent_gaussian(const PhaseSpaceGrid& g, const PhasePoint& center,
                                   double sigma2, int nodes_per_axis);

inline constexpr int kMixtureBranchCap = 4096;

/// Mass of a branch-weighted state within `margin` of the position-box
/// boundary (and beyond `p_margin_fraction*p_max` in momentum).
double boundary_mass(const QuantumState& s);
void check_boundary(const QuantumState& s, const char* where);
inline constexpr double kBoundaryAbort = 1e-6;

/// Margin required of coherent/translated centers: 5 sqrt(hbar).
double center_margin(const PhaseSpaceGrid& g);

/// <psi| f(x) |psi> for a diagonal position-space function on a pure branch.
double position_expectation(const PhaseSpaceGrid& g, const VectorXcd& psi, int axis);
double momentum_expectation(const PhaseSpaceGrid& g, const VectorXcd& psi, int axis);

/// Expected phase-space center (<x>, <p>) of a state (branch-weighted).
PhasePoint mean_center(const QuantumState& s);

}  // namespace pslab

#endif
