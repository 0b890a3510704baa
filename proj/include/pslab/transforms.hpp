#ifndef PSLAB_TRANSFORMS_HPP
#define PSLAB_TRANSFORMS_HPP

#include <functional>

#include "pslab/measure.hpp"
#include "pslab/state.hpp"

namespace pslab {

/// Phase-space symbol A(alpha), alpha in R^{2D}.
using SymbolFn = std::function<double(const VectorXd&)>;

/// Dense operator on the position grid, acting on amplitude vectors.
struct OperatorMatrix {
  PhaseSpaceGrid grid;
  MatrixXcd entries;
  bool hermitian_flag = false;
};

inline constexpr long kDenseCap = 1024;  // max total grid points for dense operators

VectorXcd apply_operator(const OperatorMatrix& op, const VectorXcd& psi);
QuantumState apply_operator(const OperatorMatrix& op, const QuantumState& s);

/// Weyl quantization: kernel (2 pi hbar)^-D sum_p e^{ip(x-y)/hbar} A((x+y)/2, p),
/// with symmetric half-weighted endpoint p-axis so real symbols quantize to
/// Hermitian matrices.  D = 1 only (dense regime).
OperatorMatrix weyl_quantize(const SymbolFn& A, const PhaseSpaceGrid& g);

/// Wavepacket (anti-Wick) quantization over a center lattice:
/// (2 pi hbar)^-D sum_i f(alpha_i) |alpha_i><alpha_i| h_alpha^{2D}.
OperatorMatrix wavepacket_quantize(const SymbolFn& f, const PhaseSpaceGrid& g,
                                   const PhaseLattice& centers);

/// Wigner function of a state on the (x, p) grid lattice (D = 1).
/// Signed lattice measure with unit total integral.
PhaseSpaceMeasure wigner(const QuantumState& s);

/// Husimi density at a single phase-space point: (2 pi hbar)^-D <alpha|rho|alpha>.
double husimi_at(const QuantumState& s, const PhasePoint& alpha);

/// Husimi measure sampled on a lattice of centers (masses = density * cell).
PhaseSpaceMeasure husimi(const QuantumState& s, const PhaseLattice& centers);

/// Grid-aligned center lattice covering the state's phase-space support with
/// spacing <= spacing_cap (default sqrt(hbar)/2) and 1e-8 tail coverage.
PhaseLattice default_husimi_lattice(const QuantumState& s, double spacing_cap = -1);

/// Noising channel N[rho]: coherent mixture weighted by the Husimi function.
QuantumState noising_channel(const QuantumState& s);

/// Samples of G * gamma_cov (Gaussian of covariance cov*Id on R^{2D}) on the
/// lattice; G is evaluated on a padded lattice, convolution is separable.
VectorXd mollify_symbol(const SymbolFn& G, const PhaseLattice& lat, double cov);

/// Measured Gaussian-convolution conventions (see module notes): c_husimi is
/// the covariance factor c with H_rho = W_rho * gamma_{c hbar}; c_noising the
/// factor with W_{N[rho]} = W_rho * gamma_{c hbar}.  Measured from the
/// definitional integrals on a coherent state, never assumed.
struct ConventionReport {
  double c_husimi = 0;
  double c_noising = 0;
  double husimi_identity_sup_err = 0;   // sup |H - W * gamma_{c hbar}| at fitted c
  double noising_identity_sup_err = 0;
};
ConventionReport resolve_conventions(double hbar);

/// trace[Op rho] for a dense operator and a low-rank state.
Complex trace_against(const OperatorMatrix& op, const QuantumState& s);

}  // namespace pslab

#endif
