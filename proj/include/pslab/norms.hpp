#ifndef PSLAB_NORMS_HPP
#define PSLAB_NORMS_HPP

#include <vector>

#include "pslab/hamiltonian.hpp"
#include "pslab/state.hpp"
#include "pslab/transforms.hpp"

namespace pslab {

/// A word of phase-space operator indices in [0, 2D): entries < D are
/// position factors, entries >= D are momentum factors.  Canonical words are
/// sorted ascending (positions before momenta).
struct MonomialIndex {
  std::vector<int> word;
  int degree() const { return static_cast<int>(word.size()); }
};

/// All canonical words of degree k over 2D indices (one per multi-index).
std::vector<MonomialIndex> canonical_words(int dim, int k);

inline constexpr int kMaxMonomialDegree = 4;

/// (alpha_hat - alpha)_{m_1} ... (alpha_hat - alpha)_{m_k} psi, rightmost
/// factor applied first.  Position factors are diagonal; momentum factors are
/// spectral.
VectorXcd apply_centered_monomial(const PhaseSpaceGrid& g, const VectorXcd& psi,
                                  const MonomialIndex& word, const PhasePoint& alpha);

/// Re-centered Sobolev norm of a raw amplitude vector.
/// k = 1: quadratic form (sum_j ||(a_j - alpha_j) psi||^2)^{1/2}.
/// k >= 2: sum over canonical words |J| = k of ||(a - alpha)_J psi||.
double sobolev_norm_vector(const PhaseSpaceGrid& g, const VectorXcd& psi, int k,
                           const PhasePoint& alpha);
/// Sum-form norm at any k (the k>=2 convention applied also at k=1).
double sobolev_norm_vector_sum(const PhaseSpaceGrid& g, const VectorXcd& psi, int k,
                               const PhasePoint& alpha);

/// Branch-weighted state norms: quadratic mean over branches for k = 1,
/// weighted sum of branch norms for k >= 2.
double sobolev_norm(const QuantumState& s, int k, const PhasePoint& alpha);

struct UncertaintyChainEntry {
  int k;
  double norm_k, norm_km1;
  double margin;  // norm_k - sqrt(hbar)*norm_km1
  bool holds;
};
std::vector<UncertaintyChainEntry> uncertainty_chain_check(const QuantumState& s,
                                                           const PhasePoint& alpha, int k_max);

/// Z^k localization norm: max over lattice centers of ||W |alpha>||_{H^k_alpha}.
double z_norm(const OperatorMatrix& w, int k, const std::vector<PhasePoint>& centers);

/// Default Z^k center list: spacing sqrt(hbar) covering the box.
std::vector<PhasePoint> z_norm_centers(const PhaseSpaceGrid& g, const PhaseSpaceBox& box);

struct OffdiagonalSample {
  VectorXd alpha, beta;
  double matrix_element;  // |<alpha|W|beta>|
  double ratio;           // |<a|W|b>| |a-b|^k / ||W||_{Z^k}
};
struct OffdiagonalReport {
  double z_norm_value;
  double max_ratio;
  std::vector<OffdiagonalSample> samples;
};
OffdiagonalReport offdiagonal_decay_check(const OperatorMatrix& w, int k,
                                          const std::vector<std::pair<PhasePoint, PhasePoint>>& pairs,
                                          const std::vector<PhasePoint>& z_centers);

/// Spectral norm by power iteration on A^dagger A (relative tolerance 1e-8).
double operator_norm(const OperatorMatrix& a);
double operator_norm(const MatrixXcd& a, const PhaseSpaceGrid& g);

}  // namespace pslab

#endif
