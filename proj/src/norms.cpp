#include "pslab/norms.hpp"

#include <cmath>
#include <stdexcept>

#include "pslab/fft.hpp"

namespace pslab {

std::vector<MonomialIndex> canonical_words(int dim, int k) {
  if (k < 0 || k > kMaxMonomialDegree) throw DomainError("monomial degree out of range");
  std::vector<MonomialIndex> out;
  if (k == 0) {
    out.push_back({});
    return out;
  }
  // Nondecreasing words over [0, 2D): one representative per multi-index.
  std::vector<int> w(k, 0);
  while (true) {
    out.push_back({w});
    int i = k - 1;
    while (i >= 0 && w[i] == 2 * dim - 1) --i;
    if (i < 0) break;
    int v = w[i] + 1;
    for (int j = i; j < k; ++j) w[j] = v;
  }
  return out;
}

VectorXcd apply_centered_monomial(const PhaseSpaceGrid& g, const VectorXcd& psi,
                                  const MonomialIndex& word, const PhasePoint& alpha) {
  if (word.degree() > kMaxMonomialDegree) throw DomainError("monomial degree > 4");
  VectorXcd v = psi;
  const long n = g.total_points();
  for (int i = word.degree() - 1; i >= 0; --i) {
    const int m = word.word[i];
    if (m < 0 || m >= 2 * g.dim) throw DomainError("monomial index out of range");
    if (m < g.dim) {
      const double c = alpha.alpha(m);
      for (long j = 0; j < n; ++j) v(j) *= g.point(j)(m) - c;
    } else {
      const int axis = m - g.dim;
      const double c = alpha.alpha(m);
      VectorXcd mult = momentum_multiplier(
          g, [&](const VectorXd& p) { return Complex(p(axis) - c, 0.0); });
      apply_momentum_multiplier(g, v, mult);
    }
  }
  return v;
}

double sobolev_norm_vector_sum(const PhaseSpaceGrid& g, const VectorXcd& psi, int k,
                               const PhasePoint& alpha) {
  double total = 0.0;
  for (const MonomialIndex& w : canonical_words(g.dim, k))
    total += l2_norm(g, apply_centered_monomial(g, psi, w, alpha));
  return total;
}

double sobolev_norm_vector(const PhaseSpaceGrid& g, const VectorXcd& psi, int k,
                           const PhasePoint& alpha) {
  if (k == 0) return l2_norm(g, psi);
  if (k == 1) {
    double q = 0.0;
    for (const MonomialIndex& w : canonical_words(g.dim, 1)) {
      double nn = l2_norm(g, apply_centered_monomial(g, psi, w, alpha));
      q += nn * nn;
    }
    return std::sqrt(q);
  }
  return sobolev_norm_vector_sum(g, psi, k, alpha);
}

double sobolev_norm(const QuantumState& s, int k, const PhasePoint& alpha) {
  if (k <= 1) {
    double q = 0.0;
    for (const Branch& b : s.branches) {
      double nn = sobolev_norm_vector(s.grid, b.psi, k, alpha);
      q += b.weight * nn * nn;
    }
    return std::sqrt(q);
  }
  double total = 0.0;
  for (const Branch& b : s.branches)
    total += b.weight * sobolev_norm_vector(s.grid, b.psi, k, alpha);
  return total;
}

std::vector<UncertaintyChainEntry> uncertainty_chain_check(const QuantumState& s,
                                                           const PhasePoint& alpha, int k_max) {
  std::vector<UncertaintyChainEntry> out;
  const double rt = std::sqrt(s.grid.hbar);
  double prev = sobolev_norm(s, 0, alpha);
  for (int k = 1; k <= k_max; ++k) {
    double cur = sobolev_norm(s, k, alpha);
    double margin = cur - rt * prev;
    out.push_back({k, cur, prev, margin, margin >= -1e-12 * cur});
    prev = cur;
  }
  return out;
}

std::vector<PhasePoint> z_norm_centers(const PhaseSpaceGrid& g, const PhaseSpaceBox& box) {
  const double step = std::sqrt(g.hbar);
  std::vector<PhasePoint> pts;
  std::vector<std::vector<double>> axes(2 * g.dim);
  for (int a = 0; a < 2 * g.dim; ++a) {
    double lo = box.lo(a), hi = box.hi(a);
    int cnt = std::max(1, static_cast<int>(std::floor((hi - lo) / step)) + 1);
    double off = 0.5 * ((hi - lo) - step * (cnt - 1));
    for (int i = 0; i < cnt; ++i) axes[a].push_back(lo + off + step * i);
  }
  std::vector<int> idx(2 * g.dim, 0);
  while (true) {
    PhasePoint pt = PhasePoint::zero(g.dim);
    for (int a = 0; a < 2 * g.dim; ++a) pt.alpha(a) = axes[a][idx[a]];
    pts.push_back(pt);
    int a = 2 * g.dim - 1;
    while (a >= 0 && ++idx[a] == static_cast<int>(axes[a].size())) idx[a--] = 0;
    if (a < 0) break;
  }
  return pts;
}

double z_norm(const OperatorMatrix& w, int k, const std::vector<PhasePoint>& centers) {
  if (k > 3) throw DomainError("z_norm supports k <= 3");
  if (centers.empty()) throw DomainError("z_norm needs at least one center");
  double best = 0.0;
  for (const PhasePoint& c : centers) {
    VectorXcd phi = coherent_amplitudes(w.grid, c);
    VectorXcd wphi = apply_operator(w, phi);
    best = std::max(best, sobolev_norm_vector(w.grid, wphi, k, c));
  }
  return best;
}

OffdiagonalReport offdiagonal_decay_check(const OperatorMatrix& w, int k,
                                          const std::vector<std::pair<PhasePoint, PhasePoint>>& pairs,
                                          const std::vector<PhasePoint>& z_centers) {
  OffdiagonalReport rep;
  rep.z_norm_value = z_norm(w, k, z_centers);
  rep.max_ratio = 0.0;
  for (const auto& [a, b] : pairs) {
    VectorXcd ca = coherent_amplitudes(w.grid, a);
    VectorXcd cb = coherent_amplitudes(w.grid, b);
    double melem = std::abs(inner(w.grid, ca, apply_operator(w, cb)));
    double sep = (a.alpha - b.alpha).norm();
    double ratio = melem * std::pow(sep, k) / rep.z_norm_value;
    rep.samples.push_back({a.alpha, b.alpha, melem, ratio});
    rep.max_ratio = std::max(rep.max_ratio, ratio);
  }
  return rep;
}

double operator_norm(const MatrixXcd& a, const PhaseSpaceGrid& g) {
  (void)g;
  const long n = a.rows();
  VectorXcd v(n);
  for (long i = 0; i < n; ++i)
    v(i) = Complex(std::cos(0.7 * i + 0.3), std::sin(1.3 * i + 0.1));
  v.normalize();
  double sigma2 = 0.0;
  for (int it = 0; it < 5000; ++it) {
    VectorXcd u = a.adjoint() * (a * v);
    double next = u.norm();
    if (next == 0.0) return 0.0;
    v = u / next;
    if (it > 0 && std::abs(next - sigma2) <= 1e-8 * next) {
      sigma2 = next;
      break;
    }
    sigma2 = next;
  }
  return std::sqrt(sigma2);
}

double operator_norm(const OperatorMatrix& a) { return operator_norm(a.entries, a.grid); }

}  // namespace pslab
