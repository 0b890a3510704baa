#include "pslab/state.hpp"

#include <numeric>

#include "pslab/fft.hpp"

namespace pslab {

double QuantumState::trace() const {
  double t = 0;
  for (const auto& b : branches) t += b.weight * b.psi.squaredNorm() * grid.cell_volume();
  return t;
}

void QuantumState::validate(double weight_tol, double norm_tol) const {
  if (branches.empty()) throw DomainError("QuantumState: no branches");
  double wsum = 0;
  for (const auto& b : branches) {
    if (b.weight < 0) throw DomainError("QuantumState: negative branch weight");
    wsum += b.weight;
    double n = l2_norm(grid, b.psi);
    if (std::abs(n - 1.0) > norm_tol)
      throw DomainError("QuantumState: branch norm " + std::to_string(n) + " != 1");
  }
  if (std::abs(wsum - 1.0) > weight_tol)
    throw DomainError("QuantumState: weights sum to " + std::to_string(wsum));
}

Complex inner(const PhaseSpaceGrid& g, const VectorXcd& a, const VectorXcd& b) {
  return a.dot(b) * g.cell_volume();  // Eigen dot conjugates the left argument
}

double l2_norm(const PhaseSpaceGrid& g, const VectorXcd& psi) {
  return psi.norm() * std::sqrt(g.cell_volume());
}

double fidelity(const QuantumState& a, const QuantumState& b) {
  if (!a.pure() || !b.pure()) throw DomainError("fidelity: pure states only");
  return std::abs(inner(a.grid, a.branches[0].psi, b.branches[0].psi));
}

double center_margin(const PhaseSpaceGrid& g) { return 5.0 * std::sqrt(g.hbar); }

VectorXcd coherent_amplitudes(const PhaseSpaceGrid& g, const PhasePoint& alpha) {
  if (alpha.dim() != g.dim) throw DomainError("coherent_state: dimension mismatch");
  const double margin = center_margin(g);
  for (int d = 0; d < g.dim; ++d) {
    if (alpha.x()[d] < g.x_min + margin || alpha.x()[d] > g.x_max - margin)
      throw DomainError("coherent_state: center too close to the position boundary");
    if (std::abs(alpha.p()[d]) > g.p_max() - margin)
      throw DomainError("coherent_state: center too close to the momentum boundary");
  }
  const long total = g.total_points();
  const Complex I(0, 1);
  VectorXcd psi(total);
  for (long flat = 0; flat < total; ++flat) {
    VectorXd x = g.point(flat);
    VectorXd xc = x - alpha.x();
    double phase = alpha.p().dot(x - 0.5 * alpha.x()) / g.hbar;
    psi[flat] = std::exp(I * phase) * std::exp(-xc.squaredNorm() / (2.0 * g.hbar));
  }
  psi /= l2_norm(g, psi);  // analytic prefactor is (pi*hbar)^{-D/4}; renormalize exactly
  return psi;
}

QuantumState coherent_state(const PhaseSpaceGrid& g, const PhasePoint& alpha) {
  QuantumState s;
  s.grid = g;
  s.branches.push_back({1.0, coherent_amplitudes(g, alpha)});
  return s;
}

void translate_amplitudes(const PhaseSpaceGrid& g, VectorXcd& psi, const PhasePoint& alpha) {
  const Complex I(0, 1);
  shift_position(g, psi, alpha.x());
  const long total = g.total_points();
  for (long flat = 0; flat < total; ++flat) {
    VectorXd x = g.point(flat);
    psi[flat] *= std::exp(I * (alpha.p().dot(x - 0.5 * alpha.x()) / g.hbar));
  }
}

QuantumState translate(const QuantumState& s, const PhasePoint& alpha) {
  QuantumState out = s;
  for (auto& b : out.branches) translate_amplitudes(s.grid, b.psi, alpha);
  check_boundary(out, "translate");
  return out;
}

QuantumState mix_coherent(const PhaseSpaceGrid& g,
                          const std::vector<std::pair<PhasePoint, double>>& atoms) {
  if (atoms.empty()) throw DomainError("mix_coherent: empty atom list");
  if (atoms.size() > kMixtureBranchCap)
    throw DomainError("mix_coherent: branch cap exceeded");
  double mass = 0;
  for (const auto& [a, w] : atoms) {
    if (w < 0) throw DomainError("mix_coherent: negative mass");
    mass += w;
  }
  if (std::abs(mass - 1.0) > 1e-8)
    throw DomainError("mix_coherent: masses sum to " + std::to_string(mass));
  QuantumState s;
  s.grid = g;
  for (const auto& [a, w] : atoms)
    s.branches.push_back({w / mass, coherent_amplitudes(g, a)});
  return s;
}

namespace {
// Golub-Welsch Gauss-Hermite nodes/weights for \int e^{-t^2} f(t) dt.
void gauss_hermite(int n, VectorXd& nodes, VectorXd& weights) {
  MatrixXd J = MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) {
    double b = std::sqrt(i / 2.0);
    J(i, i - 1) = b;
    J(i - 1, i) = b;
  }
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(J);
  nodes = es.eigenvalues();
  weights.resize(n);
  const double mu0 = std::sqrt(M_PI);
  for (int i = 0; i < n; ++i) weights[i] = mu0 * es.eigenvectors()(0, i) * es.eigenvectors()(0, i);
}
}  // namespace

QuantumState mix_coherent_gaussian(const PhaseSpaceGrid& g, const PhasePoint& center,
                                   double sigma2, int nodes_per_axis) {
  const int axes = 2 * g.dim;
  long count = 1;
  for (int a = 0; a < axes; ++a) count *= nodes_per_axis;
  if (count > kMixtureBranchCap) throw DomainError("mix_coherent_gaussian: branch cap exceeded");
  VectorXd t, w;
  gauss_hermite(nodes_per_axis, t, w);
  std::vector<std::pair<PhasePoint, double>> atoms;
  std::vector<int> idx(axes, 0);
  for (long c = 0; c < count; ++c) {
    long rem = c;
    VectorXd a(axes);
    double mass = 1.0;
    for (int ax = axes - 1; ax >= 0; --ax) {
      int i = static_cast<int>(rem % nodes_per_axis);
      rem /= nodes_per_axis;
      a[ax] = center.alpha[ax] + std::sqrt(2.0 * sigma2) * t[i];
      mass *= w[i] / std::sqrt(M_PI);
    }
    atoms.emplace_back(PhasePoint(a), mass);
  }
  // GH weights already sum to 1 after normalization; renormalize for safety
  double total = 0;
  for (auto& [a, m] : atoms) total += m;
  for (auto& [a, m] : atoms) m /= total;
  return mix_coherent(g, atoms);
}

double boundary_mass(const QuantumState& s) {
  const PhaseSpaceGrid& g = s.grid;
  // Margin 2*sqrt(hbar*log(1/eps)) with eps = 1e-8: a Gaussian of width
  // sqrt(hbar) carries < eps mass beyond that distance.
  // A 6*sqrt(hbar) guard band keeps the Gaussian wrap-around tail below
  // exp(-36) ~ 2e-16 whenever the monitored band mass stays under the abort
  // threshold, while leaving usable bulk at the coarse end of the hbar range.
  const double margin = 6.0 * std::sqrt(g.hbar);
  // branch-weighted tail mass: a mixture's boundary content is the weighted
  // sum over branches, not the worst unweighted branch
  double sum_x = 0, sum_p = 0, wtot = 0;
  const long total = g.total_points();
  int idx[8];
  for (const auto& b : s.branches) {
    double mass_x = 0;
    for (long flat = 0; flat < total; ++flat) {
      g.unflatten(flat, idx);
      bool near = false;
      for (int d = 0; d < g.dim; ++d) {
        double x = g.x_min + idx[d] * g.dx();
        if (x < g.x_min + margin || x > g.x_max - margin) near = true;
      }
      if (near) mass_x += std::norm(b.psi[flat]);
    }
    mass_x *= g.cell_volume();
    // momentum-side tail: mass with any |p| beyond p_max - margin
    VectorXcd phi = to_momentum(g, b.psi);
    double mass_p = 0;
    const double dpD = std::pow(g.dp(), g.dim) / std::pow(2 * M_PI * g.hbar, g.dim);
    for (long flat = 0; flat < total; ++flat) {
      g.unflatten(flat, idx);
      bool near = false;
      for (int d = 0; d < g.dim; ++d) {
        double p = g.dp() * (idx[d] - g.n_x / 2);
        if (std::abs(p) > g.p_max() - margin) near = true;
      }
      if (near) mass_p += std::norm(phi[flat]);
    }
    mass_p *= dpD;
    sum_x += b.weight * mass_x;
    sum_p += b.weight * mass_p;
    wtot += b.weight;
  }
  return std::max(sum_x, sum_p) / wtot;
}

void check_boundary(const QuantumState& s, const char* where) {
  double m = boundary_mass(s);
  if (m > kBoundaryAbort)
    throw DomainError(std::string(where) + ": boundary mass " + std::to_string(m) +
                      " exceeds monitor threshold");
}

double position_expectation(const PhaseSpaceGrid& g, const VectorXcd& psi, int axis) {
  const long total = g.total_points();
  int idx[8];
  double e = 0;
  for (long flat = 0; flat < total; ++flat) {
    g.unflatten(flat, idx);
    e += (g.x_min + idx[axis] * g.dx()) * std::norm(psi[flat]);
  }
  return e * g.cell_volume();
}

double momentum_expectation(const PhaseSpaceGrid& g, const VectorXcd& psi, int axis) {
  VectorXcd phi = to_momentum(g, psi);
  const long total = g.total_points();
  int idx[8];
  double e = 0;
  for (long flat = 0; flat < total; ++flat) {
    g.unflatten(flat, idx);
    e += g.dp() * (idx[axis] - g.n_x / 2) * std::norm(phi[flat]);
  }
  return e * std::pow(g.dp(), g.dim) / std::pow(2 * M_PI * g.hbar, g.dim);
}

PhasePoint mean_center(const QuantumState& s) {
  VectorXd a = VectorXd::Zero(2 * s.grid.dim);
  for (const auto& b : s.branches) {
    for (int d = 0; d < s.grid.dim; ++d) {
      a[d] += b.weight * position_expectation(s.grid, b.psi, d);
      a[s.grid.dim + d] += b.weight * momentum_expectation(s.grid, b.psi, d);
    }
  }
  return PhasePoint(a);
}

}  // namespace pslab
