#include "pslab/hamiltonian.hpp"

#include <cmath>

namespace pslab {

double HamiltonianModel::symbol(const VectorXd& alpha) const {
  const int D = dim();
  if (separable()) return sep().K(alpha.tail(D)) + sep().V(alpha.head(D));
  return gen().H(alpha);
}

VectorXd HamiltonianModel::symbol_grad(const VectorXd& alpha) const {
  const int D = dim();
  if (separable()) {
    VectorXd g(2 * D);
    g.head(D) = sep().grad_V(alpha.head(D));
    g.tail(D) = sep().grad_K(alpha.tail(D));
    return g;
  }
  return gen().grad_H(alpha);
}

namespace {

double spectral_norm(const MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (m + m.transpose()));
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

// max over a samples^D lattice of box [lo,hi]^D of ||Hess||_2
double sup_hess(const HessFn& hess, const VectorXd& lo, const VectorXd& hi, int samples) {
  const int D = static_cast<int>(lo.size());
  long count = 1;
  for (int d = 0; d < D; ++d) count *= samples;
  double sup = 0;
  VectorXd x(D);
  for (long c = 0; c < count; ++c) {
    long rem = c;
    for (int d = D - 1; d >= 0; --d) {
      int i = static_cast<int>(rem % samples);
      rem /= samples;
      x[d] = lo[d] + (hi[d] - lo[d]) * i / (samples - 1);
    }
    double v = spectral_norm(hess(x));
    if (!std::isfinite(v)) throw DomainError("estimate_lipschitz: non-finite Hessian");
    sup = std::max(sup, v);
  }
  return sup;
}

// central finite difference of order |J| of f at point a; J lists variable indices
double fd_partial(const ScalarFn& f, VectorXd a, const std::vector<int>& J, double h) {
  if (J.empty()) return f(a);
  std::vector<int> rest(J.begin() + 1, J.end());
  VectorXd ap = a, am = a;
  ap[J[0]] += h;
  am[J[0]] -= h;
  return (fd_partial(f, ap, rest, h) - fd_partial(f, am, rest, h)) / (2 * h);
}

void enumerate_words(int nvars, int k, std::vector<std::vector<int>>& out,
                     std::vector<int> prefix = {}, int start = 0) {
  if (static_cast<int>(prefix.size()) == k) {
    out.push_back(prefix);
    return;
  }
  for (int v = start; v < nvars; ++v) {
    prefix.push_back(v);
    enumerate_words(nvars, k, out, prefix, v);
    prefix.pop_back();
  }
}

}  // namespace

AdmissibilityReport estimate_lipschitz(const HamiltonianModel& model, int samples_per_axis) {
  const int D = model.dim();
  AdmissibilityReport rep;
  const auto& box = model.lipschitz_box;
  if (model.separable()) {
    rep.sup_hess_V = sup_hess(model.sep().hess_V, box.lo.head(D), box.hi.head(D), samples_per_axis);
    rep.sup_hess_K = sup_hess(model.sep().hess_K, box.lo.tail(D), box.hi.tail(D), samples_per_axis);
    rep.lambda_H = 0.5 * (rep.sup_hess_K + rep.sup_hess_V);
  } else {
    // general symbol: Hessian by finite differences of the gradient oracle
    HessFn hess = [&](const VectorXd& a) {
      const double h = 1e-5;
      const int n = static_cast<int>(a.size());
      MatrixXd m(n, n);
      for (int j = 0; j < n; ++j) {
        VectorXd ap = a, am = a;
        ap[j] += h;
        am[j] -= h;
        m.col(j) = (model.gen().grad_H(ap) - model.gen().grad_H(am)) / (2 * h);
      }
      return m;
    };
    int samples = std::min(samples_per_axis, 61);  // 2D-dim lattice, keep it tractable
    double sup = sup_hess(hess, box.lo, box.hi, samples);
    rep.sup_hess_K = rep.sup_hess_V = sup;
    rep.lambda_H = sup;  // conservative: Lambda for general symbols is sup||Hess H||
  }
  // admissibility inspection: sampled sup |d^J H| for |J| = 2, 3, 4
  ScalarFn sym = [&](const VectorXd& a) { return model.symbol(a); };
  const int nvars = 2 * D;
  const int coarse = nvars > 2 ? 7 : 21;
  for (int k = 2; k <= 4; ++k) {
    std::vector<std::vector<int>> words;
    enumerate_words(nvars, k, words);
    double sup = 0;
    long count = 1;
    for (int d = 0; d < nvars; ++d) count *= coarse;
    VectorXd a(nvars);
    for (long c = 0; c < count; ++c) {
      long rem = c;
      for (int d = nvars - 1; d >= 0; --d) {
        int i = static_cast<int>(rem % coarse);
        rem /= coarse;
        a[d] = box.lo[d] + (box.hi[d] - box.lo[d]) * i / (coarse - 1);
      }
      for (const auto& J : words) {
        double v = std::abs(fd_partial(sym, a, J, 0.02));
        if (!std::isfinite(v)) throw DomainError("estimate_lipschitz: non-finite derivative");
        sup = std::max(sup, v);
      }
    }
    rep.sup_partial[k] = sup;
  }
  return rep;
}

namespace {
PhaseSpaceBox sym_box(int dim, double hw) {
  PhaseSpaceBox b;
  b.lo = VectorXd::Constant(2 * dim, -hw);
  b.hi = VectorXd::Constant(2 * dim, hw);
  return b;
}

SeparableHamiltonian kinetic_quadratic(int dim) {
  SeparableHamiltonian h;
  h.K = [](const VectorXd& p) { return 0.5 * p.squaredNorm(); };
  h.grad_K = [](const VectorXd& p) { return p; };
  h.hess_K = [dim](const VectorXd&) { return MatrixXd::Identity(dim, dim); };
  return h;
}
}  // namespace

HamiltonianModel harmonic_model(int dim, double hw) {
  auto h = kinetic_quadratic(dim);
  h.V = [](const VectorXd& x) { return 0.5 * x.squaredNorm(); };
  h.grad_V = [](const VectorXd& x) { return x; };
  h.hess_V = [dim](const VectorXd&) { return MatrixXd::Identity(dim, dim); };
  return {"harmonic", h, sym_box(dim, hw)};
}

HamiltonianModel free_model(int dim, double hw) {
  auto h = kinetic_quadratic(dim);
  h.V = [](const VectorXd&) { return 0.0; };
  h.grad_V = [dim](const VectorXd&) { return VectorXd::Zero(dim); };
  h.hess_V = [dim](const VectorXd&) { return MatrixXd::Zero(dim, dim); };
  return {"free", h, sym_box(dim, hw)};
}

HamiltonianModel pendulum_model(int dim, double hw) {
  auto h = kinetic_quadratic(dim);
  h.V = [](const VectorXd& x) { return -x.array().cos().sum(); };
  h.grad_V = [](const VectorXd& x) { return VectorXd(x.array().sin()); };
  h.hess_V = [](const VectorXd& x) { return MatrixXd(x.array().cos().matrix().asDiagonal()); };
  return {"pendulum", h, sym_box(dim, hw)};
}

HamiltonianModel affine_model(int dim, double velocity, double force, double hw) {
  SeparableHamiltonian h;
  h.K = [velocity](const VectorXd& p) { return velocity * p.sum(); };
  h.grad_K = [velocity, dim](const VectorXd&) { return VectorXd::Constant(dim, velocity); };
  h.hess_K = [dim](const VectorXd&) { return MatrixXd::Zero(dim, dim); };
  h.V = [force](const VectorXd& x) { return force * x.sum(); };
  h.grad_V = [force, dim](const VectorXd&) { return VectorXd::Constant(dim, force); };
  h.hess_V = [dim](const VectorXd&) { return MatrixXd::Zero(dim, dim); };
  return {"affine", h, sym_box(dim, hw)};
}

HamiltonianModel quartic_model(int dim, double hw) {
  auto h = kinetic_quadratic(dim);
  h.V = [](const VectorXd& x) { return x.array().pow(4).sum(); };
  h.grad_V = [](const VectorXd& x) { return VectorXd(4.0 * x.array().pow(3)); };
  h.hess_V = [](const VectorXd& x) {
    return MatrixXd((12.0 * x.array().square()).matrix().asDiagonal());
  };
  HamiltonianModel m{"quartic", h, sym_box(dim, hw)};
  return m;
}

HamiltonianModel nonseparable_model(double hw) {
  GeneralHamiltonian h;
  // H = p^2/2 - cos x + 0.2 sin(x) p / (1+p^2): bounded Hessian, genuinely mixed
  h.H = [](const VectorXd& a) {
    double x = a[0], p = a[1];
    return 0.5 * p * p - std::cos(x) + 0.2 * std::sin(x) * p / (1 + p * p);
  };
  h.grad_H = [](const VectorXd& a) {
    double x = a[0], p = a[1];
    VectorXd g(2);
    g[0] = std::sin(x) + 0.2 * std::cos(x) * p / (1 + p * p);
    g[1] = p + 0.2 * std::sin(x) * (1 - p * p) / ((1 + p * p) * (1 + p * p));
    return g;
  };
  return {"nonseparable", h, sym_box(1, hw)};
}

HamiltonianModel model_by_name(const std::string& name, int dim) {
  if (name == "harmonic") return harmonic_model(dim);
  if (name == "free") return free_model(dim);
  if (name == "pendulum") return pendulum_model(dim);
  if (name == "quartic") return quartic_model(dim);
  if (name == "affine") return affine_model(dim, 1.0, 0.5);
  if (name == "nonseparable") {
    if (dim != 1) throw DomainError("nonseparable model is D=1 only");
    return nonseparable_model();
  }
  throw DomainError("unknown model: " + name);
}

}  // namespace pslab
