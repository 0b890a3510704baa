#include "pslab/dynamics.hpp"

#include <cmath>
#include <random>

#include "pslab/fft.hpp"

namespace pslab {

double default_dt(double hbar) { return std::min(0.01, 0.1 * std::sqrt(hbar)); }

namespace {

QuantumState propagate_split_step(const QuantumState& s, const HamiltonianModel& model, double T,
                                  double dt) {
  const PhaseSpaceGrid& g = s.grid;
  const Complex I(0, 1);
  long steps = std::lround(T / dt);
  if (steps < 1) steps = 1;
  if (std::abs(steps * dt - T) > 1e-9 * std::max(1.0, T))
    dt = T / steps;  // snap so dt divides T exactly

  const auto& h = model.sep();
  const long total = g.total_points();
  VectorXcd half_v(total), full_v(total);
  for (long flat = 0; flat < total; ++flat) {
    double v = h.V(g.point(flat));
    half_v[flat] = std::exp(-I * (v * 0.5 * dt / g.hbar));
    full_v[flat] = half_v[flat] * half_v[flat];
  }
  VectorXcd kin = momentum_multiplier(
      g, [&](const VectorXd& p) { return std::exp(-I * (h.K(p) * dt / g.hbar)); });

  const Fft& fft = fft_for(g.dim, g.n_x);
  const double inv_n = 1.0 / static_cast<double>(total);
  QuantumState out = s;
  for (auto& b : out.branches) {
    b.psi.array() *= half_v.array();
    for (long step = 0; step < steps; ++step) {
      fft.forward(b.psi);
      b.psi.array() *= kin.array();
      fft.backward(b.psi);
      b.psi *= inv_n;
      if (step + 1 < steps) b.psi.array() *= full_v.array();
    }
    b.psi.array() *= half_v.array();
  }
  return out;
}

}  // namespace

DensePropagator::DensePropagator(const HamiltonianModel& model, const PhaseSpaceGrid& g)
    : h_op_(weyl_quantize([&](const VectorXd& a) { return model.symbol(a); }, g)) {
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(h_op_.entries);
  if (es.info() != Eigen::Success) throw DomainError("DensePropagator: eigensolve failed");
  eigenvalues_ = es.eigenvalues();
  eigenvectors_ = es.eigenvectors();
}

MatrixXcd DensePropagator::unitary(double T) const {
  const Complex I(0, 1);
  VectorXcd phase(eigenvalues_.size());
  for (long i = 0; i < eigenvalues_.size(); ++i)
    phase[i] = std::exp(-I * (eigenvalues_[i] * T / h_op_.grid.hbar));
  return eigenvectors_ * phase.asDiagonal() * eigenvectors_.adjoint();
}

QuantumState propagate_quantum(const QuantumState& s, const HamiltonianModel& model, double T,
                               double dt) {
  if (dt <= 0) dt = default_dt(s.grid.hbar);
  check_boundary(s, "propagate_quantum(in)");
  QuantumState out;
  if (T == 0) {
    out = s;
  } else if (model.separable()) {
    out = propagate_split_step(s, model, T, dt);
  } else {
    if (s.grid.total_points() > kDenseCap)
      throw DomainError("propagate_quantum: general symbol requires n_x <= 1024 (dense)");
    DensePropagator prop(model, s.grid);
    MatrixXcd u = prop.unitary(T);
    out = s;
    for (auto& b : out.branches) b.psi = u * b.psi;
  }
  check_boundary(out, "propagate_quantum(out)");
  return out;
}

namespace {

VectorXd hamiltonian_rhs(const HamiltonianModel& model, const VectorXd& alpha) {
  const int D = model.dim();
  VectorXd g = model.symbol_grad(alpha);
  VectorXd rhs(2 * D);
  rhs.head(D) = g.tail(D);   // dx/dt =  dH/dp
  rhs.tail(D) = -g.head(D);  // dp/dt = -dH/dx
  return rhs;
}

VectorXd leapfrog_step(const HamiltonianModel& model, const VectorXd& alpha, double dt) {
  const int D = model.dim();
  const auto& h = model.sep();
  VectorXd x = alpha.head(D), p = alpha.tail(D);
  p -= 0.5 * dt * h.grad_V(x);
  x += dt * h.grad_K(p);
  p -= 0.5 * dt * h.grad_V(x);
  VectorXd out(2 * D);
  out << x, p;
  return out;
}

VectorXd midpoint_step(const HamiltonianModel& model, const VectorXd& alpha, double dt,
                       double tol) {
  VectorXd z = alpha;
  for (int iter = 0; iter < 100; ++iter) {
    VectorXd znew = alpha + dt * hamiltonian_rhs(model, 0.5 * (alpha + z));
    double err = (znew - z).norm();
    z = znew;
    if (err < tol) return z;
  }
  throw DomainError("flow_point: implicit midpoint failed to converge");
}

VectorXd flow_raw(const HamiltonianModel& model, VectorXd alpha, double T, double dt) {
  if (T == 0) return alpha;
  long steps = std::max(1L, std::lround(std::abs(T) / dt));
  double h = T / steps;
  for (long i = 0; i < steps; ++i) {
    alpha = model.separable() ? leapfrog_step(model, alpha, h)
                              : midpoint_step(model, alpha, h, 1e-13);
    if (!model.lipschitz_box.contains(alpha, 1e-9))
      throw DomainError("flow_point: trajectory left the lipschitz_box");
  }
  return alpha;
}

}  // namespace

PhasePoint flow_point(const PhasePoint& alpha0, const HamiltonianModel& model, double T, double dt,
                      double tol_E) {
  const double e0 = model.symbol(alpha0.alpha);
  VectorXd a;
  for (;;) {
    a = flow_raw(model, alpha0.alpha, T, dt);
    double drift = std::abs(model.symbol(a) - e0);
    if (drift <= tol_E || dt < 1e-7) break;
    dt *= 0.5;
  }
  return PhasePoint(a);
}

std::vector<TrajectorySample> flow_trajectory(const PhasePoint& alpha0,
                                              const HamiltonianModel& model, double T, double dt) {
  long steps = std::max(1L, std::lround(T / dt));
  double h = T / steps;
  std::vector<TrajectorySample> traj;
  VectorXd a = alpha0.alpha;
  traj.push_back({0.0, a, model.symbol(a)});
  for (long i = 0; i < steps; ++i) {
    a = model.separable() ? leapfrog_step(model, a, h) : midpoint_step(model, a, h, 1e-13);
    traj.push_back({(i + 1) * h, a, model.symbol(a)});
  }
  return traj;
}

PhaseSpaceMeasure pushforward(const PhaseSpaceMeasure& m, const HamiltonianModel& model, double T,
                              double dt) {
  if (!m.signed_allowed && m.masses.size() > 0 && m.masses.minCoeff() < 0)
    throw DomainError("pushforward: negative masses");
  PhaseSpaceMeasure out = m.to_particles();
  if (T == 0) return out;
  for (long i = 0; i < out.size(); ++i) {
    PhasePoint a = flow_point(PhasePoint(VectorXd(out.locations.row(i))), model, T, dt);
    out.locations.row(i) = a.alpha.transpose();
  }
  return out;
}

double flow_lipschitz(const HamiltonianModel& model, double T, const PhaseSpaceBox& sample_box,
                      int n_samples, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0, 1);
  const int n = sample_box.dim2();
  auto sample = [&]() {
    VectorXd a(n);
    for (int i = 0; i < n; ++i)
      a[i] = sample_box.lo[i] + (sample_box.hi[i] - sample_box.lo[i]) * unif(rng);
    return a;
  };
  double worst = 0;
  for (int s = 0; s < n_samples; ++s) {
    VectorXd a = sample();
    VectorXd b;
    if (s % 2 == 0) {
      b = sample();
    } else {  // nearby pair probes the local Lipschitz constant
      VectorXd d(n);
      for (int i = 0; i < n; ++i) d[i] = unif(rng) - 0.5;
      b = a + 1e-4 * d / d.norm();
    }
    double sep = (b - a).norm();
    if (sep < 1e-12) continue;
    VectorXd fa = flow_point(PhasePoint(a), model, T).alpha;
    VectorXd fb = flow_point(PhasePoint(b), model, T).alpha;
    worst = std::max(worst, (fb - fa).norm() / sep);
  }
  return worst;
}

double step_jacobian_det(const PhasePoint& alpha, const HamiltonianModel& model, double dt) {
  const int n = static_cast<int>(alpha.alpha.size());
  const double h = 1e-6;
  MatrixXd jac(n, n);
  for (int j = 0; j < n; ++j) {
    VectorXd ap = alpha.alpha, am = alpha.alpha;
    ap[j] += h;
    am[j] -= h;
    VectorXd fp = model.separable() ? leapfrog_step(model, ap, dt) : midpoint_step(model, ap, dt, 1e-14);
    VectorXd fm = model.separable() ? leapfrog_step(model, am, dt) : midpoint_step(model, am, dt, 1e-14);
    jac.col(j) = (fp - fm) / (2 * h);
  }
  return jac.determinant();
}

}  // namespace pslab
