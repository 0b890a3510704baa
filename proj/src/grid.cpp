#include "pslab/grid.hpp"

namespace pslab {

bool is_power_of_two(long n) { return n > 0 && (n & (n - 1)) == 0; }

VectorXd PhaseSpaceGrid::x_axis() const {
  VectorXd x(n_x);
  for (int j = 0; j < n_x; ++j) x[j] = x_min + j * dx();
  return x;
}

VectorXd PhaseSpaceGrid::p_axis() const {
  VectorXd p(n_x);
  for (int k = 0; k < n_x; ++k) p[k] = dp() * (k - n_x / 2);
  return p;
}

void PhaseSpaceGrid::unflatten(long flat, int* idx) const {
  for (int d = dim - 1; d >= 0; --d) {
    idx[d] = static_cast<int>(flat % n_x);
    flat /= n_x;
  }
}

long PhaseSpaceGrid::flatten(const int* idx) const {
  long f = 0;
  for (int d = 0; d < dim; ++d) f = f * n_x + idx[d];
  return f;
}

VectorXd PhaseSpaceGrid::point(long flat) const {
  int idx[8];
  unflatten(flat, idx);
  VectorXd x(dim);
  for (int d = 0; d < dim; ++d) x[d] = x_min + idx[d] * dx();
  return x;
}

PhaseSpaceGrid make_grid(int dim, double hbar, double x_min, double x_max, int n_x) {
  if (dim < 1 || dim > 2) throw DomainError("make_grid: dim must be 1 or 2");
  if (!(hbar > 0)) throw DomainError("make_grid: hbar must be positive");
  if (!(x_max > x_min)) throw DomainError("make_grid: degenerate box, need x_max > x_min");
  if (n_x < 16 || !is_power_of_two(n_x))
    throw DomainError("make_grid: n_x must be a power of two and >= 16, got " + std::to_string(n_x));
  PhaseSpaceGrid g;
  g.dim = dim;
  g.hbar = hbar;
  g.x_min = x_min;
  g.x_max = x_max;
  g.n_x = n_x;
  return g;
}

PhasePoint::PhasePoint(VectorXd a) : alpha(std::move(a)) {
  if (alpha.size() % 2 != 0) throw DomainError("PhasePoint: length must be 2D");
  if (!alpha.allFinite()) throw DomainError("PhasePoint: non-finite entries");
}

PhasePoint PhasePoint::of(std::initializer_list<double> coords) {
  VectorXd a(static_cast<long>(coords.size()));
  long i = 0;
  for (double c : coords) a[i++] = c;
  return PhasePoint(a);
}

}  // namespace pslab
