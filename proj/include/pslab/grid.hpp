#ifndef PSLAB_GRID_HPP
#define PSLAB_GRID_HPP

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

namespace pslab {

using Eigen::VectorXd;
using Eigen::VectorXcd;
using Eigen::MatrixXd;
using Eigen::MatrixXcd;
using Complex = std::complex<double>;

/// Thrown when an operation's preconditions are violated (bad grid
/// parameters, boundary leaks, coverage failures, ...).
class DomainError : public std::runtime_error {
 public:
  explicit DomainError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Uniform discretization of a D-dimensional position box together with
/// its discrete Fourier dual momentum axis.  Phase space is 2D-dimensional;
/// points are ordered (x_1..x_D, p_1..p_D).
struct PhaseSpaceGrid {
  int dim = 1;          // spatial dimension D
  double hbar = 1.0;
  double x_min = -10.0; // per spatial axis (same box on every axis)
  double x_max = 10.0;
  int n_x = 256;        // points per spatial axis, power of two

  double box_length() const { return x_max - x_min; }
  double dx() const { return box_length() / n_x; }
  // Fourier dual spacing 2*pi*hbar / L
  double dp() const { return 2.0 * M_PI * hbar / box_length(); }
  double p_max() const { return dp() * (n_x / 2); }
  long total_points() const {
    long n = 1;
    for (int d = 0; d < dim; ++d) n *= n_x;
    return n;
  }
  double cell_volume() const {
    double v = 1.0;
    for (int d = 0; d < dim; ++d) v *= dx();
    return v;
  }

  VectorXd x_axis() const;
  // symmetric about 0 up to one grid step: p_k = dp*(k - n/2), k = 0..n-1
  VectorXd p_axis() const;

  // flat index <-> per-axis indices, row-major (axis 0 slowest)
  void unflatten(long flat, int* idx) const;
  long flatten(const int* idx) const;

  // position of grid point with flat index `flat` (length D)
  VectorXd point(long flat) const;
};

PhaseSpaceGrid make_grid(int dim, double hbar, double x_min, double x_max, int n_x);

/// A point alpha in phase space R^{2D}, (x-components, then p-components).
struct PhasePoint {
  VectorXd alpha;

  PhasePoint() = default;
  explicit PhasePoint(VectorXd a);
  static PhasePoint zero(int dim) { return PhasePoint(VectorXd::Zero(2 * dim)); }
  static PhasePoint of(std::initializer_list<double> coords);

  int dim() const { return static_cast<int>(alpha.size()) / 2; }
  Eigen::VectorBlock<const VectorXd> x() const { return alpha.head(dim()); }
  Eigen::VectorBlock<const VectorXd> p() const { return alpha.tail(dim()); }
  double norm() const { return alpha.norm(); }
};

bool is_power_of_two(long n);

}  // namespace pslab

#endif
