#ifndef PSLAB_MEASURE_HPP
#define PSLAB_MEASURE_HPP

#include <optional>
#include <vector>

#include "pslab/grid.hpp"

namespace pslab {

/// Uniform rectangular lattice on phase space R^{2D} (axis 0 slowest).
struct PhaseLattice {
  VectorXd lo;              // length 2D
  VectorXd step;            // per axis
  std::vector<int> count;   // per axis

  int dim2() const { return static_cast<int>(lo.size()); }
  long total() const {
    long t = 1;
    for (int c : count) t *= c;
    return t;
  }
  double cell_volume() const {
    double v = 1;
    for (int i = 0; i < dim2(); ++i) v *= step[i];
    return v;
  }
  void unflatten(long flat, int* idx) const {
    for (int d = dim2() - 1; d >= 0; --d) {
      idx[d] = static_cast<int>(flat % count[d]);
      flat /= count[d];
    }
  }
  VectorXd point(long flat) const {
    int idx[8];
    unflatten(flat, idx);
    VectorXd a(dim2());
    for (int d = 0; d < dim2(); ++d) a[d] = lo[d] + idx[d] * step[d];
    return a;
  }
};

/// Discrete measure on phase space: either grid-supported (lattice + per-cell
/// masses) or a weighted particle cloud.  Signed values are allowed only when
/// `signed_allowed` is set (Wigner functions); OT rejects signed inputs.
struct PhaseSpaceMeasure {
  int dim = 1;  // D
  double hbar = 0;
  bool signed_allowed = false;
  std::optional<PhaseLattice> lattice;  // set iff grid-supported
  MatrixXd locations;                   // particles: (#atoms) x 2D
  VectorXd masses;                      // per atom / per lattice cell

  long size() const { return masses.size(); }
  bool grid_supported() const { return lattice.has_value(); }
  double total_mass() const { return masses.sum(); }
  VectorXd location(long i) const {
    return grid_supported() ? lattice->point(i) : VectorXd(locations.row(i));
  }
  /// Density value at cell i (lattice-supported only).
  double density(long i) const { return masses[i] / lattice->cell_volume(); }

  void validate(bool probability = true, double tol = 1e-8) const;
  PhaseSpaceMeasure to_particles() const;

  VectorXd mean() const;
  double moment_about(const VectorXd& alpha, double power) const;
};

/// Measure supported on one atom.
PhaseSpaceMeasure dirac_measure(int dim, double hbar, const VectorXd& alpha, double mass = 1.0);

/// Build a particle measure from raw atoms.
PhaseSpaceMeasure particle_measure(int dim, double hbar, MatrixXd locations, VectorXd masses);

/// Convolve a lattice-supported measure with an isotropic Gaussian of
/// covariance `cov` * Id (separable direct convolution, zero-padded).
PhaseSpaceMeasure gaussian_convolve(const PhaseSpaceMeasure& m, double cov);

/// Max |density difference| over common lattice (lattices must match).
double sup_density_diff(const PhaseSpaceMeasure& a, const PhaseSpaceMeasure& b);

/// Translate every support point by v.
PhaseSpaceMeasure translate_measure(const PhaseSpaceMeasure& m, const VectorXd& v);

}  // namespace pslab

#endif
