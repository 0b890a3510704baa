#include "pslab/measure.hpp"

#include <cmath>

namespace pslab {

void PhaseSpaceMeasure::validate(bool probability, double tol) const {
  if (!signed_allowed && masses.size() > 0 && masses.minCoeff() < -tol)
    throw DomainError("PhaseSpaceMeasure: negative mass");
  if (probability && std::abs(total_mass() - 1.0) > tol)
    throw DomainError("PhaseSpaceMeasure: total mass " + std::to_string(total_mass()));
  if (grid_supported() && lattice->total() != masses.size())
    throw DomainError("PhaseSpaceMeasure: lattice/mass size mismatch");
  if (!grid_supported() && locations.rows() != masses.size())
    throw DomainError("PhaseSpaceMeasure: location/mass size mismatch");
}

PhaseSpaceMeasure PhaseSpaceMeasure::to_particles() const {
  if (!grid_supported()) return *this;
  PhaseSpaceMeasure out;
  out.dim = dim;
  out.hbar = hbar;
  out.signed_allowed = signed_allowed;
  out.locations.resize(size(), 2 * dim);
  out.masses = masses;
  for (long i = 0; i < size(); ++i) out.locations.row(i) = lattice->point(i);
  return out;
}

VectorXd PhaseSpaceMeasure::mean() const {
  VectorXd m = VectorXd::Zero(2 * dim);
  for (long i = 0; i < size(); ++i) m += masses[i] * location(i);
  return m / total_mass();
}

double PhaseSpaceMeasure::moment_about(const VectorXd& alpha, double power) const {
  double s = 0;
  for (long i = 0; i < size(); ++i)
    s += masses[i] * std::pow((location(i) - alpha).norm(), power);
  return s / total_mass();
}

PhaseSpaceMeasure dirac_measure(int dim, double hbar, const VectorXd& alpha, double mass) {
  PhaseSpaceMeasure m;
  m.dim = dim;
  m.hbar = hbar;
  m.locations = alpha.transpose();
  m.masses = VectorXd::Constant(1, mass);
  return m;
}

PhaseSpaceMeasure particle_measure(int dim, double hbar, MatrixXd locations, VectorXd masses) {
  PhaseSpaceMeasure m;
  m.dim = dim;
  m.hbar = hbar;
  m.locations = std::move(locations);
  m.masses = std::move(masses);
  return m;
}

PhaseSpaceMeasure gaussian_convolve(const PhaseSpaceMeasure& m, double cov) {
  if (!m.grid_supported()) throw DomainError("gaussian_convolve: lattice-supported input required");
  const PhaseLattice& lat = *m.lattice;
  const int axes = lat.dim2();
  VectorXd work = m.masses;  // treated as densities * cell volume; convolution preserves that
  for (int ax = 0; ax < axes; ++ax) {
    const double h = lat.step[ax];
    const int radius = static_cast<int>(std::ceil(8.0 * std::sqrt(cov) / h));
    VectorXd kernel(2 * radius + 1);
    for (int r = -radius; r <= radius; ++r)
      kernel[r + radius] = std::exp(-0.5 * (r * h) * (r * h) / cov);
    kernel /= kernel.sum();  // discrete normalization == trapezoid of the continuum kernel
    // convolve along axis `ax` with zero padding
    VectorXd next = VectorXd::Zero(work.size());
    long stride = 1;
    for (int d = axes - 1; d > ax; --d) stride *= lat.count[d];
    const long n = lat.count[ax];
    const long outer = work.size() / (n * stride);
    for (long o = 0; o < outer; ++o) {
      for (long s = 0; s < stride; ++s) {
        const long base = o * n * stride + s;
        for (long i = 0; i < n; ++i) {
          double acc = 0;
          for (int r = -radius; r <= radius; ++r) {
            long j = i + r;
            if (j < 0 || j >= n) continue;
            acc += kernel[r + radius] * work[base + j * stride];
          }
          next[base + i * stride] = acc;
        }
      }
    }
    work.swap(next);
  }
  PhaseSpaceMeasure out = m;
  out.masses = work;
  return out;
}

double sup_density_diff(const PhaseSpaceMeasure& a, const PhaseSpaceMeasure& b) {
  if (!a.grid_supported() || !b.grid_supported() || a.masses.size() != b.masses.size())
    throw DomainError("sup_density_diff: matching lattice-supported measures required");
  return ((a.masses - b.masses) / a.lattice->cell_volume()).cwiseAbs().maxCoeff();
}

PhaseSpaceMeasure translate_measure(const PhaseSpaceMeasure& m, const VectorXd& v) {
  PhaseSpaceMeasure out = m.to_particles();
  for (long i = 0; i < out.size(); ++i) out.locations.row(i) += v.transpose();
  return out;
}

}  // namespace pslab
