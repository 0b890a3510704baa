#ifndef PSLAB_DYNAMICS_HPP
#define PSLAB_DYNAMICS_HPP

#include "pslab/hamiltonian.hpp"
#include "pslab/measure.hpp"
#include "pslab/state.hpp"
#include "pslab/transforms.hpp"

namespace pslab {

/// Default quantum time step: min(0.01, 0.1 sqrt(hbar)).
double default_dt(double hbar);

/// Evolve every branch by exp(-i H T / hbar).  Separable models use Strang
/// split-step (V/2 - K - V/2, exactly unitary); general symbols use the dense
/// eigendecomposition of weyl_quantize(H) (D = 1, n_x <= 1024).
QuantumState propagate_quantum(const QuantumState& s, const HamiltonianModel& model, double T,
                               double dt = -1);

/// Dense propagator for repeated application (shares the eigendecomposition).
class DensePropagator {
 public:
  DensePropagator(const HamiltonianModel& model, const PhaseSpaceGrid& g);
  /// U(T) = V exp(-i lambda T / hbar) V^dagger as a dense matrix.
  MatrixXcd unitary(double T) const;
  const OperatorMatrix& hamiltonian() const { return h_op_; }

 private:
  OperatorMatrix h_op_;
  VectorXd eigenvalues_;
  MatrixXcd eigenvectors_;
};

/// One classical trajectory point: leapfrog (separable) or implicit midpoint
/// (general symbol).  Retries with refined dt until the energy drift is below
/// tol_E; throws on box exit.
PhasePoint flow_point(const PhasePoint& alpha0, const HamiltonianModel& model, double T,
                      double dt = 1e-3, double tol_E = 1e-8);

struct TrajectorySample {
  double t;
  VectorXd alpha;
  double energy;
};
std::vector<TrajectorySample> flow_trajectory(const PhasePoint& alpha0,
                                              const HamiltonianModel& model, double T, double dt);

/// Exact pushforward of a discrete measure: advect every support point,
/// masses unchanged; output is a particle measure (no re-gridding).
PhaseSpaceMeasure pushforward(const PhaseSpaceMeasure& m, const HamiltonianModel& model, double T,
                              double dt = 1e-3);

/// Empirical Lipschitz constant of Phi_T over sampled pairs in the box.
double flow_lipschitz(const HamiltonianModel& model, double T, const PhaseSpaceBox& sample_box,
                      int n_samples, unsigned seed = 7);

/// Finite-difference Jacobian determinant of one integrator step at alpha
/// (area-preservation check for leapfrog).
double step_jacobian_det(const PhasePoint& alpha, const HamiltonianModel& model, double dt);

}  // namespace pslab

#endif
