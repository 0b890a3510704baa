#ifndef PSLAB_HAMILTONIAN_HPP
#define PSLAB_HAMILTONIAN_HPP

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <variant>

#include "pslab/grid.hpp"

namespace pslab {

using ScalarFn = std::function<double(const VectorXd&)>;
using GradFn = std::function<VectorXd(const VectorXd&)>;
using HessFn = std::function<MatrixXd(const VectorXd&)>;

/// H(x,p) = K(p) + V(x) with derivative oracles on R^D.
struct SeparableHamiltonian {
  ScalarFn K, V;
  GradFn grad_K, grad_V;
  HessFn hess_K, hess_V;
};

/// General Weyl symbol H(alpha) on R^{2D} with gradient oracle.
struct GeneralHamiltonian {
  ScalarFn H;     // argument is alpha in R^{2D}
  GradFn grad_H;  // 2D components
};

/// Axis-aligned phase-space box on R^{2D}.
struct PhaseSpaceBox {
  VectorXd lo, hi;
  int dim2() const { return static_cast<int>(lo.size()); }
  bool contains(const VectorXd& a, double pad = 0.0) const {
    for (int i = 0; i < a.size(); ++i)
      if (a[i] < lo[i] - pad || a[i] > hi[i] + pad) return false;
    return true;
  }
};

struct HamiltonianModel {
  std::string name;
  std::variant<SeparableHamiltonian, GeneralHamiltonian> kind;
  PhaseSpaceBox lipschitz_box;

  bool separable() const { return std::holds_alternative<SeparableHamiltonian>(kind); }
  const SeparableHamiltonian& sep() const { return std::get<SeparableHamiltonian>(kind); }
  const GeneralHamiltonian& gen() const { return std::get<GeneralHamiltonian>(kind); }

  int dim() const { return lipschitz_box.dim2() / 2; }
  /// Symbol value H(alpha) regardless of kind.
  double symbol(const VectorXd& alpha) const;
  /// Symbol gradient on R^{2D}.
  VectorXd symbol_grad(const VectorXd& alpha) const;
};

struct AdmissibilityReport {
  double lambda_H = 0;                   // 1/2 (sup||Hess K|| + sup||Hess V||)
  double sup_hess_K = 0, sup_hess_V = 0; // separable case
  std::map<int, double> sup_partial;     // order |J| in {2,3,4} -> sampled sup |d^J H|
};

/// Dense-sampling estimate of Lambda_H and the admissibility derivative sups.
/// Samples the Hessian spectral norm on a lattice of the lipschitz_box.
AdmissibilityReport estimate_lipschitz(const HamiltonianModel& model,
                                       int samples_per_axis = 201);

// Canonical models used throughout the experiments. D is the spatial dimension.
// Models with globally bounded Hessians get a generous default box: their
// Lipschitz constants do not depend on it, and the flow guard should only
// trip on genuine runaway trajectories.
HamiltonianModel harmonic_model(int dim, double box_halfwidth = 24.0);
HamiltonianModel free_model(int dim, double box_halfwidth = 24.0);
HamiltonianModel pendulum_model(int dim, double box_halfwidth = 24.0);         // V = -cos x
HamiltonianModel affine_model(int dim, double velocity, double force,
                              double box_halfwidth = 24.0);                    // K = v.p, V = F.x
HamiltonianModel quartic_model(int dim, double box_halfwidth = 3.0);           // V = x^4
HamiltonianModel nonseparable_model(double box_halfwidth = 6.0);               // D = 1
HamiltonianModel model_by_name(const std::string& name, int dim);

}  // namespace pslab

#endif
