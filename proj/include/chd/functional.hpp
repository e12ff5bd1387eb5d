#ifndef CHD_FUNCTIONAL_HPP
#define CHD_FUNCTIONAL_HPP

#include <memory>
#include <vector>

#include "chd/grid.hpp"
#include "chd/hminus.hpp"
#include "chd/material.hpp"

namespace chd {

struct StepperParams {
  double tau = 0.01;
  double delta = 1e-3;
  double final_time = 0.5;
  /// Acceptance bound for the Euler-Lagrange residuals r1..r4.
  double outer_tol = 1e-6;
  /// Sweeps continue past outer_tol until this target or stagnation.
  double sweep_tol = 1e-9;
  /// Stopping tolerance of the block solvers.
  double inner_tol = 1e-10;
  /// Absolute residual target of the V0 metric solves inside a step.
  double metric_tol = 1e-14;
  int max_outer = 200;
  int max_inner = 500;
  double armijo = 1e-4;
  double backtrack = 0.5;
};

/// Throws std::invalid_argument naming the offending field.
void validate_params(const StepperParams& p);

/// Data of the previous steps the incremental problem depends on.
struct History {
  ScalarField c_prev;
  VectorField u_prev;
  VectorField u_prev2;
  ScalarField z_prev;
};

struct Candidate {
  ScalarField c;
  VectorField u;
  ScalarField z;
};

/// Time-level data of step k.
struct StepData {
  int k = 1;
  double t = 0.0;
  /// b(k tau) on the whole domain; its Dirichlet trace is enforced.
  VectorField boundary;
  /// l(k tau).
  VectorField load;
  /// (b^k - b^{k-1}) / tau and the same quotient of the previous step
  /// (d/dt b(0) at k = 1).
  VectorField boundary_rate;
  VectorField boundary_rate_prev;
  /// Prescribed integral of c.
  double mass = 0.0;
};

struct FunctionalTerms {
  double damage_gradient = 0.0;
  double concentration_gradient = 0.0;
  double elastic = 0.0;
  double damage_potential = 0.0;
  double chemical = 0.0;
  double load = 0.0;
  double second_gradient = 0.0;
  double rate_z = 0.0;
  double inertia = 0.0;
  double rate_c_v0 = 0.0;
  double rate_c_l2 = 0.0;

  double total() const;
};

enum class BoundState { Free, Lower, Upper, Pinned };

struct ObjectiveGradient {
  ScalarField c;
  /// c gradient minus its multiple of the node weights, so that it vanishes on
  /// the constant (mass) direction.
  ScalarField c_projected;
  VectorField u;
  /// u gradient with Dirichlet entries zeroed.
  VectorField u_restricted;
  ScalarField z;
  /// Nodewise status of 0 <= z <= z_prev.
  std::vector<BoundState> z_bounds;
};

/// Per-quadrature-point view of the fields entering W.
struct QpFields {
  Eigen::VectorXd c;
  Eigen::VectorXd z;
  std::vector<SymTensor> strain;
};

/// The incremental functional of one time step together with the V0 metric
/// weighted by m(c_prev, z_prev). Immutable after construction.
class IncrementalProblem {
public:
  IncrementalProblem(const Grid& grid, const MaterialModel& material, const StepperParams& params, History history,
                     StepData data);

  const Grid& grid() const { return *grid_; }
  const MaterialModel& material() const { return *material_; }
  const StepperParams& params() const { return params_; }
  const History& history() const { return history_; }
  const StepData& data() const { return data_; }
  const WeightedPoissonProblem& metric() const { return *metric_; }
  double tau() const { return params_.tau; }
  double delta() const { return params_.delta; }

  /// Throws InfeasibleError if the mass, Dirichlet trace or damage box is violated.
  void check_feasible(const Candidate& x) const;
  QpFields qp_fields(const ScalarField& c, const VectorField& u, const ScalarField& z) const;

  FunctionalTerms terms(const Candidate& x) const;

  // Parts of the functional depending on one block, the others frozen in `qp`.
  double c_part(const ScalarField& c, const QpFields& qp) const;
  ScalarField c_part_gradient(const ScalarField& c, const QpFields& qp) const;
  double u_part(const VectorField& u, const QpFields& qp) const;
  VectorField u_part_gradient(const VectorField& u, const QpFields& qp) const;
  double z_part(const ScalarField& z, const QpFields& qp) const;
  ScalarField z_part_gradient(const ScalarField& z, const QpFields& qp) const;

  /// Hessian of c_part without the V0 term (which is handled in mixed form).
  SparseMatrix c_local_hessian(const ScalarField& c, const QpFields& qp) const;
  /// Hessian of u_part (constant in u).
  SparseMatrix u_hessian(const QpFields& qp) const;
  /// Hessian of z_part.
  SparseMatrix z_hessian(const ScalarField& z) const;

  std::vector<BoundState> z_bounds(const ScalarField& z) const;

private:
  const Grid* grid_;
  const MaterialModel* material_;
  StepperParams params_;
  History history_;
  StepData data_;
  std::shared_ptr<const WeightedPoissonProblem> metric_;
};

/// Value of the incremental functional. Throws InfeasibleError for infeasible candidates.
double objective(const IncrementalProblem& prob, const Candidate& x);
ObjectiveGradient objective_gradient(const IncrementalProblem& prob, const Candidate& x);

/// sqrt(g^T M^-1 g): the norm of a covector over L2-normalized test functions.
double dual_norm(const Grid& g, const Eigen::VectorXd& covector);

/// Largest violation of the one-sided condition on z, measured against
/// L2-normalized nodal directions that keep 0 <= z <= z_prev.
double damage_violation(const Grid& g, const ScalarField& gradient_z, const ScalarField& z, const ScalarField& z_prev);

}  // namespace chd

#endif  // CHD_FUNCTIONAL_HPP
