#ifndef CHD_HMINUS_HPP
#define CHD_HMINUS_HPP

#include "chd/grid.hpp"

namespace chd {

/// Weighted Neumann problem  <m grad phi, grad zeta> = <rhs, zeta>  on zero-mean
/// fields. Defines the mobility-weighted H^-1 metric
///   <v, w>_V0 = <m grad A^-1 v, grad A^-1 w>.
/// Immutable after construction; safe for concurrent read-only use.
class WeightedPoissonProblem {
public:
  /// `weight` is nodal and must be strictly positive; `tolerance` is the absolute
  /// Euclidean residual target of the PCG iteration. max_iterations <= 0 picks 20 N.
  WeightedPoissonProblem(const Grid& grid, ScalarField weight, double tolerance = 1e-10, int max_iterations = 0);

  const Grid& grid() const { return *grid_; }
  const ScalarField& weight() const { return weight_; }
  /// Assembled weighted stiffness matrix (singular, kernel = constants).
  const SparseMatrix& matrix() const { return stiffness_; }
  const Eigen::VectorXd& inverse_diagonal() const { return inv_diag_; }
  double tolerance() const { return tolerance_; }
  int max_iterations() const { return max_iterations_; }

private:
  const Grid* grid_;
  ScalarField weight_;
  SparseMatrix stiffness_;
  Eigen::VectorXd inv_diag_;
  double tolerance_;
  int max_iterations_;
};

struct NeumannSolveInfo {
  int iterations = 0;
  double residual = 0.0;
};

/// Returns the zero-mean phi with <m grad phi, grad zeta> = <rhs, zeta> for every
/// nodal zeta, by Jacobi-preconditioned CG with mean projection.
/// Throws NotInV0Error if integrate(rhs) != 0, SolverError if the budget runs out.
ScalarField solve_weighted_neumann(const WeightedPoissonProblem& prob, const ScalarField& rhs,
                                   NeumannSolveInfo* info = nullptr);

double v0_inner(const WeightedPoissonProblem& prob, const ScalarField& v, const ScalarField& w);

/// Evaluated as 2<phi,v> - <m grad phi, grad phi>, whose error is quadratic in
/// the solver error.
double v0_norm_sq(const WeightedPoissonProblem& prob, const ScalarField& v);

}  // namespace chd

#endif  // CHD_HMINUS_HPP
