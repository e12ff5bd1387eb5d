#include "chd/hminus.hpp"

#include <cmath>
#include <sstream>

#include "chd/errors.hpp"

namespace chd {

WeightedPoissonProblem::WeightedPoissonProblem(const Grid& grid, ScalarField weight, double tolerance,
                                               int max_iterations)
    : grid_(&grid), weight_(std::move(weight)), tolerance_(tolerance), max_iterations_(max_iterations) {
  if (weight_.size() != grid.num_nodes()) throw std::invalid_argument("hminus: weight size mismatch");
  if (!(weight_.minCoeff() > 0.0)) throw std::invalid_argument("hminus: weight must be strictly positive");
  if (!(tolerance_ > 0.0)) throw std::invalid_argument("hminus: tolerance must be positive");
  if (max_iterations_ <= 0) max_iterations_ = 20 * grid.num_nodes() + 100;
  stiffness_ = grid.stiffness_matrix(grid.qp_values(weight_));
  inv_diag_ = stiffness_.diagonal().cwiseInverse();
}

namespace {

void remove_sum(Eigen::VectorXd& r) { r.array() -= r.mean(); }

void remove_weighted_mean(const Grid& g, Eigen::VectorXd& x) { x.array() -= integrate(g, x) / g.volume(); }

}  // namespace

ScalarField solve_weighted_neumann(const WeightedPoissonProblem& prob, const ScalarField& rhs,
                                   NeumannSolveInfo* info) {
  const Grid& g = prob.grid();
  if (rhs.size() != g.num_nodes()) throw std::invalid_argument("hminus: rhs size mismatch");
  const double mean = integrate(g, rhs);
  const double scale = g.node_weights().dot(rhs.cwiseAbs());
  if (std::abs(mean) > 1e-10 * (1.0 + scale)) {
    std::ostringstream os;
    os << "hminus: right-hand side is not in V0 (integral " << mean << ")";
    throw NotInV0Error(os.str());
  }

  const SparseMatrix& k = prob.matrix();
  Eigen::VectorXd b = g.node_weights().cwiseProduct(rhs);
  remove_sum(b);

  Eigen::VectorXd x = Eigen::VectorXd::Zero(g.num_nodes());
  Eigen::VectorXd r = b;
  double rnorm = r.norm();
  int it = 0;
  if (rnorm > prob.tolerance()) {
    Eigen::VectorXd z = prob.inverse_diagonal().cwiseProduct(r);
    remove_sum(z);
    Eigen::VectorXd p = z;
    double rz = r.dot(z);
    for (it = 1; it <= prob.max_iterations(); ++it) {
      const Eigen::VectorXd kp = k * p;
      const double alpha = rz / p.dot(kp);
      x += alpha * p;
      r -= alpha * kp;
      remove_sum(r);
      rnorm = r.norm();
      if (rnorm <= prob.tolerance()) break;
      z = prob.inverse_diagonal().cwiseProduct(r);
      remove_sum(z);
      const double rz_new = r.dot(z);
      p = z + (rz_new / rz) * p;
      rz = rz_new;
    }
    if (rnorm > prob.tolerance()) {
      std::ostringstream os;
      os << "hminus: PCG budget of " << prob.max_iterations() << " iterations exceeded, residual " << rnorm;
      throw SolverError(os.str(), rnorm);
    }
  }
  remove_weighted_mean(g, x);
  if (info) {
    info->iterations = it;
    info->residual = (b - k * x).norm();
  }
  return x;
}

double v0_inner(const WeightedPoissonProblem& prob, const ScalarField& v, const ScalarField& w) {
  const ScalarField phi = solve_weighted_neumann(prob, v);
  return integrate(prob.grid(), phi.cwiseProduct(w));
}

double v0_norm_sq(const WeightedPoissonProblem& prob, const ScalarField& v) {
  const ScalarField phi = solve_weighted_neumann(prob, v);
  return 2.0 * integrate(prob.grid(), phi.cwiseProduct(v)) - phi.dot(prob.matrix() * phi);
}

}  // namespace chd
