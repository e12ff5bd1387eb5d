#ifndef CHD_STEPPER_HPP
#define CHD_STEPPER_HPP

#include <functional>
#include <memory>
#include <stdexcept>
#include <vector>

#include "chd/diagnostics.hpp"
#include "chd/errors.hpp"
#include "chd/functional.hpp"
#include "chd/scenario.hpp"

namespace chd {

/// Accepted state at time index k together with the history the next step needs.
struct State {
  int k = 0;
  double t = 0.0;
  ScalarField c;
  VectorField u;
  ScalarField z;
  VectorField v;
  ScalarField c_prev;
  VectorField u_prev;
  VectorField u_prev2;
  ScalarField z_prev;
};

/// State at k = 0; u_prev is u0 - tau v0.
State initial_state(const Scenario& s, const StepperParams& params);

/// The incremental problem advancing `current` to index current.k + 1.
IncrementalProblem make_problem(const State& current, const Scenario& s, const StepperParams& params,
                                const MaterialModel& mm, const Grid& g);

struct BlockInfo {
  int iterations = 0;
  /// Final stationarity measure of the block.
  double measure = 0.0;
};

/// A line search could not decrease the block objective.
class LineSearchError : public SolverError {
public:
  LineSearchError(const std::string& what, double residual, Eigen::VectorXd last)
      : SolverError(what, residual), last_(std::move(last)) {}
  const Eigen::VectorXd& last_iterate() const { return last_; }

private:
  Eigen::VectorXd last_;
};

/// Exact minimizer of the u part with c, z frozen and u = b on the Dirichlet boundary.
VectorField minimize_u_block(const IncrementalProblem& prob, const ScalarField& c, const ScalarField& z,
                             const VectorField& u_start, BlockInfo* info = nullptr);
/// Mass-constrained minimization of the c part by Newton directions (gradient
/// fallback) with Armijo backtracking.
ScalarField minimize_c_block(const IncrementalProblem& prob, const ScalarField& c_start, const VectorField& u,
                             const ScalarField& z, BlockInfo* info = nullptr);
/// Minimization of the z part over 0 <= z <= z_prev by projected Newton
/// directions (projected gradient fallback) with backtracking along the projection arc.
ScalarField minimize_z_block(const IncrementalProblem& prob, const ScalarField& c, const VectorField& u,
                             const ScalarField& z_start, BlockInfo* info = nullptr);

/// mu = -A^-1((c - c_prev)/tau) + const, with the constant fixed by testing the
/// potential equation with 1.
ScalarField recover_mu(const IncrementalProblem& prob, const Candidate& x);

struct StepResult {
  State state;
  ScalarField mu;
  ScalarField xi;
  ResidualReport residuals;
  EnergyTerms energy;
  std::array<double, 4> errors{};
  double budget = 0.0;
  int sweeps = 0;
  /// Objective after the start point and after every block solve.
  std::vector<double> objective_trace;
};

class StepError : public SolverError {
public:
  StepError(const std::string& what, Candidate best, ResidualReport residuals)
      : SolverError(what, residuals.max_el()), best_(std::move(best)), residuals_(residuals) {}
  const Candidate& best() const { return best_; }
  const ResidualReport& residuals() const { return residuals_; }

private:
  Candidate best_;
  ResidualReport residuals_;
};

/// One time step by cyclic u -> c -> z block minimization until r1..r4 are
/// below the sweep target (or stagnate below outer_tol).
StepResult step(const State& current, const Scenario& s, const StepperParams& params, const MaterialModel& mm,
                const Grid& g);

/// Accepted states, potentials and certificates for k = 0..M.
class Trajectory {
public:
  double tau = 0.0;
  std::vector<State> states;
  std::vector<ScalarField> mu;
  std::vector<ScalarField> xi;
  std::vector<ResidualReport> residuals;
  std::vector<int> sweeps;

  int steps() const { return static_cast<int>(states.size()) - 1; }
  /// Index k with t in ((k-1) tau, k tau]; 0 for t <= 0.
  int index_at(double t) const;
  /// Piecewise constant interpolants w_tau(t) = w^k and w_tau^-(t) = w^{k-1}.
  Candidate piecewise_constant(double t) const;
  Candidate piecewise_constant_prev(double t) const;
  /// Piecewise linear interpolant through (k tau, w^k).
  Candidate piecewise_linear(double t) const;
};

struct SimulationResult {
  Trajectory trajectory;
  EnergyLedger ledger{0.0, 0.0};
};

class SimulationError : public std::runtime_error {
public:
  SimulationError(const std::string& what, std::shared_ptr<const SimulationResult> partial, int step)
      : std::runtime_error(what), partial_(std::move(partial)), step_(step) {}
  /// Everything accepted before the failing step.
  const SimulationResult& partial() const { return *partial_; }
  int failed_step() const { return step_; }

private:
  std::shared_ptr<const SimulationResult> partial_;
  int step_;
};

using StepObserver = std::function<void(const StepResult&)>;

/// Advances floor(T/tau) steps (at least one). Requires delta > 0.
SimulationResult run_simulation(const Scenario& s, const StepperParams& params, const MaterialModel& mm,
                                const Grid& g, const StepObserver& observer = {});

/// Number of steps run_simulation takes.
int step_count(const StepperParams& params);

}  // namespace chd

#endif  // CHD_STEPPER_HPP
