#include "chd/stepper.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

namespace chd {

namespace {

using Triplet = Eigen::Triplet<double>;
constexpr double kEps = std::numeric_limits<double>::epsilon();

double roundoff(double f) { return 16.0 * kEps * (1.0 + std::abs(f)); }

/// Rows and columns of `a` restricted to `keep` (a list of indices).
SparseMatrix restrict(const SparseMatrix& a, const std::vector<int>& keep) {
  std::vector<int> pos(static_cast<std::size_t>(a.rows()), -1);
  for (std::size_t i = 0; i < keep.size(); ++i) pos[static_cast<std::size_t>(keep[i])] = static_cast<int>(i);
  std::vector<Triplet> t;
  for (int col = 0; col < a.outerSize(); ++col)
    for (SparseMatrix::InnerIterator it(a, col); it; ++it) {
      const int r = pos[static_cast<std::size_t>(it.row())];
      const int c = pos[static_cast<std::size_t>(it.col())];
      if (r >= 0 && c >= 0) t.emplace_back(r, c, it.value());
    }
  const auto m = static_cast<Eigen::Index>(keep.size());
  SparseMatrix out(m, m);
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

ScalarField project_mean(const Grid& g, ScalarField d) {
  d.array() -= g.node_weights().dot(d) / g.volume();
  return d;
}

ScalarField clamp_box(const ScalarField& z, const ScalarField& upper) {
  return z.cwiseMax(0.0).cwiseMin(upper);
}

}  // namespace

State initial_state(const Scenario& s, const StepperParams& params) {
  State st;
  st.c = s.initial.c;
  st.u = s.initial.u;
  st.z = s.initial.z;
  st.v = s.initial.v;
  st.c_prev = st.c;
  st.u_prev = st.u - params.tau * st.v;
  st.u_prev2 = st.u_prev;
  st.z_prev = st.z;
  return st;
}

IncrementalProblem make_problem(const State& current, const Scenario& s, const StepperParams& params,
                                const MaterialModel& mm, const Grid& g) {
  const int k = current.k + 1;
  const double t = k * params.tau;
  const double t_prev = current.k * params.tau;
  History h{current.c, current.u, current.u_prev, current.z};
  StepData d;
  d.k = k;
  d.t = t;
  d.boundary = s.boundary(t);
  d.load = s.load(t);
  d.boundary_rate = (d.boundary - s.boundary(t_prev)) / params.tau;
  d.boundary_rate_prev =
      current.k == 0 ? s.boundary_rate(0.0) : VectorField((s.boundary(t_prev) - s.boundary(t_prev - params.tau)) / params.tau);
  d.mass = integrate(g, s.initial.c);
  return IncrementalProblem(g, mm, params, std::move(h), std::move(d));
}

VectorField minimize_u_block(const IncrementalProblem& prob, const ScalarField& c, const ScalarField& z,
                             const VectorField& u_start, BlockInfo* info) {
  const Grid& g = prob.grid();
  const int n = g.num_nodes();
  const QpFields qp = prob.qp_fields(c, u_start, z);
  const VectorField lift = apply_dirichlet(g, u_start, prob.data().boundary);
  const VectorField grad = prob.u_part_gradient(lift, qp);

  std::vector<int> free;
  for (int k = 0; k < g.dimension(); ++k)
    for (int i = 0; i < n; ++i)
      if (!g.is_dirichlet(i)) free.push_back(k * n + i);
  const SparseMatrix h = restrict(prob.u_hessian(qp), free);
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(free.size()));
  for (std::size_t i = 0; i < free.size(); ++i) rhs[static_cast<Eigen::Index>(i)] = -grad[free[i]];

  const double target = prob.params().inner_tol * std::sqrt(g.node_weights().minCoeff()) * 0.5;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(rhs.size());
  int iterations = 0;
  if (rhs.norm() > target) {
    Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper> cg;
    cg.setMaxIterations(std::max(10 * static_cast<int>(rhs.size()), 100));
    cg.setTolerance(target / rhs.norm());
    cg.compute(h);
    x = cg.solve(rhs);
    iterations = static_cast<int>(cg.iterations());
    if (cg.info() != Eigen::Success || (h * x - rhs).norm() > target) {
      Eigen::SimplicialLDLT<SparseMatrix> direct(h);
      if (direct.info() != Eigen::Success) throw SolverError("u-block: factorization failed", rhs.norm());
      x = direct.solve(rhs);
      const double res = (h * x - rhs).norm();
      if (!(res <= 10.0 * target)) throw SolverError("u-block: linear solve did not reach the tolerance", res);
    }
  }
  VectorField u = lift;
  for (std::size_t i = 0; i < free.size(); ++i) u[free[i]] += x[static_cast<Eigen::Index>(i)];
  if (info) {
    info->iterations = iterations;
    VectorField r = prob.u_part_gradient(u, qp);
    for (int k = 0; k < g.dimension(); ++k)
      for (int node : g.dirichlet_nodes()) r[k * n + node] = 0.0;
    info->measure = dual_norm(g, r);
  }
  return u;
}

ScalarField minimize_c_block(const IncrementalProblem& prob, const ScalarField& c_start, const VectorField& u,
                             const ScalarField& z, BlockInfo* info) {
  const Grid& g = prob.grid();
  const StepperParams& par = prob.params();
  const auto& w = g.node_weights();
  const int n = g.num_nodes();
  const QpFields qp = prob.qp_fields(c_start, u, z);
  const SparseMatrix& km = prob.metric().matrix();

  ScalarField c = c_start;
  double f = prob.c_part(c, qp);
  double measure = 0.0;
  int it = 0;
  for (;; ++it) {
    const ScalarField grad = prob.c_part_gradient(c, qp);
    const ScalarField pg = grad - (grad.sum() / g.volume()) * w;
    measure = dual_norm(g, pg);
    if (measure <= par.inner_tol || it >= par.max_inner) break;

    // Newton direction from the mixed system
    //   [H  M; M/tau  -K] [d; y] = [-grad; 0],
    // where y carries the V0 term and its constant the mass multiplier.
    const SparseMatrix hc = prob.c_local_hessian(c, qp);
    std::vector<Triplet> t;
    t.reserve(static_cast<std::size_t>(hc.nonZeros() + km.nonZeros() + 2 * n));
    for (int col = 0; col < hc.outerSize(); ++col)
      for (SparseMatrix::InnerIterator e(hc, col); e; ++e)
        t.emplace_back(static_cast<int>(e.row()), static_cast<int>(e.col()), e.value());
    for (int col = 0; col < km.outerSize(); ++col)
      for (SparseMatrix::InnerIterator e(km, col); e; ++e)
        t.emplace_back(n + static_cast<int>(e.row()), n + static_cast<int>(e.col()), -e.value());
    for (int i = 0; i < n; ++i) {
      t.emplace_back(i, n + i, w[i]);
      t.emplace_back(n + i, i, w[i] / prob.tau());
    }
    SparseMatrix sys(2 * n, 2 * n);
    sys.setFromTriplets(t.begin(), t.end());
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(2 * n);
    rhs.head(n) = -grad;

    ScalarField dir;
    Eigen::SparseLU<SparseMatrix> lu;
    lu.compute(sys);
    if (lu.info() == Eigen::Success) {
      const Eigen::VectorXd sol = lu.solve(rhs);
      if (lu.info() == Eigen::Success && sol.allFinite()) dir = project_mean(g, sol.head(n));
    }
    double slope = dir.size() ? grad.dot(dir) : 0.0;
    if (!(slope < 0.0)) {
      dir = -pg.cwiseQuotient(w);
      slope = grad.dot(dir);
    }

    double s = 1.0;
    bool accepted = false;
    ScalarField trial;
    double f_trial = 0.0;
    for (int ls = 0; ls < 80; ++ls, s *= par.backtrack) {
      trial = c + s * dir;
      f_trial = prob.c_part(trial, qp);
      if (f_trial <= f + par.armijo * s * slope + roundoff(f)) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      if (info) *info = {it, measure};
      throw LineSearchError("c-block: line search failed", measure, c);
    }
    c = trial;
    f = f_trial;
  }
  if (info) *info = {it, measure};
  return c;
}

ScalarField minimize_z_block(const IncrementalProblem& prob, const ScalarField& c, const VectorField& u,
                             const ScalarField& z_start, BlockInfo* info) {
  const Grid& g = prob.grid();
  const StepperParams& par = prob.params();
  const auto& w = g.node_weights();
  const ScalarField& upper = prob.history().z_prev;
  const int n = g.num_nodes();
  const QpFields qp = prob.qp_fields(c, u, z_start);

  ScalarField z = clamp_box(z_start, upper);
  double f = prob.z_part(z, qp);
  double measure = 0.0;
  int it = 0;
  for (;; ++it) {
    const ScalarField grad = prob.z_part_gradient(z, qp);
    measure = damage_violation(g, grad, z, upper);
    if (measure <= par.inner_tol || it >= par.max_inner) break;

    const SparseMatrix h = prob.z_hessian(z);
    const Eigen::VectorXd diag = h.diagonal();
    const ScalarField proj_step = z - clamp_box(z - grad.cwiseQuotient(diag), upper);
    const double eps = std::min(1e-3, proj_step.cwiseAbs().maxCoeff());
    std::vector<int> free;
    ScalarField dir = ScalarField::Zero(n);
    for (int i = 0; i < n; ++i) {
      const bool binding = upper[i] <= 0.0 || (z[i] <= eps && grad[i] > 0.0) || (z[i] >= upper[i] - eps && grad[i] < 0.0);
      if (binding)
        dir[i] = -grad[i] / diag[i];
      else
        free.push_back(i);
    }
    if (!free.empty()) {
      Eigen::VectorXd rhs(static_cast<Eigen::Index>(free.size()));
      for (std::size_t i = 0; i < free.size(); ++i) rhs[static_cast<Eigen::Index>(i)] = -grad[free[i]];
      Eigen::SimplicialLDLT<SparseMatrix> ldlt(restrict(h, free));
      Eigen::VectorXd d = ldlt.info() == Eigen::Success ? Eigen::VectorXd(ldlt.solve(rhs)) : Eigen::VectorXd();
      if (d.size() == 0 || !d.allFinite()) d = rhs.cwiseQuotient(Eigen::VectorXd(Eigen::VectorXd::NullaryExpr(
                                                  rhs.size(), [&](Eigen::Index i) { return diag[free[static_cast<std::size_t>(i)]]; })));
      for (std::size_t i = 0; i < free.size(); ++i) dir[free[i]] = d[static_cast<Eigen::Index>(i)];
    }

    auto search = [&](const ScalarField& d, double s0, ScalarField& out, double& f_out) {
      double s = s0;
      for (int ls = 0; ls < 80; ++ls, s *= par.backtrack) {
        ScalarField trial = clamp_box(z + s * d, upper);
        const double pred = grad.dot(trial - z);
        if (!(pred < 0.0)) continue;
        const double ft = prob.z_part(trial, qp);
        if (ft <= f + par.armijo * pred + roundoff(f)) {
          out = std::move(trial);
          f_out = ft;
          return true;
        }
      }
      return false;
    };
    ScalarField next;
    double f_next = 0.0;
    if (!search(dir, 1.0, next, f_next) && !search(-grad.cwiseQuotient(w), prob.tau(), next, f_next)) {
      if (info) *info = {it, measure};
      throw LineSearchError("z-block: line search failed", measure, z);
    }
    z = std::move(next);
    f = f_next;
  }
  if (info) *info = {it, measure};
  return z;
}

ScalarField recover_mu(const IncrementalProblem& prob, const Candidate& x) {
  const Grid& g = prob.grid();
  const MaterialModel& mm = prob.material();
  const auto& w = g.node_weights();
  const ScalarField rate = (x.c - prob.history().c_prev) / prob.tau();
  const ScalarField phi = solve_weighted_neumann(prob.metric(), rate);
  const QpFields qp = prob.qp_fields(x.c, x.u, x.z);
  double total = 0.0;
  for (int q = 0; q < g.num_quadrature_points(); ++q)
    total += g.quadrature()[static_cast<std::size_t>(q)].weight *
             elastic_dc(mm, qp.c[q], qp.strain[static_cast<std::size_t>(q)], qp.z[q]);
  for (int i = 0; i < g.num_nodes(); ++i) total += w[i] * (psi_prime(mm, x.c[i]) + prob.delta() * rate[i]);
  return (-phi).array() + total / g.volume();
}

StepResult step(const State& current, const Scenario& s, const StepperParams& params, const MaterialModel& mm,
                const Grid& g) {
  const IncrementalProblem prob = make_problem(current, s, params, mm, g);
  const History& h = prob.history();
  const StepData& d = prob.data();

  Candidate x;
  x.c = h.c_prev;
  x.u = apply_dirichlet(g, h.u_prev + (d.boundary - s.boundary(current.t)), d.boundary);
  x.z = h.z_prev;

  StepResult out;
  out.objective_trace.push_back(objective(prob, x));

  ResidualReport res;
  ScalarField mu;
  Candidate best = x;
  double best_r = std::numeric_limits<double>::infinity();
  double milestone = std::numeric_limits<double>::infinity();
  int last_progress = 0;
  int sweep = 0;
  for (sweep = 1; sweep <= params.max_outer; ++sweep) {
    x.u = minimize_u_block(prob, x.c, x.z, x.u);
    out.objective_trace.push_back(prob.terms(x).total());
    try {
      x.c = minimize_c_block(prob, x.c, x.u, x.z);
    } catch (const LineSearchError& e) {
      if (!(e.residual() <= params.outer_tol)) throw;
      x.c = e.last_iterate();
    }
    out.objective_trace.push_back(prob.terms(x).total());
    try {
      x.z = minimize_z_block(prob, x.c, x.u, x.z);
    } catch (const LineSearchError& e) {
      if (!(e.residual() <= params.outer_tol)) throw;
      x.z = e.last_iterate();
    }
    out.objective_trace.push_back(prob.terms(x).total());

    mu = recover_mu(prob, x);
    res = el_residuals(prob, x, mu);
    const double r = res.max_el();
    if (r < best_r) {
      best_r = r;
      best = x;
    }
    if (r < 0.5 * milestone) {
      milestone = r;
      last_progress = sweep;
    }
    if (r <= params.sweep_tol) break;
    if (r <= params.outer_tol && sweep - last_progress >= 3) break;
  }
  if (!(res.max_el() <= params.outer_tol)) {
    std::ostringstream os;
    os << "step " << d.k << ": residuals did not reach " << params.outer_tol << " (r1=" << res.r1 << ", r2=" << res.r2
       << ", r3=" << res.r3 << ", r4=" << res.r4 << ")";
    throw StepError(os.str(), best, res);
  }

  out.sweeps = std::min(sweep, params.max_outer);
  out.mu = mu;
  out.residuals = res;
  out.xi = subgradient_xi(g, mm, x.c, x.u, x.z);
  out.energy = energy_terms(prob, x, mu);
  out.errors = error_terms(prob, x);
  out.budget = residual_budget(prob, x, mu, res);

  State& st = out.state;
  st.k = d.k;
  st.t = d.t;
  st.c = x.c;
  st.u = x.u;
  st.z = x.z;
  st.v = (x.u - h.u_prev) / params.tau;
  st.c_prev = h.c_prev;
  st.u_prev = h.u_prev;
  st.u_prev2 = h.u_prev2;
  st.z_prev = h.z_prev;
  return out;
}

int Trajectory::index_at(double t) const {
  if (t <= 0.0) return 0;
  const int k = static_cast<int>(std::ceil(t / tau - 1e-9));
  return std::min(k, steps());
}

Candidate Trajectory::piecewise_constant(double t) const {
  const State& s = states[static_cast<std::size_t>(index_at(t))];
  return {s.c, s.u, s.z};
}

Candidate Trajectory::piecewise_constant_prev(double t) const {
  const State& s = states[static_cast<std::size_t>(std::max(index_at(t) - 1, 0))];
  return {s.c, s.u, s.z};
}

Candidate Trajectory::piecewise_linear(double t) const {
  const int k = index_at(t);
  if (k == 0) return piecewise_constant(0.0);
  const State& a = states[static_cast<std::size_t>(k - 1)];
  const State& b = states[static_cast<std::size_t>(k)];
  const double theta = std::clamp((t - a.t) / tau, 0.0, 1.0);
  if (theta == 1.0) return {b.c, b.u, b.z};
  return {a.c + theta * (b.c - a.c), a.u + theta * (b.u - a.u), a.z + theta * (b.z - a.z)};
}

int step_count(const StepperParams& params) {
  return std::max(1, static_cast<int>(std::floor(params.final_time / params.tau + 1e-9)));
}

SimulationResult run_simulation(const Scenario& s, const StepperParams& params, const MaterialModel& mm,
                                const Grid& g, const StepObserver& observer) {
  validate_params(params);
  if (!(params.delta > 0.0))
    throw std::invalid_argument(
        "run_simulation: delta must be positive; the unregularized limit is approached with a delta sweep");
  validate_scenario(s, g);

  auto result = std::make_shared<SimulationResult>();
  Trajectory& tr = result->trajectory;
  tr.tau = params.tau;
  State st = initial_state(s, params);
  tr.states.push_back(st);
  tr.mu.push_back(ScalarField::Zero(g.num_nodes()));
  tr.xi.push_back(subgradient_xi(g, mm, st.c, st.u, st.z));
  tr.residuals.push_back(ResidualReport{});
  tr.sweeps.push_back(0);
  result->ledger = EnergyLedger(free_energy(g, mm, params.delta, st.c, st.u, st.z), kinetic_energy(g, st.v));

  const int steps = step_count(params);
  for (int k = 1; k <= steps; ++k) {
    StepResult r;
    try {
      r = step(st, s, params, mm, g);
    } catch (const std::exception& e) {
      throw SimulationError(std::string("run_simulation: ") + e.what(), result, k);
    }
    result->ledger.record(r.state.k, r.state.t, params.tau, r.energy, r.errors, r.residuals, r.budget);
    st = r.state;
    tr.states.push_back(st);
    tr.mu.push_back(r.mu);
    tr.xi.push_back(r.xi);
    tr.residuals.push_back(r.residuals);
    tr.sweeps.push_back(r.sweeps);
    if (observer) observer(r);
  }
  return std::move(*result);
}

}  // namespace chd
