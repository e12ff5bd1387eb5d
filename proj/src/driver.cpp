#include "chd/driver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <ostream>
#include <sstream>

namespace chd {

namespace {

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string short_num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

double grad_norm_sq(const Grid& g, const ScalarField& f) {
  const Eigen::MatrixXd gr = g.qp_gradient(f);
  double s = 0.0;
  for (int q = 0; q < g.num_quadrature_points(); ++q)
    s += g.quadrature()[static_cast<std::size_t>(q)].weight * gr.row(q).squaredNorm();
  return s;
}

double grad_norm_p(const Grid& g, const ScalarField& f, double p) {
  const Eigen::MatrixXd gr = g.qp_gradient(f);
  double s = 0.0;
  for (int q = 0; q < g.num_quadrature_points(); ++q) {
    const double r = gr.row(q).norm();
    if (r > 0.0) s += g.quadrature()[static_cast<std::size_t>(q)].weight * std::pow(r, p);
  }
  return std::pow(s, 1.0 / p);
}

/// Adds `msg` unless `count` messages of this kind were already reported.
void note(std::vector<std::string>& out, int& count, const std::string& msg) {
  if (count++ < 3) out.push_back(msg);
}

}  // namespace

Monitors compute_monitors(const SimulationResult& r, const Grid& g, const MaterialModel& mm,
                          const StepperParams& params) {
  Monitors m;
  const auto& states = r.trajectory.states;
  double rate_sq = 0.0;
  for (std::size_t k = 0; k < states.size(); ++k) {
    const State& s = states[k];
    m.grad_c = std::max(m.grad_c, std::sqrt(grad_norm_sq(g, s.c)));
    m.velocity = std::max(m.velocity, std::sqrt(2.0 * kinetic_energy(g, s.v)));
    m.grad_z = std::max(m.grad_z, grad_norm_p(g, s.z, mm.p()));
    const double a = second_gradient_form(g, s.u, s.u);
    m.delta_h2 = std::max(m.delta_h2, params.delta * a);
    m.sqrt_delta_h2 = std::max(m.sqrt_delta_h2, std::sqrt(params.delta * std::max(a, 0.0)));
    if (k > 0) {
      const ScalarField rate = (s.c - states[k - 1].c) / params.tau;
      rate_sq += params.tau * params.delta * g.node_weights().dot(rate.cwiseAbs2());
    }
  }
  m.sqrt_delta_rate = std::sqrt(rate_sq);
  const auto& rows = r.ledger.rows();
  m.dissipation = rows.back().D;
  m.error_integral = rows.back().e_abs_integral;
  m.worst_slack = rows.front().slack;
  for (const auto& row : rows) {
    m.e4_max = std::max(m.e4_max, std::abs(row.e_step[3]));
    m.worst_slack = std::min(m.worst_slack, row.slack);
    m.max_residual = std::max(m.max_residual, row.residuals.max_el());
  }
  return m;
}

std::vector<std::string> certify(const SimulationResult& r, const Scenario& s, const Grid& g, const MaterialModel&,
                                 const StepperParams& params) {
  std::vector<std::string> out;
  const auto& rows = r.ledger.rows();
  const double tol = r.ledger.tolerance();
  int n_res = 0, n_mass = 0, n_irr = 0, n_bounds = 0, n_slack = 0, n_e4 = 0, n_mono = 0, n_d = 0, n_xi = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const LedgerRow& row = rows[i];
    const std::string at = "step " + std::to_string(row.k) + ": ";
    const ResidualReport& res = row.residuals;
    if (!res.finite() || !(res.max_el() <= params.outer_tol))
      note(out, n_res, at + "Euler-Lagrange residual " + short_num(res.max_el()) + " exceeds " + short_num(params.outer_tol));
    if (!(res.mass_deviation <= 1e-12)) note(out, n_mass, at + "mass deviation " + short_num(res.mass_deviation));
    if (res.irreversibility != 0.0) note(out, n_irr, at + "irreversibility violation " + short_num(res.irreversibility));
    if (res.bounds != 0.0) note(out, n_bounds, at + "damage outside [0,1] by " + short_num(res.bounds));
    if (!(row.slack >= -tol))
      note(out, n_slack, at + "energy inequality slack " + short_num(row.slack) + " below -" + short_num(tol));
    if (row.e_step[3] != 0.0) note(out, n_e4, at + "e4 = " + short_num(row.e_step[3]) + " is not zero");
    const LedgerRow& prev = rows[i - 1];
    if (row.D < prev.D) note(out, n_d, at + "dissipation decreased");
    if (s.quiescent) {
      const double now = row.E + row.K + row.D;
      const double before = prev.E + prev.K + prev.D;
      if (!(now <= before + tol))
        note(out, n_mono, at + "E+K+D increased by " + short_num(now - before) + " with quiescent data");
    }
  }
  const auto& tr = r.trajectory;
  for (std::size_t k = 0; k < tr.xi.size(); ++k) {
    const ScalarField& xi = tr.xi[k];
    const ScalarField& z = tr.states[k].z;
    for (Eigen::Index i = 0; i < xi.size(); ++i)
      if (xi[i] > 0.0 || (xi[i] != 0.0 && z[i] > 1e-10)) {
        note(out, n_xi, "step " + std::to_string(k) + ": subgradient sign or support violated at node " + std::to_string(i));
        break;
      }
  }
  (void)g;
  return out;
}

void write_ledger_csv(std::ostream& os, const EnergyLedger& ledger) {
  os << "k,t,E,K,D,W_ext,e1,e2,e3,e4,slack,r1,r2,r3,r4,mass_dev,irrev_viol\n";
  for (const auto& r : ledger.rows()) {
    os << r.k << ',' << num(r.t) << ',' << num(r.E) << ',' << num(r.K) << ',' << num(r.D) << ',' << num(r.W_ext);
    for (double e : r.e_integral) os << ',' << num(e);
    os << ',' << num(r.slack) << ',' << num(r.residuals.r1) << ',' << num(r.residuals.r2) << ','
       << num(r.residuals.r3) << ',' << num(r.residuals.r4) << ',' << num(r.residuals.mass_deviation) << ','
       << num(r.residuals.irreversibility) << '\n';
  }
}

void write_trajectory_csv(std::ostream& os, const Trajectory& tr, const Grid& g, int stride) {
  const int n = g.num_nodes();
  const int dim = g.dimension();
  os << "k,t,node,x,y,c";
  for (int d = 0; d < dim; ++d) os << (d == 0 ? ",u_x" : ",u_y");
  os << ",z,mu,xi\n";
  const int last = tr.steps();
  for (int k = 0; k <= last; ++k) {
    if (k % stride != 0 && k != last) continue;
    const State& s = tr.states[static_cast<std::size_t>(k)];
    for (int i = 0; i < n; ++i) {
      const auto x = g.coordinate(i);
      os << k << ',' << num(s.t) << ',' << i << ',' << num(x[0]) << ',' << num(dim == 2 ? x[1] : 0.0) << ','
         << num(s.c[i]);
      for (int d = 0; d < dim; ++d) os << ',' << num(s.u[d * n + i]);
      os << ',' << num(s.z[i]) << ',' << num(tr.mu[static_cast<std::size_t>(k)][i]) << ','
         << num(tr.xi[static_cast<std::size_t>(k)][i]) << '\n';
    }
  }
}

RunReport execute(const RunConfig& config, bool write_outputs, std::ostream* log) {
  RunReport rep;
  const Grid grid = build_grid(config.grid);
  const MaterialModel mm(config.grid.dimension, config.material);
  const AssumptionReport assumptions = validate_assumptions(mm, config.seed);
  if (!assumptions.all_passed()) {
    rep.failures.push_back("material assumptions violated: " + assumptions.describe());
    if (log) *log << rep.failures.back() << '\n';
    return rep;
  }
  const Scenario scenario = make_scenario(config.scenario, grid);

  StepObserver observer;
  if (log)
    observer = [log](const StepResult& r) {
      *log << "step " << r.state.k << " t=" << short_num(r.state.t) << " sweeps=" << r.sweeps
           << " max_r=" << short_num(r.residuals.max_el()) << '\n';
    };
  try {
    rep.result = run_simulation(scenario, config.stepper, mm, grid, observer);
    rep.completed = true;
  } catch (const SimulationError& e) {
    rep.result = e.partial();
    rep.failures.push_back(e.what());
  }
  const SimulationResult& res = *rep.result;
  auto more = certify(res, scenario, grid, mm, config.stepper);
  rep.failures.insert(rep.failures.end(), more.begin(), more.end());
  rep.monitors = compute_monitors(res, grid, mm, config.stepper);
  for (const State& s : res.trajectory.states)
    if ((s.z.array() < scenario.initial.z.array()).any()) {
      rep.damage_onset = s.t;
      break;
    }
  rep.certified = rep.completed && rep.failures.empty();

  if (write_outputs) {
    namespace fs = std::filesystem;
    fs::create_directories(config.output_dir);
    const fs::path dir(config.output_dir);
    {
      std::ofstream os(dir / "ledger.csv");
      write_ledger_csv(os, res.ledger);
    }
    {
      std::ofstream os(dir / "trajectory.csv");
      write_trajectory_csv(os, res.trajectory, grid, config.snapshot_stride);
    }
    std::ofstream os(dir / "summary.txt");
    const LedgerRow& last = res.ledger.rows().back();
    const Monitors& m = rep.monitors;
    os << "scenario " << config.scenario.name << '\n'
       << "steps " << res.trajectory.steps() << '\n'
       << "final_time " << num(last.t) << '\n'
       << "E " << num(last.E) << '\n'
       << "K " << num(last.K) << '\n'
       << "D " << num(last.D) << '\n'
       << "W_ext " << num(last.W_ext) << '\n'
       << "max_residual " << num(m.max_residual) << '\n'
       << "worst_slack " << num(m.worst_slack) << '\n'
       << "slack_tolerance " << num(res.ledger.tolerance()) << '\n'
       << "residual_budget " << num(last.budget) << '\n'
       << "error_integral " << num(m.error_integral) << '\n'
       << "damage_onset " << num(rep.damage_onset) << '\n'
       << "certified " << (rep.certified ? "yes" : "no") << '\n';
    for (const auto& f : rep.failures) os << "failure " << f << '\n';
  }
  return rep;
}

int run(const RunConfig& config, std::ostream& log) {
  const RunReport rep = execute(config, true, &log);
  for (const auto& f : rep.failures) log << "FAIL " << f << '\n';
  log << (rep.certified ? "certified" : "not certified") << '\n';
  return rep.certified ? 0 : 1;
}

std::string SweepReport::table() const {
  std::ostringstream os;
  os << "level,tau,delta,grad_c,velocity,grad_z,dissipation,sqrt_delta_h2,delta_h2,sqrt_delta_rate,"
        "error_integral,worst_slack,certified\n";
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const auto& l = levels[i];
    const Monitors& m = l.monitors;
    os << i << ',' << num(l.tau) << ',' << num(l.delta) << ',' << num(m.grad_c) << ',' << num(m.velocity) << ','
       << num(m.grad_z) << ',' << num(m.dissipation) << ',' << num(m.sqrt_delta_h2) << ',' << num(m.delta_h2) << ','
       << num(m.sqrt_delta_rate) << ',' << num(m.error_integral) << ',' << num(m.worst_slack) << ','
       << (l.certified ? 1 : 0) << '\n';
  }
  return os.str();
}

SweepReport sweep(const RunConfig& config, SweepAxis axis, int levels, double factor, bool write_outputs) {
  if (levels < 3) throw std::invalid_argument("sweep: at least 3 levels are required");
  if (!(factor > 1.0)) throw std::invalid_argument("sweep: refinement factor must exceed 1");

  std::vector<RunConfig> configs;
  for (int i = 0; i < levels; ++i) {
    RunConfig c = config;
    const double scale = std::pow(factor, i);
    if (axis == SweepAxis::Tau)
      c.stepper.tau = config.stepper.tau / scale;
    else
      c.stepper.delta = config.stepper.delta / scale;
    c.output_dir = (std::filesystem::path(config.output_dir) / ("level_" + std::to_string(i))).string();
    configs.push_back(c);
  }
  std::vector<std::future<RunReport>> jobs;
  for (const auto& c : configs)
    jobs.push_back(std::async(std::launch::async, [&c, write_outputs] { return execute(c, write_outputs); }));

  SweepReport rep;
  rep.axis = axis;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    RunReport r = jobs[i].get();
    SweepLevel l;
    l.tau = configs[i].stepper.tau;
    l.delta = configs[i].stepper.delta;
    l.certified = r.certified;
    l.failures = r.failures;
    l.monitors = r.monitors;
    if (!r.certified)
      rep.failures.push_back("level " + std::to_string(i) + " not certified" +
                             (r.failures.empty() ? std::string() : ": " + r.failures.front()));
    rep.levels.push_back(std::move(l));
  }

  auto bounded = [&](const char* name, auto get) {
    double lo = get(rep.levels.front().monitors);
    double hi = lo;
    for (const auto& l : rep.levels) {
      lo = std::min(lo, get(l.monitors));
      hi = std::max(hi, get(l.monitors));
    }
    if (hi > 1e-12 && !(hi <= 2.0 * lo))
      rep.failures.push_back(std::string(name) + " varies by more than 2x across levels (" + short_num(lo) + " .. " +
                             short_num(hi) + ")");
  };
  bounded("sup ||grad c||", [](const Monitors& m) { return m.grad_c; });
  bounded("sup ||v||", [](const Monitors& m) { return m.velocity; });
  bounded("sup ||grad z||_p", [](const Monitors& m) { return m.grad_z; });
  bounded("dissipation", [](const Monitors& m) { return m.dissipation; });

  if (axis == SweepAxis::Tau) {
    bounded("sup sqrt(delta) |u|_H2", [](const Monitors& m) { return m.sqrt_delta_h2; });
    for (std::size_t i = 0; i + 1 < rep.levels.size(); ++i) {
      const double a = rep.levels[i].monitors.error_integral;
      const double b = rep.levels[i + 1].monitors.error_integral;
      if (!(a >= 1.5 * b))
        rep.failures.push_back("error integral decreased by less than 1.5x from level " + std::to_string(i) + " (" +
                               short_num(a) + " -> " + short_num(b) + ")");
    }
  } else {
    for (std::size_t i = 0; i + 1 < rep.levels.size(); ++i) {
      const double a = rep.levels[i].monitors.delta_h2;
      const double b = rep.levels[i + 1].monitors.delta_h2;
      if (!(b < a))
        rep.failures.push_back("sup delta A(u,u) did not decrease from level " + std::to_string(i) + " (" +
                               short_num(a) + " -> " + short_num(b) + ")");
    }
    const double first = rep.levels.front().monitors.sqrt_delta_h2;
    for (const auto& l : rep.levels)
      if (first > 1e-12 && !(l.monitors.sqrt_delta_h2 <= 2.0 * first))
        rep.failures.push_back("sup sqrt(delta) |u|_H2 grew by more than 2x");
    const double rate0 = rep.levels.front().monitors.sqrt_delta_rate;
    for (const auto& l : rep.levels)
      if (rate0 > 1e-12 && !(l.monitors.sqrt_delta_rate <= 2.0 * rate0))
        rep.failures.push_back("||sqrt(delta) dc/dt|| grew by more than 2x");
  }

  if (write_outputs) {
    std::filesystem::create_directories(config.output_dir);
    std::ofstream os(std::filesystem::path(config.output_dir) / "sweep.csv");
    os << rep.table();
  }
  return rep;
}

}  // namespace chd
