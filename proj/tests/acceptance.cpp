// Acceptance run: one PASS/FAIL line per criterion; exit status 0 iff all pass.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "chd/driver.hpp"
#include "oracle.hpp"
#include "support.hpp"

using namespace chd;

namespace {

const std::vector<std::string> scenario_files = {"equilibrium.cfg", "stretch.cfg", "phase_separation.cfg",
                                                 "fracture.cfg", "stretch_2d.cfg"};

struct Run {
  std::string file;
  RunConfig config;
  RunReport report;
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

int failures = 0;

void verdict(int id, const char* title, bool ok, const std::string& detail) {
  std::printf("criterion %d (%s): %s  %s\n", id, title, ok ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

bool completed(const std::vector<Run>& runs, std::string& detail) {
  for (const auto& r : runs) {
    if (!r.report.completed || !r.report.result) {
      detail = r.file + " did not complete" +
               (r.report.failures.empty() ? std::string() : ": " + r.report.failures.front());
      return false;
    }
  }
  return true;
}

void constraints(const std::vector<Run>& runs) {
  std::string detail;
  bool ok = completed(runs, detail);
  double mass = 0.0, irrev = 0.0, bounds = 0.0;
  for (const auto& r : runs) {
    if (!r.report.result) continue;
    const auto& tr = r.report.result->trajectory;
    for (std::size_t k = 1; k < tr.states.size(); ++k) {
      const auto& res = tr.residuals[k];
      mass = std::max(mass, res.mass_deviation);
      irrev = std::max(irrev, res.irreversibility);
      bounds = std::max(bounds, res.bounds);
      const auto& z = tr.states[k].z;
      const auto& zp = tr.states[k - 1].z;
      for (int i = 0; i < z.size(); ++i)
        if (z[i] > zp[i] || z[i] < 0.0 || z[i] > 1.0) ok = false;
    }
  }
  ok = ok && mass <= 1e-12 && irrev == 0.0 && bounds == 0.0;
  verdict(1, "constraint exactness", ok,
          detail + "max mass deviation " + num(mass) + ", irreversibility " + num(irrev) + ", bounds " + num(bounds));
}

void euler_lagrange(const std::vector<Run>& runs, const std::vector<const SweepReport*>& sweeps) {
  std::string detail;
  bool ok = completed(runs, detail);
  double worst = 0.0;
  int steps = 0;
  for (const auto& r : runs) {
    if (!r.report.result) continue;
    const auto& tr = r.report.result->trajectory;
    for (std::size_t k = 1; k < tr.residuals.size(); ++k) {
      worst = std::max(worst, tr.residuals[k].max_el());
      ok = ok && tr.residuals[k].finite();
      ++steps;
    }
  }
  for (const auto* s : sweeps)
    for (const auto& l : s->levels) worst = std::max(worst, l.monitors.max_residual);
  ok = ok && worst <= 1e-6;
  verdict(2, "Euler-Lagrange residuals", ok, detail + "max r1..r4 " + num(worst) + " over " + std::to_string(steps) +
                                                  " steps plus sweep levels");
}

void energy(const std::vector<Run>& runs) {
  std::string detail;
  bool ok = completed(runs, detail);
  double worst = 0.0;
  double worst_rise = -1e300;
  for (const auto& r : runs) {
    if (!r.report.result) continue;
    const EnergyLedger& ledger = r.report.result->ledger;
    const double tol = ledger.tolerance();
    const auto& rows = ledger.rows();
    for (const auto& row : rows) {
      worst = std::min(worst, row.slack / tol);
      if (row.slack < -tol) ok = false;
    }
    if (r.report.result && make_scenario(r.config.scenario, build_grid(r.config.grid)).quiescent) {
      for (std::size_t k = 1; k < rows.size(); ++k) {
        if (rows[k].W_ext != 0.0) ok = false;
        const double before = rows[k - 1].E + rows[k - 1].K + rows[k - 1].D;
        const double after = rows[k].E + rows[k].K + rows[k].D;
        worst_rise = std::max(worst_rise, (after - before) / tol);
        if (after - before > tol) ok = false;
      }
    }
  }
  verdict(3, "discrete energy inequality", ok,
          detail + "min slack/tol " + num(worst) + ", max quiescent step rise of E+K+D in units of tol " +
              num(worst_rise));
}

void gradients() {
  double worst = 0.0;
  int directions = 0;
  for (const auto& f : scenario_files) {
    support::Setup s(support::config_file(f));
    const auto r = oracle::gradient_check(s.first_problem(), 20, 2024);
    worst = std::max(worst, r.worst_relative);
    directions += r.directions;
  }
  verdict(4, "gradient consistency", worst <= 1e-6,
          "worst relative error " + num(worst) + " over " + std::to_string(directions) + " directions");
}

void oracles() {
  support::Setup tiny(support::tiny_stretch());
  const IncrementalProblem prob = tiny.first_problem();
  double u_err = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Candidate x = oracle::random_feasible(prob, seed);
    const VectorField u = minimize_u_block(prob, x.c, x.z, x.u);
    u_err = std::max(u_err, (u - oracle::u_solve_1d(prob, x.c, x.z)).cwiseAbs().maxCoeff());
  }

  support::Setup ps(support::config_file("phase_separation.cfg"));
  const IncrementalProblem pprob = ps.first_problem();
  const Grid& g = ps.grid;
  double v0_err = 0.0;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  for (int k = 0; k < 10; ++k) {
    ScalarField v(g.num_nodes());
    for (int i = 0; i < v.size(); ++i) v[i] = d(rng);
    v.array() -= integrate(g, v) / g.volume();
    const double ref = oracle::v0_norm_sq_1d(pprob.metric().weight(), g.spacing(0), v);
    v0_err = std::max(v0_err, std::abs(v0_norm_sq(pprob.metric(), v) - ref));
  }

  double gap = 0.0;
  State st = tiny.initial();
  for (int k = 1; k <= 3; ++k) {
    const IncrementalProblem p = tiny.problem(st);
    const StepResult r = tiny.step(st);
    const double value = objective(p, Candidate{r.state.c, r.state.u, r.state.z});
    const auto ref = oracle::multistart_minimize(p, 8, 100 + k);
    gap = std::max(gap, std::abs(value - ref.best));
    st = r.state;
  }
  verdict(5, "oracle equivalence", u_err <= 1e-10 && v0_err <= 1e-9 && gap <= 1e-6,
          "u block " + num(u_err) + ", V0 norm " + num(v0_err) + ", step objective gap " + num(gap));
}

void refinement(const SweepReport& tau) {
  bool ok = tau.levels.size() == 3;
  std::string ratios;
  double e4 = 0.0;
  for (std::size_t i = 0; i < tau.levels.size(); ++i) {
    ok = ok && tau.levels[i].certified;
    e4 = std::max(e4, tau.levels[i].monitors.e4_max);
    if (i == 0) continue;
    const double ratio = tau.levels[i - 1].monitors.error_integral / tau.levels[i].monitors.error_integral;
    ratios += (ratios.empty() ? "" : ", ") + num(ratio);
    ok = ok && ratio >= 1.5;
  }
  ok = ok && e4 == 0.0;
  verdict(6, "error-term refinement", ok, "decrease factors " + ratios + "; max |e4| " + num(e4));
}

struct Spread {
  double lo = 1e300;
  double hi = 0.0;
  double first = 0.0;
  double last = 0.0;
};

Spread spread(const SweepReport& s, const std::function<double(const Monitors&)>& get) {
  Spread out;
  out.first = get(s.levels.front().monitors);
  out.last = get(s.levels.back().monitors);
  for (const auto& l : s.levels) {
    out.lo = std::min(out.lo, get(l.monitors));
    out.hi = std::max(out.hi, get(l.monitors));
  }
  return out;
}

void boundedness(const SweepReport& tau, const SweepReport& delta) {
  bool ok = tau.levels.size() == 3 && delta.levels.size() == 3;
  for (const auto* s : {&tau, &delta})
    for (const auto& l : s->levels) ok = ok && l.certified;
  std::string detail;
  auto two_sided = [&](const SweepReport& s, const char* name, auto get) {
    const Spread sp = spread(s, get);
    const bool good = sp.hi <= 2.0 * sp.lo || sp.hi <= 1e-12;
    ok = ok && good;
    detail += std::string(name) + " " + num(sp.hi / std::max(sp.lo, 1e-300)) + (good ? "" : "!") + " ";
  };
  auto no_growth = [&](const SweepReport& s, const char* name, auto get) {
    const Spread sp = spread(s, get);
    const bool good = sp.hi <= 2.0 * sp.first;
    ok = ok && good;
    detail += std::string(name) + " " + num(sp.first) + "->" + num(sp.last) + (good ? "" : "!") + " ";
  };
  detail += "tau: ";
  two_sided(tau, "grad_c", [](const Monitors& m) { return m.grad_c; });
  two_sided(tau, "v", [](const Monitors& m) { return m.velocity; });
  two_sided(tau, "grad_z", [](const Monitors& m) { return m.grad_z; });
  two_sided(tau, "D", [](const Monitors& m) { return m.dissipation; });
  two_sided(tau, "sqrt(delta)|u|_H2", [](const Monitors& m) { return m.sqrt_delta_h2; });
  detail += "| delta: ";
  two_sided(delta, "grad_c", [](const Monitors& m) { return m.grad_c; });
  two_sided(delta, "v", [](const Monitors& m) { return m.velocity; });
  two_sided(delta, "grad_z", [](const Monitors& m) { return m.grad_z; });
  two_sided(delta, "D", [](const Monitors& m) { return m.dissipation; });
  no_growth(delta, "sqrt(delta)|u|_H2", [](const Monitors& m) { return m.sqrt_delta_h2; });
  no_growth(delta, "|sqrt(delta) c_t|", [](const Monitors& m) { return m.sqrt_delta_rate; });
  bool monotone = true;
  for (std::size_t i = 1; i < delta.levels.size(); ++i)
    monotone = monotone && delta.levels[i].monitors.delta_h2 < delta.levels[i - 1].monitors.delta_h2;
  ok = ok && monotone;
  detail += std::string("delta*A(u,u) ") + (monotone ? "decreasing" : "not decreasing!");
  verdict(7, "a priori monitors", ok, detail);
}

void subgradient(const std::vector<Run>& runs) {
  std::string detail;
  bool ok = completed(runs, detail);
  long support_nodes = 0;
  double worst_pairing = -1e300;
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> d(0.0, 2.0);
  for (const auto& r : runs) {
    if (!r.report.result) continue;
    const Grid g = build_grid(r.config.grid);
    const auto& tr = r.report.result->trajectory;
    for (std::size_t k = 0; k < tr.states.size(); ++k) {
      const ScalarField& xi = tr.xi[k];
      const ScalarField& z = tr.states[k].z;
      for (int i = 0; i < xi.size(); ++i) {
        if (xi[i] > 0.0) ok = false;
        if (xi[i] != 0.0 && z[i] > 1e-10) ok = false;
        if (xi[i] < 0.0) ++support_nodes;
      }
      for (int t = 0; t < 10; ++t) {
        ScalarField zeta(z.size());
        for (int i = 0; i < zeta.size(); ++i) zeta[i] = d(rng);
        const double pairing = integrate(g, xi.cwiseProduct(zeta - z));
        worst_pairing = std::max(worst_pairing, pairing);
        if (pairing > 0.0) ok = false;
      }
    }
  }
  verdict(8, "subgradient contract", ok,
          detail + "nodes with xi < 0: " + std::to_string(support_nodes) + ", max int xi (zeta - z) " +
              num(worst_pairing));
}

void validator() {
  bool ok = true;
  std::string detail;
  for (int dim : {1, 2}) {
    const AssumptionReport r = validate_assumptions(MaterialModel(dim, MaterialParams{}), 1);
    ok = ok && r.all_passed();
  }
  MaterialParams decreasing;
  decreasing.stiffness = StiffnessLaw::Decreasing;
  const AssumptionReport r1 = validate_assumptions(MaterialModel(1, decreasing), 1);
  const bool c_rejected = !r1.all_passed() && !r1.find("stiffness_monotone")->passed;
  MaterialParams low_p;
  low_p.p = 1.0;
  const AssumptionReport r2 = validate_assumptions(MaterialModel(1, low_p), 1);
  const bool p_rejected = !r2.all_passed() && !r2.find("p_exceeds_dimension")->passed;
  ok = ok && c_rejected && p_rejected;
  detail = std::string("default passes in 1D and 2D; C' < 0 ") + (c_rejected ? "rejected" : "accepted!") +
           "; p <= n " + (p_rejected ? "rejected" : "accepted!");
  verdict(9, "assumption validator", ok, detail);
}

}  // namespace

int main() {
  std::vector<Run> runs;
  for (const auto& f : scenario_files) {
    Run r;
    r.file = f;
    r.config = support::config_file(f);
    r.report = execute(r.config, false);
    runs.push_back(std::move(r));
  }
  const SweepReport tau = sweep(support::config_file("stretch.cfg", {"stepper.tau=0.02", "stepper.delta=1e-3"}),
                                SweepAxis::Tau, 3, 2.0);
  const SweepReport delta = sweep(support::config_file("stretch.cfg", {"stepper.tau=0.01", "stepper.delta=1e-2"}),
                                  SweepAxis::Delta, 3, 10.0);

  constraints(runs);
  euler_lagrange(runs, {&tau, &delta});
  energy(runs);
  gradients();
  oracles();
  refinement(tau);
  boundedness(tau, delta);
  subgradient(runs);
  validator();

  std::printf("%s: %d of 9 criteria failed\n", failures == 0 ? "ACCEPTED" : "REJECTED", failures);
  return failures == 0 ? 0 : 1;
}
