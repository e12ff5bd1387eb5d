#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "chd/config.hpp"
#include "chd/driver.hpp"
#include "support.hpp"

using namespace chd;

namespace {

const char* minimal = R"(# smallest accepted file
[grid]
nodes = 9

[material]

[stepper]
tau = 0.05
final_time = 0.1

[scenario]
name = equilibrium
)";

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> errors_of(const std::string& text, const std::vector<std::string>& overrides = {}) {
  try {
    parse_config(text, overrides);
  } catch (const ConfigError& e) {
    return e.errors();
  }
  return {};
}

bool mentions(const std::vector<std::string>& errors, const std::string& what) {
  for (const auto& e : errors)
    if (e.find(what) != std::string::npos) return true;
  return false;
}

std::filesystem::path scratch(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("chd_test_" + name);
  std::filesystem::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("minimal configuration gets defaults") {
  const RunConfig c = parse_config(minimal);
  CHECK(c.grid.dimension == 1);
  CHECK(c.grid.nodes[0] == 9);
  CHECK(c.grid.faces[0] == BoundaryTag::Dirichlet);
  CHECK(c.stepper.tau == 0.05);
  CHECK(c.stepper.delta == StepperParams{}.delta);
  CHECK(c.material.eta == MaterialParams{}.eta);
  CHECK(c.scenario.name == "equilibrium");
  CHECK(c.output_dir == "out");
}

TEST_CASE("configuration errors carry line numbers") {
  std::string text = minimal;
  text.replace(text.find("tau = 0.05"), 10, "tau = 0");
  auto errors = errors_of(text);
  REQUIRE(errors.size() == 1);
  CHECK(mentions(errors, "line 8"));
  CHECK(mentions(errors, "tau"));

  errors = errors_of(std::string(minimal) + "foo = 1\n");
  REQUIRE(errors.size() == 1);
  CHECK(mentions(errors, "line 13"));
  CHECK(mentions(errors, "foo"));

  errors = errors_of("[grid]\nnodes = 9\n[stepper]\n[scenario]\n");
  CHECK(mentions(errors, "missing section [material]"));

  errors = errors_of(std::string(minimal) + "[bogus]\n");
  CHECK(mentions(errors, "line 13"));

  errors = errors_of(minimal, {"stepper.delta=-1", "grid.nodes=x"});
  CHECK(errors.size() == 2);

  std::string neumann_only = minimal;
  neumann_only.replace(neumann_only.find("nodes = 9"), 9, "nodes = 9\nleft = neumann");
  CHECK(mentions(errors_of(neumann_only), "Dirichlet"));
}

TEST_CASE("overrides and the canonical form round-trip") {
  const RunConfig c = parse_config(minimal, {"material.alpha=0.3", "scenario.name=stretch", "output.directory=x"});
  CHECK(c.material.alpha == 0.3);
  CHECK(c.scenario.name == "stretch");
  CHECK(c.output_dir == "x");
  const RunConfig again = parse_config(format_config(c));
  CHECK(format_config(again) == format_config(c));
  for (const char* file : {"equilibrium.cfg", "stretch.cfg", "phase_separation.cfg", "fracture.cfg", "stretch_2d.cfg"}) {
    const RunConfig f = support::config_file(file);
    CHECK(format_config(parse_config(format_config(f))) == format_config(f));
  }
}

TEST_CASE("run writes outputs and certifies the equilibrium") {
  RunConfig c = support::config_file("equilibrium.cfg");
  c.output_dir = scratch("equilibrium").string();
  std::ostringstream log;
  CHECK(run(c, log) == 0);
  const std::filesystem::path out(c.output_dir);
  CHECK(std::filesystem::exists(out / "trajectory.csv"));
  CHECK(std::filesystem::exists(out / "summary.txt"));
  std::istringstream ledger(slurp(out / "ledger.csv"));
  std::string line;
  std::getline(ledger, line);
  CHECK(line == "k,t,E,K,D,W_ext,e1,e2,e3,e4,slack,r1,r2,r3,r4,mass_dev,irrev_viol");
  int rows = 0;
  while (std::getline(ledger, line)) {
    ++rows;
    std::istringstream fields(line);
    std::string f;
    for (int i = 0; i <= 10; ++i) std::getline(fields, f, ',');
    CHECK(std::stod(f) >= 0.0);
  }
  CHECK(rows == 51);
}

TEST_CASE("stretch run records damage onset near the hand estimate") {
  const RunReport r = execute(support::config_file("stretch.cfg"), false);
  CHECK(r.certified);
  REQUIRE(r.damage_onset > 0.0);
  // Uniform strain b1 t on the bar: W_z = (2 mu) (b1 t)^2 / 2 exceeds alpha at t = sqrt(2 alpha / 2 mu) / b1.
  const double estimate = std::sqrt(2.0 * 0.2 / 1.0) / 2.0;
  CHECK(std::abs(r.damage_onset - estimate) < 0.05);
}

TEST_CASE("material violating the assumptions is rejected") {
  RunConfig c = support::config_file("stretch.cfg", {"material.stiffness=decreasing"});
  std::ostringstream log;
  CHECK(run(c, log) != 0);
  CHECK(log.str().find("stiffness_monotone") != std::string::npos);
}

TEST_CASE("reruns are bit-identical") {
  RunConfig a = support::config_file("fracture.cfg", {"stepper.final_time=0.1"});
  RunConfig b = a;
  a.output_dir = scratch("rerun_a").string();
  b.output_dir = scratch("rerun_b").string();
  execute(a, true);
  execute(b, true);
  for (const char* f : {"trajectory.csv", "ledger.csv", "summary.txt"})
    CHECK(slurp(std::filesystem::path(a.output_dir) / f) == slurp(std::filesystem::path(b.output_dir) / f));
}

TEST_CASE("sweep") {
  const RunConfig c = support::config_file("stretch.cfg", {"stepper.tau=0.02"});
  CHECK_THROWS_AS(sweep(c, SweepAxis::Tau, 1), std::invalid_argument);
  CHECK_THROWS_AS(sweep(c, SweepAxis::Tau, 3, 1.0), std::invalid_argument);
  const SweepReport r = sweep(c, SweepAxis::Tau, 3);
  INFO(r.table());
  CHECK(r.passed());
  REQUIRE(r.levels.size() == 3);
  CHECK(r.levels[2].tau == doctest::Approx(0.005));
  CHECK(r.table().find("error_integral") != std::string::npos);
}
