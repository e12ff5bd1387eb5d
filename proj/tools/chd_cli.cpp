// Command line front end: single certified runs and tau/delta refinement sweeps.

#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "chd/config.hpp"
#include "chd/driver.hpp"

namespace {

chd::RunConfig load(const std::string& path, const std::vector<std::string>& overrides, const std::string& out) {
  chd::RunConfig cfg = chd::load_config(path, overrides);
  if (!out.empty()) cfg.output_dir = out;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cahn-Hilliard / elastodynamics / damage simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir;
  int verbosity = 1;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("config", config_path, "Configuration file")->required()->check(CLI::ExistingFile);
    sub->add_option("--set", overrides, "Override as section.key=value (repeatable)");
    sub->add_option("-o,--output", out_dir, "Output directory (overrides output.directory)");
    sub->add_option("-v,--verbosity", verbosity, "0 quiet, 1 summary, 2 per step")->check(CLI::Range(0, 2));
  };

  CLI::App* run = app.add_subcommand("run", "Run one simulation and certify it");
  add_common(run);

  CLI::App* sweep = app.add_subcommand("sweep", "Refinement sweep over tau or delta");
  add_common(sweep);
  std::string axis = "tau";
  int levels = 3;
  double factor = 2.0;
  sweep->add_option("--axis", axis, "tau or delta")->check(CLI::IsMember({"tau", "delta"}));
  sweep->add_option("--levels", levels, "Number of levels (>= 3)");
  sweep->add_option("--factor", factor, "Divisor of tau or delta per level");

  CLI::App* check = app.add_subcommand("check", "Parse the configuration and print it in canonical form");
  add_common(check);

  CLI11_PARSE(app, argc, argv);

  try {
    const chd::RunConfig cfg = load(config_path, overrides, out_dir);
    if (*check) {
      std::cout << chd::format_config(cfg);
      return 0;
    }
    if (*run) {
      std::ostringstream sink;
      std::ostream& log = verbosity >= 2 ? std::cout : sink;
      const int status = chd::run(cfg, log);
      if (verbosity == 1) {
        std::istringstream lines(sink.str());
        std::string line;
        while (std::getline(lines, line))
          if (line.rfind("step ", 0) != 0) std::cout << line << '\n';
      }
      return status;
    }
    if (levels < 3) {
      std::cerr << "sweep: --levels must be at least 3\n";
      return 2;
    }
    const auto report =
        chd::sweep(cfg, axis == "tau" ? chd::SweepAxis::Tau : chd::SweepAxis::Delta, levels, factor, true);
    if (verbosity > 0) std::cout << report.table();
    for (const auto& f : report.failures) std::cout << "FAIL " << f << '\n';
    std::cout << (report.passed() ? "sweep passed" : "sweep failed") << '\n';
    return report.passed() ? 0 : 1;
  } catch (const chd::ConfigError& e) {
    for (const auto& msg : e.errors()) std::cerr << "config error: " << msg << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
