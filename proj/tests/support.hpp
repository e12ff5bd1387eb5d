#ifndef CHD_TESTS_SUPPORT_HPP
#define CHD_TESTS_SUPPORT_HPP

#include <string>
#include <vector>

#include "chd/config.hpp"
#include "chd/stepper.hpp"

namespace support {

inline chd::RunConfig config_file(const std::string& name, const std::vector<std::string>& overrides = {}) {
  return chd::load_config(std::string(CHD_CONFIG_DIR) + "/" + name, overrides);
}

inline chd::GridConfig line(int nodes, double length = 1.0, chd::BoundaryTag right = chd::BoundaryTag::Neumann) {
  chd::GridConfig gc;
  gc.dimension = 1;
  gc.lengths = {length, 1.0};
  gc.nodes = {nodes, 1};
  gc.faces = {chd::BoundaryTag::Dirichlet, right, chd::BoundaryTag::Neumann, chd::BoundaryTag::Neumann};
  return gc;
}

/// Grid, material and scenario of one configuration, kept together because
/// problems and scenarios refer to the grid.
struct Setup {
  chd::RunConfig config;
  chd::Grid grid;
  chd::MaterialModel material;
  chd::Scenario scenario;

  explicit Setup(const chd::RunConfig& c)
      : config(c),
        grid(chd::build_grid(c.grid)),
        material(c.grid.dimension, c.material),
        scenario(chd::make_scenario(c.scenario, grid)) {}
  Setup(const Setup&) = delete;
  Setup& operator=(const Setup&) = delete;

  const chd::StepperParams& params() const { return config.stepper; }
  chd::State initial() const { return chd::initial_state(scenario, config.stepper); }
  chd::IncrementalProblem problem(const chd::State& s) const {
    return chd::make_problem(s, scenario, config.stepper, material, grid);
  }
  chd::IncrementalProblem first_problem() const { return problem(initial()); }
  chd::StepResult step(const chd::State& s) const { return chd::step(s, scenario, config.stepper, material, grid); }
  chd::SimulationResult run() const { return chd::run_simulation(scenario, config.stepper, material, grid); }
};

/// Five-node bar pulled fast enough that damage starts in the first step.
inline chd::RunConfig tiny_stretch() {
  chd::RunConfig c;
  c.grid = line(5, 1.0, chd::BoundaryTag::Dirichlet);
  c.material.eigenstrain_xx = 0.1;
  c.material.alpha = 0.05;
  c.material.m0 = 0.5;
  c.stepper.tau = 0.05;
  c.stepper.final_time = 0.15;
  c.scenario.name = "stretch";
  c.scenario.c_amplitude = 0.2;
  c.scenario.stretch_rate = 10.0;
  return c;
}

}  // namespace support

#endif  // CHD_TESTS_SUPPORT_HPP
