#ifndef CHD_CONFIG_HPP
#define CHD_CONFIG_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "chd/functional.hpp"
#include "chd/grid.hpp"
#include "chd/material.hpp"
#include "chd/scenario.hpp"

namespace chd {

struct RunConfig {
  GridConfig grid;
  MaterialParams material;
  /// Seed of the assumption validator's sampling.
  std::uint64_t seed = 1;
  StepperParams stepper;
  ScenarioParams scenario;
  std::string output_dir = "out";
  int snapshot_stride = 10;
};

/// All problems found while parsing, one message per entry ("line N: ...").
class ConfigError : public std::invalid_argument {
public:
  explicit ConfigError(std::vector<std::string> errors);
  const std::vector<std::string>& errors() const { return errors_; }

private:
  std::vector<std::string> errors_;
};

/// Parses the INI-style format:
///
///   [grid]
///   dimension = 1
///   nodes = 65
///   left = dirichlet
///
/// Sections grid, material, stepper and scenario are required, output is
/// optional. `overrides` are "section.key=value" strings applied after the
/// text. Throws ConfigError listing every problem.
RunConfig parse_config(const std::string& text, const std::vector<std::string>& overrides = {});

RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {});

/// Canonical text form; parse_config(format_config(c)) reproduces c.
std::string format_config(const RunConfig& c);

}  // namespace chd

#endif  // CHD_CONFIG_HPP
