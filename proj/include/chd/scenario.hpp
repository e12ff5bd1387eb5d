#ifndef CHD_SCENARIO_HPP
#define CHD_SCENARIO_HPP

#include <functional>
#include <string>

#include "chd/grid.hpp"

namespace chd {

struct InitialData {
  ScalarField c;
  VectorField u;
  VectorField v;
  ScalarField z;
};

/// Initial-boundary data. The boundary displacement b(t) is given as a field on
/// the whole domain (an extension of the Dirichlet data), as the energy
/// bookkeeping integrates eps(d/dt b) and v . d/dt b over the domain.
struct Scenario {
  std::string name;
  InitialData initial;
  std::function<VectorField(double)> boundary;
  std::function<VectorField(double)> boundary_rate;
  std::function<VectorField(double)> boundary_acceleration;
  std::function<VectorField(double)> load;
  /// b constant in time and l identically zero.
  bool quiescent = false;
};

struct ScenarioParams {
  std::string name = "equilibrium";
  double c_mean = 0.0;
  double c_amplitude = 0.0;
  /// Rate b1 of the Dirichlet ramp b(t) = t b1 x / Lx (stretch only).
  double stretch_rate = 1.0;
  double z_initial = 1.0;
};

/// Builds one of "equilibrium", "stretch", "phase-separation".
/// Throws std::invalid_argument for an unknown name or inconsistent data.
Scenario make_scenario(const ScenarioParams& params, const Grid& grid);

/// Checks z0 in [0,1], field sizes, and u0 = b(0) on the Dirichlet boundary.
void validate_scenario(const Scenario& s, const Grid& grid);

}  // namespace chd

#endif  // CHD_SCENARIO_HPP
