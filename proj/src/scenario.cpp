#include "chd/scenario.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace chd {

namespace {

VectorField zero_vector(const Grid& g) { return VectorField::Zero(static_cast<Eigen::Index>(g.dimension()) * g.num_nodes()); }

template <class Fn>
ScalarField nodal(const Grid& g, Fn&& fn) {
  ScalarField out(g.num_nodes());
  for (int n = 0; n < g.num_nodes(); ++n) {
    auto x = g.coordinate(n);
    out[n] = fn(x[0], x[1]);
  }
  return out;
}

}  // namespace

Scenario make_scenario(const ScenarioParams& params, const Grid& grid) {
  using std::numbers::pi;
  const int nn = grid.num_nodes();
  const double lx = grid.length(0);
  const double ly = grid.length(1);
  const bool two_d = grid.dimension() == 2;

  Scenario s;
  s.name = params.name;
  s.initial.u = zero_vector(grid);
  s.initial.v = zero_vector(grid);
  s.initial.z = ScalarField::Constant(nn, params.z_initial);
  auto zero = [&grid](double) { return zero_vector(grid); };
  s.boundary = zero;
  s.boundary_rate = zero;
  s.boundary_acceleration = zero;
  s.load = zero;

  if (params.name == "equilibrium") {
    s.initial.c = ScalarField::Constant(nn, params.c_mean);
    s.quiescent = true;
  } else if (params.name == "stretch") {
    const double amp = params.c_amplitude;
    const double mean = params.c_mean;
    s.initial.c = nodal(grid, [&](double x, double y) {
      const double shape = std::cos(pi * x / lx) * (two_d ? std::cos(pi * y / ly) : 1.0);
      return mean + amp * shape;
    });
    // Ramp profile: zero on the left face, one on the right face.
    const ScalarField ramp = nodal(grid, [&](double x, double) { return x / lx; });
    const double rate = params.stretch_rate;
    auto shaped = [&grid, ramp, nn](double factor) {
      VectorField out = zero_vector(grid);
      out.head(nn) = factor * ramp;
      return out;
    };
    s.boundary = [shaped, rate](double t) { return shaped(rate * t); };
    s.boundary_rate = [shaped, rate](double) { return shaped(rate); };
    s.initial.v = shaped(rate);
    s.quiescent = rate == 0.0;
  } else if (params.name == "phase-separation") {
    const double amp = params.c_amplitude;
    const double mean = params.c_mean;
    s.initial.c = nodal(grid, [&](double x, double y) {
      double v = std::cos(3.0 * pi * x / lx) + 0.5 * std::cos(7.0 * pi * x / lx);
      if (two_d) v = std::cos(3.0 * pi * x / lx) * std::cos(2.0 * pi * y / ly) + 0.5 * std::cos(5.0 * pi * x / lx);
      return mean + amp * v;
    });
    s.quiescent = true;
  } else {
    throw std::invalid_argument("scenario: unknown scenario '" + params.name + "'");
  }
  validate_scenario(s, grid);
  return s;
}

void validate_scenario(const Scenario& s, const Grid& grid) {
  const int nn = grid.num_nodes();
  const Eigen::Index nv = static_cast<Eigen::Index>(grid.dimension()) * nn;
  if (s.initial.c.size() != nn || s.initial.z.size() != nn || s.initial.u.size() != nv || s.initial.v.size() != nv)
    throw std::invalid_argument("scenario: initial field size mismatch");
  if (s.initial.z.minCoeff() < 0.0 || s.initial.z.maxCoeff() > 1.0)
    throw std::invalid_argument("scenario: initial damage must lie in [0,1]");
  const VectorField b0 = s.boundary(0.0);
  if (b0.size() != nv) throw std::invalid_argument("scenario: boundary field size mismatch");
  for (int k = 0; k < grid.dimension(); ++k)
    for (int node : grid.dirichlet_nodes())
      if (s.initial.u[k * nn + node] != b0[k * nn + node])
        throw std::invalid_argument("scenario: initial displacement must equal b(0) on the Dirichlet boundary");
}

}  // namespace chd
