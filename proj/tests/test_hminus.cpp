#include <doctest.h>

#include <random>

#include "chd/errors.hpp"
#include "chd/hminus.hpp"
#include "oracle.hpp"
#include "support.hpp"

using namespace chd;

namespace {

ScalarField random_zero_mean(const Grid& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  ScalarField v(g.num_nodes());
  for (int i = 0; i < v.size(); ++i) v[i] = d(rng);
  v.array() -= integrate(g, v) / g.volume();
  return v;
}

}  // namespace

TEST_CASE("zero right-hand side") {
  const Grid g = build_grid(support::line(3));
  const WeightedPoissonProblem prob(g, ScalarField::Ones(3));
  CHECK(solve_weighted_neumann(prob, ScalarField::Zero(3)).isZero());
  CHECK(v0_norm_sq(prob, ScalarField::Zero(3)) == 0.0);
  CHECK(v0_inner(prob, ScalarField::Zero(3), random_zero_mean(g, 1)) == 0.0);
}

TEST_CASE("three-node solve matches the dense oracle") {
  const Grid g = build_grid(support::line(3));
  const WeightedPoissonProblem prob(g, ScalarField::Ones(3));
  ScalarField rhs(3);
  rhs << 1.0, 0.0, -1.0;
  const ScalarField phi = solve_weighted_neumann(prob, rhs);
  const Eigen::VectorXd ref = oracle::neumann_solve_1d(Eigen::VectorXd::Ones(3), 0.5, rhs);
  CHECK((phi - ref).cwiseAbs().maxCoeff() < 1e-12);
  const double value = v0_inner(prob, rhs, rhs);
  CHECK(value == doctest::Approx(ref.dot(g.node_weights().cwiseProduct(rhs))).epsilon(1e-12));
  CHECK(std::abs(v0_norm_sq(prob, rhs) - value) < 1e-12);
}

TEST_CASE("non-zero-mean right-hand side is rejected") {
  const Grid g = build_grid(support::line(5));
  const WeightedPoissonProblem prob(g, ScalarField::Ones(5));
  CHECK_THROWS_AS(solve_weighted_neumann(prob, ScalarField::Ones(5)), NotInV0Error);
}

TEST_CASE("V0 inner product is symmetric, bilinear and positive") {
  const Grid g = build_grid(support::line(17));
  ScalarField weight(17);
  for (int i = 0; i < 17; ++i) weight[i] = 0.5 + 0.4 * std::sin(3.0 * i);
  const WeightedPoissonProblem prob(g, weight, 1e-13);
  for (std::uint64_t s = 0; s < 10; ++s) {
    const ScalarField v = random_zero_mean(g, 2 * s), w = random_zero_mean(g, 2 * s + 1);
    CHECK(std::abs(v0_inner(prob, v, w) - v0_inner(prob, w, v)) < 1e-8);
    CHECK(v0_norm_sq(prob, v) > 0.0);
    CHECK(v0_norm_sq(prob, 2.0 * v) == doctest::Approx(4.0 * v0_norm_sq(prob, v)).epsilon(1e-10));
    CHECK(v0_inner(prob, v + w, w) == doctest::Approx(v0_inner(prob, v, w) + v0_inner(prob, w, w)).epsilon(1e-8));
    const double dense = oracle::v0_norm_sq_1d(weight, g.spacing(0), v);
    CHECK(std::abs(v0_norm_sq(prob, v) - dense) <= 1e-9 * (1.0 + dense));
  }
}

TEST_CASE("doubling a constant weight halves the norm") {
  const Grid g = build_grid(support::line(9));
  const WeightedPoissonProblem one(g, ScalarField::Constant(9, 0.7), 1e-13);
  const WeightedPoissonProblem two(g, ScalarField::Constant(9, 1.4), 1e-13);
  const ScalarField v = random_zero_mean(g, 5);
  CHECK(v0_norm_sq(two, v) == doctest::Approx(0.5 * v0_norm_sq(one, v)).epsilon(1e-10));
}

TEST_CASE("solve satisfies the weak form in 2D") {
  GridConfig gc;
  gc.dimension = 2;
  gc.lengths = {1.0, 2.0};
  gc.nodes = {9, 13};
  const Grid g = build_grid(gc);
  ScalarField weight(g.num_nodes());
  for (int i = 0; i < g.num_nodes(); ++i) weight[i] = 1.0 + g.coordinate(i)[0] * g.coordinate(i)[1];
  const WeightedPoissonProblem prob(g, weight, 1e-12);
  const ScalarField rhs = random_zero_mean(g, 9);
  NeumannSolveInfo info;
  const ScalarField phi = solve_weighted_neumann(prob, rhs, &info);
  const Eigen::VectorXd defect = prob.matrix() * phi - g.node_weights().cwiseProduct(rhs);
  CHECK(defect.norm() <= 1e-11);
  CHECK(std::abs(integrate(g, phi)) < 1e-12);
  CHECK(info.iterations > 0);

  const WeightedPoissonProblem starved(g, weight, 1e-14, 2);
  CHECK_THROWS_AS(solve_weighted_neumann(starved, rhs), SolverError);
}
