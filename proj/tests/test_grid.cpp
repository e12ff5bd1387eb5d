#include <doctest.h>

#include <random>

#include "chd/grid.hpp"
#include "oracle.hpp"
#include "support.hpp"

using namespace chd;

namespace {

GridConfig square(int n) {
  GridConfig gc;
  gc.dimension = 2;
  gc.lengths = {1.0, 1.0};
  gc.nodes = {n, n};
  gc.faces = {BoundaryTag::Dirichlet, BoundaryTag::Neumann, BoundaryTag::Neumann, BoundaryTag::Neumann};
  return gc;
}

Eigen::VectorXd random_vector(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = d(rng);
  return v;
}

}  // namespace

TEST_CASE("1D grid with three nodes") {
  const Grid g = build_grid(support::line(3));
  CHECK(g.num_nodes() == 3);
  CHECK(g.spacing(0) == doctest::Approx(0.5));
  CHECK(g.tag(0) == BoundaryTag::Dirichlet);
  CHECK(g.tag(1) == BoundaryTag::Interior);
  CHECK(g.tag(2) == BoundaryTag::Neumann);
  CHECK(g.dirichlet_nodes() == std::vector<int>{0});
}

TEST_CASE("2D grid with a Dirichlet left edge") {
  const Grid g = build_grid(square(3));
  CHECK(g.num_nodes() == 9);
  CHECK(g.dirichlet_nodes().size() == 3);
  for (int n : g.dirichlet_nodes()) CHECK(g.node_ij(n)[0] == 0);
  CHECK(g.node_weights().sum() == doctest::Approx(1.0));
}

TEST_CASE("grid without Dirichlet faces is rejected") {
  GridConfig gc = square(3);
  gc.faces[0] = BoundaryTag::Neumann;
  CHECK_THROWS_AS(build_grid(gc), std::invalid_argument);
  GridConfig line = support::line(3);
  line.faces[0] = BoundaryTag::Neumann;
  CHECK_THROWS_AS(build_grid(line), std::invalid_argument);
  GridConfig small = support::line(2);
  CHECK_THROWS_AS(build_grid(small), std::invalid_argument);
}

TEST_CASE("integrate") {
  for (int n : {3, 7, 33}) {
    const Grid g = build_grid(support::line(n));
    CHECK(integrate(g, ScalarField::Ones(n)) == doctest::Approx(1.0));
  }
  const Grid g = build_grid(support::line(3));
  ScalarField x(3);
  x << 0.0, 0.5, 1.0;
  CHECK(integrate(g, x) == doctest::Approx(0.5));
  CHECK(integrate(g, x.cwiseProduct(x)) == doctest::Approx(0.375));

  const Grid g2 = build_grid(square(5));
  ScalarField lin(g2.num_nodes());
  for (int i = 0; i < g2.num_nodes(); ++i) lin[i] = 1.0 + 2.0 * g2.coordinate(i)[0] - g2.coordinate(i)[1];
  CHECK(integrate(g2, lin) == doctest::Approx(1.5));
}

TEST_CASE("gradient") {
  const Grid g = build_grid(support::line(3));
  ScalarField hat(3);
  hat << 0.0, 1.0, 0.0;
  const Eigen::MatrixXd d = gradient(g, hat);
  CHECK(d(0, 0) == doctest::Approx(2.0));
  CHECK(d(1, 0) == doctest::Approx(-2.0));

  const Grid g2 = build_grid(square(4));
  ScalarField lin(g2.num_nodes());
  for (int i = 0; i < g2.num_nodes(); ++i) lin[i] = 0.3 + 2.0 * g2.coordinate(i)[0] - 0.5 * g2.coordinate(i)[1];
  const Eigen::MatrixXd d2 = gradient(g2, lin);
  for (int c = 0; c < g2.num_cells(); ++c) {
    CHECK(d2(c, 0) == doctest::Approx(2.0));
    CHECK(d2(c, 1) == doctest::Approx(-0.5));
  }
  CHECK(gradient(g2, ScalarField::Constant(g2.num_nodes(), 4.0)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("symmetric gradient") {
  const Grid g = build_grid(square(4));
  const int n = g.num_nodes();
  VectorField u(2 * n);
  for (int i = 0; i < n; ++i) {
    const auto x = g.coordinate(i);
    u[i] = 0.2 * x[0] + 0.7 * x[1];
    u[n + i] = -0.1 * x[0] + 0.4 * x[1];
  }
  for (const auto& e : symmetric_gradient(g, u)) {
    CHECK(e(0, 0) == doctest::Approx(0.2));
    CHECK(e(1, 1) == doctest::Approx(0.4));
    CHECK(e(0, 1) == doctest::Approx(0.3));
    CHECK(e(1, 0) == e(0, 1));
  }
}

TEST_CASE("quadrature maps and their adjoints") {
  const Grid g = build_grid(square(5));
  const int n = g.num_nodes();
  const int nq = g.num_quadrature_points();
  const ScalarField f = random_vector(n, 1);
  const Eigen::VectorXd q = random_vector(nq, 2);
  CHECK(g.qp_values(f).dot(q) == doctest::Approx(f.dot(g.scatter_values(q))));

  Eigen::MatrixXd qg(nq, 2);
  qg.col(0) = random_vector(nq, 3);
  qg.col(1) = random_vector(nq, 4);
  const Eigen::MatrixXd grad = g.qp_gradient(f);
  CHECK((grad.cwiseProduct(qg)).sum() == doctest::Approx(f.dot(g.scatter_gradient(qg))));

  const VectorField u = random_vector(2 * n, 5);
  std::vector<SymTensor> stress(static_cast<std::size_t>(nq));
  const Eigen::VectorXd s0 = random_vector(nq, 6), s1 = random_vector(nq, 7), s2 = random_vector(nq, 8);
  for (int k = 0; k < nq; ++k) {
    SymTensor s(2, 2);
    s << s0[k], s1[k], s1[k], s2[k];
    stress[static_cast<std::size_t>(k)] = s;
  }
  const auto eps = g.qp_strain(u);
  double lhs = 0.0;
  for (int k = 0; k < nq; ++k) lhs += contract(stress[static_cast<std::size_t>(k)], eps[static_cast<std::size_t>(k)]);
  CHECK(lhs == doctest::Approx(u.dot(g.scatter_strain(stress))));

  const SparseMatrix k = g.stiffness_matrix(Eigen::VectorXd::Ones(nq));
  CHECK((k * ScalarField::Ones(n)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("second gradient form") {
  const Grid g = build_grid(support::line(5));
  VectorField spike = VectorField::Zero(5);
  spike[2] = 1.0;
  // Rows of the stencil: (16, 16, -32, 16, 16) with weights (1/8, 1/4, 1/4, 1/4, 1/8).
  CHECK(second_gradient_form(g, spike, spike) == doctest::Approx(448.0));
  const Eigen::MatrixXd dense = oracle::second_gradient_1d(5, 0.25);
  CHECK(second_gradient_form(g, spike, spike) == doctest::Approx(spike.dot(dense * spike)).epsilon(1e-14));

  const Grid g9 = build_grid(support::line(9));
  const VectorField a = random_vector(9, 11), b = random_vector(9, 12);
  const Eigen::MatrixXd d9 = oracle::second_gradient_1d(9, 0.125);
  CHECK(second_gradient_form(g9, a, b) == doctest::Approx(a.dot(d9 * b)).epsilon(1e-13));

  VectorField linear(9), quad(9);
  for (int i = 0; i < 9; ++i) {
    const double x = g9.coordinate(i)[0];
    linear[i] = 0.5 - 2.0 * x;
    quad[i] = 0.5 * x * x;
  }
  CHECK(std::abs(second_gradient_form(g9, linear, b)) < 1e-9);
  CHECK(second_gradient_form(g9, quad, quad) > 0.0);
}

TEST_CASE("second gradient form in 2D is symmetric and nonnegative") {
  const Grid g = build_grid(square(6));
  const int n = g.num_nodes();
  for (std::uint64_t s = 0; s < 5; ++s) {
    const VectorField a = random_vector(2 * n, 100 + s), b = random_vector(2 * n, 200 + s);
    CHECK(second_gradient_form(g, a, b) == doctest::Approx(second_gradient_form(g, b, a)));
    CHECK(second_gradient_form(g, a, a) >= 0.0);
  }
  VectorField affine(2 * n);
  for (int i = 0; i < n; ++i) {
    const auto x = g.coordinate(i);
    affine[i] = 1.0 + x[0] - 3.0 * x[1];
    affine[n + i] = 2.0 * x[1];
  }
  CHECK(std::abs(second_gradient_form(g, affine, random_vector(2 * n, 9))) < 1e-9);
}

TEST_CASE("apply_dirichlet") {
  const Grid g = build_grid(square(3));
  const int n = g.num_nodes();
  const VectorField u = random_vector(2 * n, 3);
  const VectorField zero = apply_dirichlet(g, u, VectorField::Zero(2 * n));
  const VectorField tenth = apply_dirichlet(g, VectorField::Zero(2 * n), VectorField::Constant(2 * n, 0.1));
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < 2; ++k) {
      if (g.is_dirichlet(i)) {
        CHECK(zero[k * n + i] == 0.0);
        CHECK(tenth[k * n + i] == 0.1);
      } else {
        CHECK(zero[k * n + i] == u[k * n + i]);
        CHECK(tenth[k * n + i] == 0.0);
      }
    }
  }
  CHECK(apply_dirichlet(g, zero, VectorField::Zero(2 * n)) == zero);
}
