#include "chd/functional.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "chd/errors.hpp"

namespace chd {

namespace {

using Triplet = Eigen::Triplet<double>;

/// Sum over quadrature points of w_q G_q^T Q_q G_q, where G_q maps the nodal
/// values of an `ncomp`-component field to its gradient entries (k, d) at q,
/// ordered k * dim + d.
template <class QFn>
SparseMatrix assemble_gradient_form(const Grid& g, int ncomp, QFn&& qfun) {
  const int n = g.num_nodes();
  const int dim = g.dimension();
  const int m = ncomp * dim;
  std::vector<Triplet> t;
  t.reserve(g.quadrature().size() * static_cast<std::size_t>(4 * m * m));
  for (int q = 0; q < g.num_quadrature_points(); ++q) {
    const auto& p = g.quadrature()[static_cast<std::size_t>(q)];
    const Eigen::MatrixXd qm = qfun(q);
    for (int a = 0; a < m; ++a) {
      const int ka = a / dim;
      const int da = a % dim;
      for (int b = 0; b < m; ++b) {
        const int kb = b / dim;
        const int db = b % dim;
        const double v = p.weight * qm(a, b) / (g.spacing(da) * g.spacing(db));
        if (v == 0.0) continue;
        for (int sa = 0; sa < 2; ++sa)
          for (int sb = 0; sb < 2; ++sb) {
            const double sign = (sa == sb) ? 1.0 : -1.0;
            t.emplace_back(ka * n + p.edge[da][sa], kb * n + p.edge[db][sb], sign * v);
          }
      }
    }
  }
  SparseMatrix out(m / dim * n, m / dim * n);
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

SparseMatrix diagonal_matrix(const Eigen::VectorXd& d) {
  SparseMatrix out(d.size(), d.size());
  out.reserve(Eigen::VectorXi::Constant(d.size(), 1));
  for (Eigen::Index i = 0; i < d.size(); ++i) out.insert(i, i) = d[i];
  out.makeCompressed();
  return out;
}

/// C0 acting on gradient entries: Q(a,b) = sym(E_a) : C0 sym(E_b).
Eigen::MatrixXd base_gradient_stiffness(const MaterialModel& mm) {
  const int dim = mm.dimension();
  const int m = dim * dim;
  auto unit = [dim](int a) {
    SymTensor e = zero_tensor(dim);
    e(a / dim, a % dim) += 0.5;
    e(a % dim, a / dim) += 0.5;
    return e;
  };
  Eigen::MatrixXd q(m, m);
  for (int a = 0; a < m; ++a) {
    const SymTensor ca = mm.base_stiffness_apply(unit(a));
    for (int b = 0; b < m; ++b) q(a, b) = contract(ca, unit(b));
  }
  return q;
}

double pow_abs(double x, double e) {
  if (x == 0.0) return e == 0.0 ? 1.0 : 0.0;
  return std::pow(x, e);
}

}  // namespace

double FunctionalTerms::total() const {
  return damage_gradient + concentration_gradient + elastic + damage_potential + chemical + load + second_gradient +
         rate_z + inertia + rate_c_v0 + rate_c_l2;
}

void validate_params(const StepperParams& p) {
  auto fail = [](const std::string& what) { throw std::invalid_argument("stepper: " + what); };
  if (!(p.tau > 0.0) || !std::isfinite(p.tau)) fail("tau must be positive");
  if (!(p.delta >= 0.0) || !std::isfinite(p.delta)) fail("delta must be non-negative");
  if (!(p.final_time > 0.0) || !std::isfinite(p.final_time)) fail("final_time must be positive");
  if (!(p.outer_tol > 0.0)) fail("outer_tol must be positive");
  if (!(p.sweep_tol > 0.0)) fail("sweep_tol must be positive");
  if (!(p.inner_tol > 0.0)) fail("inner_tol must be positive");
  if (!(p.metric_tol > 0.0)) fail("metric_tol must be positive");
  if (p.max_outer < 1) fail("max_outer must be at least 1");
  if (p.max_inner < 1) fail("max_inner must be at least 1");
  if (!(p.armijo > 0.0 && p.armijo < 0.5)) fail("armijo must lie in (0, 0.5)");
  if (!(p.backtrack > 0.0 && p.backtrack < 1.0)) fail("backtrack must lie in (0, 1)");
}

IncrementalProblem::IncrementalProblem(const Grid& grid, const MaterialModel& material, const StepperParams& params,
                                       History history, StepData data)
    : grid_(&grid), material_(&material), params_(params), history_(std::move(history)), data_(std::move(data)) {
  validate_params(params_);
  const int n = grid.num_nodes();
  const Eigen::Index nv = static_cast<Eigen::Index>(grid.dimension()) * n;
  if (history_.c_prev.size() != n || history_.z_prev.size() != n || history_.u_prev.size() != nv ||
      history_.u_prev2.size() != nv)
    throw std::invalid_argument("functional: history size mismatch");
  if (data_.boundary_rate.size() == 0) data_.boundary_rate = VectorField::Zero(nv);
  if (data_.boundary_rate_prev.size() == 0) data_.boundary_rate_prev = VectorField::Zero(nv);
  if (data_.boundary.size() != nv || data_.load.size() != nv || data_.boundary_rate.size() != nv ||
      data_.boundary_rate_prev.size() != nv)
    throw std::invalid_argument("functional: boundary or load size mismatch");
  ScalarField weight(n);
  for (int i = 0; i < n; ++i) weight[i] = mobility(material, history_.c_prev[i], history_.z_prev[i]);
  metric_ = std::make_shared<const WeightedPoissonProblem>(grid, std::move(weight), params_.metric_tol);
}

void IncrementalProblem::check_feasible(const Candidate& x) const {
  const Grid& g = grid();
  const int n = g.num_nodes();
  if (x.c.size() != n || x.z.size() != n || x.u.size() != static_cast<Eigen::Index>(g.dimension()) * n)
    throw InfeasibleError("functional: candidate size mismatch");
  const double mass = integrate(g, x.c);
  const double scale = g.node_weights().dot(x.c.cwiseAbs());
  if (std::abs(mass - data_.mass) > 1e-10 * (1.0 + scale)) {
    std::ostringstream os;
    os << "functional: mass constraint violated (integral " << mass << ", expected " << data_.mass << ")";
    throw InfeasibleError(os.str());
  }
  for (int k = 0; k < g.dimension(); ++k)
    for (int node : g.dirichlet_nodes())
      if (x.u[k * n + node] != data_.boundary[k * n + node])
        throw InfeasibleError("functional: displacement differs from the boundary data on the Dirichlet boundary");
  for (int i = 0; i < n; ++i)
    if (!(x.z[i] >= 0.0 && x.z[i] <= history_.z_prev[i]))
      throw InfeasibleError("functional: damage outside [0, z_prev] at node " + std::to_string(i));
}

QpFields IncrementalProblem::qp_fields(const ScalarField& c, const VectorField& u, const ScalarField& z) const {
  return {grid().qp_values(c), grid().qp_values(z), grid().qp_strain(u)};
}

FunctionalTerms IncrementalProblem::terms(const Candidate& x) const {
  const Grid& g = grid();
  const MaterialModel& mm = material();
  const auto& w = g.node_weights();
  const double tau = params_.tau;
  const double delta = params_.delta;
  const QpFields qp = qp_fields(x.c, x.u, x.z);
  const Eigen::MatrixXd gc = g.qp_gradient(x.c);
  const Eigen::MatrixXd gz = g.qp_gradient(x.z);

  FunctionalTerms t;
  for (int q = 0; q < g.num_quadrature_points(); ++q) {
    const double wq = g.quadrature()[static_cast<std::size_t>(q)].weight;
    t.damage_gradient += wq * pow_abs(gz.row(q).norm(), mm.p()) / mm.p();
    t.concentration_gradient += wq * 0.5 * gc.row(q).squaredNorm();
    t.elastic += wq * elastic_energy(mm, qp.c[q], qp.strain[static_cast<std::size_t>(q)], qp.z[q]);
  }
  for (int i = 0; i < g.num_nodes(); ++i) {
    t.damage_potential += w[i] * damage_potential(mm, x.z[i]);
    t.chemical += w[i] * chemical_energy(mm, x.c[i]);
  }
  const int n = g.num_nodes();
  for (int k = 0; k < g.dimension(); ++k) {
    t.load -= w.dot(component(data_.load, k, n).cwiseProduct(component(x.u, k, n)));
    const Eigen::VectorXd acc =
        component(x.u, k, n) - 2.0 * component(history_.u_prev, k, n) + component(history_.u_prev2, k, n);
    t.inertia += w.dot(acc.cwiseAbs2()) / (2.0 * tau * tau);
  }
  t.second_gradient = 0.5 * delta * second_gradient_form(g, x.u, x.u);
  t.rate_z = w.dot((x.z - history_.z_prev).cwiseAbs2()) / (2.0 * tau);
  const ScalarField dc = x.c - history_.c_prev;
  t.rate_c_v0 = v0_norm_sq(metric(), dc) / (2.0 * tau);
  t.rate_c_l2 = delta * w.dot(dc.cwiseAbs2()) / (2.0 * tau);
  return t;
}

double IncrementalProblem::c_part(const ScalarField& c, const QpFields& qp) const {
  const Grid& g = grid();
  const MaterialModel& mm = material();
  const auto& w = g.node_weights();
  const Eigen::MatrixXd gc = g.qp_gradient(c);
  double sum = 0.0;
  for (int q = 0; q < g.num_quadrature_points(); ++q) {
    const auto& p = g.quadrature()[static_cast<std::size_t>(q)];
    sum += p.weight * (0.5 * gc.row(q).squaredNorm() +
                       elastic_energy(mm, c[p.node], qp.strain[static_cast<std::size_t>(q)], qp.z[q]));
  }
  for (int i = 0; i < g.num_nodes(); ++i) sum += w[i] * chemical_energy(mm, c[i]);
  const ScalarField dc = c - history_.c_prev;
  sum += v0_norm_sq(metric(), dc) / (2.0 * tau());
  sum += delta() * w.dot(dc.cwiseAbs2()) / (2.0 * tau());
  return sum;
}

ScalarField IncrementalProblem::c_part_gradient(const ScalarField& c, const QpFields& qp) const {
  const Grid& g = grid();
  const MaterialModel& mm = material();
  const auto& w = g.node_weights();
  const int nq = g.num_quadrature_points();
  Eigen::MatrixXd gc = g.qp_gradient(c);
  Eigen::VectorXd wc(nq);
  for (int q = 0; q < nq; ++q) {
    const auto& p = g.quadrature()[static_cast<std::size_t>(q)];
    gc.row(q) *= p.weight;
    wc[q] = p.weight * elastic_dc(mm, c[p.node], qp.strain[static_cast<std::size_t>(q)], qp.z[q]);
  }
  ScalarField out = g.scatter_gradient(gc) + g.scatter_values(wc);
  for (int i = 0; i < g.num_nodes(); ++i) out[i] += w[i] * psi_prime(mm, c[i]);
  const ScalarField dc = c - history_.c_prev;
  const ScalarField phi = solve_weighted_neumann(metric(), dc);
  out += (w.cwiseProduct(phi) + delta() * w.cwiseProduct(dc)) / tau();
  return out;
}

double IncrementalProblem::u_part(const VectorField& u, const QpFields& qp) const {
  const Grid& g = grid();
  const MaterialModel& mm = material();
  const auto& w = g.node_weights();
  const int n = g.num_nodes();
  const auto strain = g.qp_strain(u);
  double sum = 0.0;
  for (int q = 0; q < g.num_quadrature_points(); ++q)
    sum += g.quadrature()[static_cast<std::size_t>(q)].weight *
           elastic_energy(mm, qp.c[q], strain[static_cast<std::size_t>(q)], qp.z[q]);
  const double tau = params_.tau;
  for (int k = 0; k < g.dimension(); ++k) {
    sum -= w.dot(component(data_.load, k, n).cwiseProduct(component(u, k, n)));
    const Eigen::VectorXd acc =
        component(u, k, n) - 2.0 * component(history_.u_prev, k, n) + component(history_.u_prev2, k, n);
    sum += w.dot(acc.cwiseAbs2()) / (2.0 * tau * tau);
  }
  sum += 0.5 * delta() * second_gradient_form(g, u, u);
  return sum;
}

VectorField IncrementalProblem::u_part_gradient(const VectorField& u, const QpFields& qp) const {
  const Grid& g = grid();
  const MaterialModel& mm = material();
  const auto& w = g.node_weights();
  const int n = g.num_nodes();
  const auto strain = g.qp_strain(u);
  std::vector<SymTensor> stress(strain.size());
  for (std::size_t q = 0; q < strain.size(); ++q)
    stress[q] = g.quadrature()[q].weight * elastic_de(mm, qp.c[static_cast<Eigen::Index>(q)], strain[q],
                                                      qp.z[static_cast<Eigen::Index>(q)]);
  VectorField out = g.scatter_strain(stress);
  const double tau = params_.tau;
  const SparseMatrix& s2 = g.second_gradient_matrix();
  for (int k = 0; k < g.dimension(); ++k) {
    const Eigen::VectorXd acc =
        component(u, k, n) - 2.0 * component(history_.u_prev, k, n) + component(history_.u_prev2, k, n);
    component(out, k, n) += w.cwiseProduct(acc) / (tau * tau) - w.cwiseProduct(component(data_.load, k, n)) +
                            delta() * (s2 * component(u, k, n));
  }
  return out;
}

double IncrementalProblem::z_part(const ScalarField& z, const QpFields& qp) const {
  const Grid& g = grid();
  const MaterialModel& mm = material();
  const auto& w = g.node_weights();
  const Eigen::MatrixXd gz = g.qp_gradient(z);
  double sum = 0.0;
  for (int q = 0; q < g.num_quadrature_points(); ++q) {
    const auto& p = g.quadrature()[static_cast<std::size_t>(q)];
    sum += p.weight * (pow_abs(gz.row(q).norm(), mm.p()) / mm.p() +
                       elastic_energy(mm, qp.c[q], qp.strain[static_cast<std::size_t>(q)], z[p.node]));
  }
  for (int i = 0; i < g.num_nodes(); ++i) sum += w[i] * damage_potential(mm, z[i]);
  sum += w.dot((z - history_.z_prev).cwiseAbs2()) / (2.0 * tau());
  return sum;
}

ScalarField IncrementalProblem::z_part_gradient(const ScalarField& z, const QpFields& qp) const {
  const Grid& g = grid();
  const MaterialModel& mm = material();
  const auto& w = g.node_weights();
  const int nq = g.num_quadrature_points();
  Eigen::MatrixXd gz = g.qp_gradient(z);
  Eigen::VectorXd wz(nq);
  for (int q = 0; q < nq; ++q) {
    const auto& p = g.quadrature()[static_cast<std::size_t>(q)];
    gz.row(q) *= p.weight * pow_abs(gz.row(q).norm(), mm.p() - 2.0);
    wz[q] = p.weight * elastic_dz(mm, qp.c[q], qp.strain[static_cast<std::size_t>(q)], z[p.node]);
  }
  ScalarField out = g.scatter_gradient(gz) + g.scatter_values(wz);
  for (int i = 0; i < g.num_nodes(); ++i) out[i] += w[i] * f_prime(mm, z[i]);
  out += w.cwiseProduct(z - history_.z_prev) / tau();
  return out;
}

SparseMatrix IncrementalProblem::c_local_hessian(const ScalarField& c, const QpFields& qp) const {
  const Grid& g = grid();
  const MaterialModel& mm = material();
  const auto& w = g.node_weights();
  const int nq = g.num_quadrature_points();
  Eigen::VectorXd wcc(nq);
  for (int q = 0; q < nq; ++q) wcc[q] = g.quadrature()[static_cast<std::size_t>(q)].weight * elastic_dcc(mm, qp.z[q]);
  ScalarField d = g.scatter_values(wcc) + delta() / tau() * w;
  for (int i = 0; i < g.num_nodes(); ++i) d[i] += w[i] * psi_second(mm, c[i]);
  SparseMatrix h = g.stiffness_matrix(Eigen::VectorXd::Ones(nq));
  h += diagonal_matrix(d);
  return h;
}

SparseMatrix IncrementalProblem::u_hessian(const QpFields& qp) const {
  const Grid& g = grid();
  const MaterialModel& mm = material();
  const int n = g.num_nodes();
  const int dim = g.dimension();
  const Eigen::MatrixXd q0 = base_gradient_stiffness(mm);
  SparseMatrix h = assemble_gradient_form(g, dim, [&](int q) { return Eigen::MatrixXd(mm.stiffness_scale(qp.z[q]) * q0); });
  const double tau = params_.tau;
  Eigen::VectorXd mass(static_cast<Eigen::Index>(dim) * n);
  for (int k = 0; k < dim; ++k) component(mass, k, n) = g.node_weights() / (tau * tau);
  h += diagonal_matrix(mass);
  if (delta() > 0.0) {
    std::vector<Triplet> t;
    const SparseMatrix& s2 = g.second_gradient_matrix();
    for (int k = 0; k < dim; ++k)
      for (int col = 0; col < s2.outerSize(); ++col)
        for (SparseMatrix::InnerIterator it(s2, col); it; ++it)
          t.emplace_back(k * n + static_cast<int>(it.row()), k * n + static_cast<int>(it.col()), delta() * it.value());
    SparseMatrix a(h.rows(), h.cols());
    a.setFromTriplets(t.begin(), t.end());
    h += a;
  }
  return h;
}

SparseMatrix IncrementalProblem::z_hessian(const ScalarField& z) const {
  const Grid& g = grid();
  const double p = material().p();
  const int dim = g.dimension();
  const Eigen::MatrixXd gz = g.qp_gradient(z);
  SparseMatrix h = assemble_gradient_form(g, 1, [&](int q) {
    const Eigen::VectorXd grad = gz.row(q).transpose();
    const double r = grad.norm();
    Eigen::MatrixXd m = pow_abs(r, p - 2.0) * Eigen::MatrixXd::Identity(dim, dim);
    if (r > 0.0 && p != 2.0) m += (p - 2.0) * std::pow(r, p - 4.0) * grad * grad.transpose();
    return m;
  });
  h += diagonal_matrix(g.node_weights() / tau());
  return h;
}

std::vector<BoundState> IncrementalProblem::z_bounds(const ScalarField& z) const {
  std::vector<BoundState> out(static_cast<std::size_t>(z.size()), BoundState::Free);
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    auto& s = out[static_cast<std::size_t>(i)];
    if (history_.z_prev[i] <= 0.0)
      s = BoundState::Pinned;
    else if (z[i] <= 0.0)
      s = BoundState::Lower;
    else if (z[i] >= history_.z_prev[i])
      s = BoundState::Upper;
  }
  return out;
}

double objective(const IncrementalProblem& prob, const Candidate& x) {
  prob.check_feasible(x);
  return prob.terms(x).total();
}

ObjectiveGradient objective_gradient(const IncrementalProblem& prob, const Candidate& x) {
  prob.check_feasible(x);
  const Grid& g = prob.grid();
  const QpFields qp = prob.qp_fields(x.c, x.u, x.z);
  ObjectiveGradient out;
  out.c = prob.c_part_gradient(x.c, qp);
  out.c_projected = out.c - (out.c.sum() / g.volume()) * g.node_weights();
  out.u = prob.u_part_gradient(x.u, qp);
  out.u_restricted = out.u;
  const int n = g.num_nodes();
  for (int k = 0; k < g.dimension(); ++k)
    for (int node : g.dirichlet_nodes()) out.u_restricted[k * n + node] = 0.0;
  out.z = prob.z_part_gradient(x.z, qp);
  out.z_bounds = prob.z_bounds(x.z);
  return out;
}

double dual_norm(const Grid& g, const Eigen::VectorXd& covector) {
  const int n = g.num_nodes();
  const auto& w = g.node_weights();
  double sum = 0.0;
  for (Eigen::Index i = 0; i < covector.size(); ++i) {
    const double v = covector[i];
    sum += v * v / w[i % n];
  }
  return std::sqrt(sum);
}

double damage_violation(const Grid& g, const ScalarField& gradient_z, const ScalarField& z, const ScalarField& z_prev) {
  const auto& w = g.node_weights();
  double worst = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const double s = 1.0 / std::sqrt(w[i]);
    if (z[i] < z_prev[i]) worst = std::max(worst, -gradient_z[i] * s);
    if (z[i] > 0.0) worst = std::max(worst, gradient_z[i] * s);
  }
  return worst;
}

}  // namespace chd
