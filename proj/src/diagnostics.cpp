#include "chd/diagnostics.hpp"

#include <cmath>
#include <sstream>

namespace chd {

namespace {

double mass_norm(const Grid& g, const Eigen::VectorXd& f) {
  const int n = g.num_nodes();
  const auto& w = g.node_weights();
  double sum = 0.0;
  for (Eigen::Index i = 0; i < f.size(); ++i) sum += w[i % n] * f[i] * f[i];
  return std::sqrt(sum);
}

double mass_dot(const Grid& g, const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const int n = g.num_nodes();
  const auto& w = g.node_weights();
  double sum = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) sum += w[i % n] * a[i] * b[i];
  return sum;
}

}  // namespace

ConservationReport conservation_checks(const Grid& g, const ScalarField& c, double initial_mass, const ScalarField& z,
                                       const ScalarField& z_prev) {
  ConservationReport r;
  r.mass_deviation = std::abs(integrate(g, c) - initial_mass) / (1.0 + std::abs(initial_mass));
  r.irreversibility = std::max(0.0, (z - z_prev).maxCoeff());
  r.bounds = std::max({0.0, -z.minCoeff(), z.maxCoeff() - 1.0});
  return r;
}

double ResidualReport::max_el() const { return std::max({r1, r2, r3, r4}); }

bool ResidualReport::finite() const {
  return std::isfinite(r1) && std::isfinite(r2) && std::isfinite(r3) && std::isfinite(r4) &&
         std::isfinite(mass_deviation) && std::isfinite(irreversibility) && std::isfinite(bounds);
}

ResidualReport el_residuals(const IncrementalProblem& prob, const Candidate& x, const ScalarField& mu) {
  const Grid& g = prob.grid();
  const MaterialModel& mm = prob.material();
  const auto& w = g.node_weights();
  const History& h = prob.history();
  const double tau = prob.tau();
  const QpFields qp = prob.qp_fields(x.c, x.u, x.z);
  const ScalarField rate = (x.c - h.c_prev) / tau;

  ResidualReport r;
  r.r1 = dual_norm(g, w.cwiseProduct(rate) + prob.metric().matrix() * mu);

  const int nq = g.num_quadrature_points();
  Eigen::MatrixXd gc = g.qp_gradient(x.c);
  Eigen::VectorXd wc(nq);
  for (int q = 0; q < nq; ++q) {
    const double wq = g.quadrature()[static_cast<std::size_t>(q)].weight;
    gc.row(q) *= wq;
    wc[q] = wq * elastic_dc(mm, qp.c[q], qp.strain[static_cast<std::size_t>(q)], qp.z[q]);
  }
  ScalarField r2 = w.cwiseProduct(mu) - g.scatter_gradient(gc) - g.scatter_values(wc) -
                   prob.delta() * w.cwiseProduct(rate);
  for (int i = 0; i < g.num_nodes(); ++i) r2[i] -= w[i] * psi_prime(mm, x.c[i]);
  r.r2 = dual_norm(g, r2);

  VectorField r3 = prob.u_part_gradient(x.u, qp);
  const int n = g.num_nodes();
  for (int k = 0; k < g.dimension(); ++k)
    for (int node : g.dirichlet_nodes()) r3[k * n + node] = 0.0;
  r.r3 = dual_norm(g, r3);

  r.r4 = damage_violation(g, prob.z_part_gradient(x.z, qp), x.z, h.z_prev);

  const ConservationReport cons = conservation_checks(g, x.c, prob.data().mass, x.z, h.z_prev);
  r.mass_deviation = cons.mass_deviation;
  r.irreversibility = cons.irreversibility;
  r.bounds = cons.bounds;
  return r;
}

double free_energy(const Grid& g, const MaterialModel& mm, double delta, const ScalarField& c, const VectorField& u,
                   const ScalarField& z) {
  const auto& w = g.node_weights();
  const Eigen::MatrixXd gc = g.qp_gradient(c);
  const Eigen::MatrixXd gz = g.qp_gradient(z);
  const auto strain = g.qp_strain(u);
  double sum = 0.0;
  for (int q = 0; q < g.num_quadrature_points(); ++q) {
    const auto& p = g.quadrature()[static_cast<std::size_t>(q)];
    const double rz = gz.row(q).norm();
    const double grad_z = rz == 0.0 ? 0.0 : std::pow(rz, mm.p()) / mm.p();
    sum += p.weight * (grad_z + 0.5 * gc.row(q).squaredNorm() +
                       elastic_energy(mm, c[p.node], strain[static_cast<std::size_t>(q)], z[p.node]));
  }
  for (int i = 0; i < g.num_nodes(); ++i) sum += w[i] * (damage_potential(mm, z[i]) + chemical_energy(mm, c[i]));
  return sum + 0.5 * delta * second_gradient_form(g, u, u);
}

double kinetic_energy(const Grid& g, const VectorField& v) { return 0.5 * mass_dot(g, v, v); }

EnergyTerms energy_terms(const IncrementalProblem& prob, const Candidate& x, const ScalarField& mu) {
  const Grid& g = prob.grid();
  const MaterialModel& mm = prob.material();
  const History& h = prob.history();
  const StepData& d = prob.data();
  const double tau = prob.tau();
  const double delta = prob.delta();
  const VectorField v = (x.u - h.u_prev) / tau;
  const VectorField v_prev = (h.u_prev - h.u_prev2) / tau;

  EnergyTerms out;
  out.free_energy = free_energy(g, mm, delta, x.c, x.u, x.z);
  out.kinetic = kinetic_energy(g, v);

  const ScalarField zdot = (x.z - h.z_prev) / tau;
  const ScalarField cdot = (x.c - h.c_prev) / tau;
  out.dissipation_increment =
      tau * (mass_dot(g, zdot, zdot) + delta * mass_dot(g, cdot, cdot) + mu.dot(prob.metric().matrix() * mu));

  const VectorField& db = d.boundary_rate;
  const auto strain = g.qp_strain(x.u);
  const auto strain_db = g.qp_strain(db);
  const QpFields qp = prob.qp_fields(x.c, x.u, x.z);
  double stress_work = 0.0;
  for (int q = 0; q < g.num_quadrature_points(); ++q) {
    const auto i = static_cast<std::size_t>(q);
    stress_work += g.quadrature()[i].weight * contract(elastic_de(mm, qp.c[q], strain[i], qp.z[q]), strain_db[i]);
  }
  out.external_work_increment = tau * (stress_work + delta * second_gradient_form(g, x.u, db) +
                                       mass_dot(g, d.load, v - db)) +
                                mass_dot(g, v - v_prev, db);
  return out;
}

std::array<double, 4> error_terms(const IncrementalProblem& prob, const Candidate& x) {
  const Grid& g = prob.grid();
  const MaterialModel& mm = prob.material();
  const History& h = prob.history();
  const auto& w = g.node_weights();
  const double tau = prob.tau();
  const QpFields now = prob.qp_fields(x.c, x.u, x.z);
  const QpFields before = prob.qp_fields(h.c_prev, h.u_prev, h.z_prev);

  std::array<double, 4> e{};
  for (int q = 0; q < g.num_quadrature_points(); ++q) {
    const auto i = static_cast<std::size_t>(q);
    const double wq = g.quadrature()[i].weight;
    const double zdot = (now.z[q] - before.z[q]) / tau;
    const double cdot = (now.c[q] - before.c[q]) / tau;
    if (zdot != 0.0)
      e[0] += wq * zdot *
              (elastic_dz(mm, now.c[q], now.strain[i], now.z[q]) - elastic_secant_z(mm, now.c[q], before.strain[i]));
    if (cdot != 0.0)
      e[1] += wq * cdot *
              (elastic_dc(mm, now.c[q], now.strain[i], now.z[q]) -
               elastic_secant_c(mm, now.c[q], before.c[q], before.strain[i], before.z[q]));
  }
  for (int i = 0; i < g.num_nodes(); ++i) {
    const double cdot = (x.c[i] - h.c_prev[i]) / tau;
    const double zdot = (x.z[i] - h.z_prev[i]) / tau;
    e[2] += w[i] * cdot * (psi_prime(mm, x.c[i]) - psi_secant(mm, x.c[i], h.c_prev[i]));
    e[3] += w[i] * zdot * (f_prime(mm, x.z[i]) - f_secant(mm, x.z[i], h.z_prev[i]));
  }
  return e;
}

ScalarField subgradient_xi(const Grid& g, const MaterialModel& mm, const ScalarField& c, const VectorField& u,
                           const ScalarField& z, double threshold) {
  const auto strain = g.qp_strain(u);
  Eigen::VectorXd wz(g.num_quadrature_points());
  for (int q = 0; q < g.num_quadrature_points(); ++q) {
    const auto& p = g.quadrature()[static_cast<std::size_t>(q)];
    wz[q] = p.weight * elastic_dz(mm, c[p.node], strain[static_cast<std::size_t>(q)], z[p.node]);
  }
  const ScalarField nodal = g.scatter_values(wz).cwiseQuotient(g.node_weights());
  ScalarField xi = ScalarField::Zero(g.num_nodes());
  for (int i = 0; i < g.num_nodes(); ++i)
    if (z[i] <= threshold) xi[i] = -std::max(0.0, nodal[i] + f_prime(mm, z[i]));
  return xi;
}

double residual_budget(const IncrementalProblem& prob, const Candidate& x, const ScalarField& mu,
                       const ResidualReport& r) {
  const Grid& g = prob.grid();
  const History& h = prob.history();
  const auto& w = g.node_weights();
  VectorField du = x.u - h.u_prev - prob.tau() * prob.data().boundary_rate;
  double zsum = 0.0;
  for (int i = 0; i < g.num_nodes(); ++i) zsum += std::sqrt(w[i]) * std::abs(x.z[i] - h.z_prev[i]);
  return r.r1 * prob.tau() * mass_norm(g, mu) + r.r2 * mass_norm(g, x.c - h.c_prev) + r.r3 * mass_norm(g, du) +
         r.r4 * zsum;
}

EnergyLedger::EnergyLedger(double initial_free_energy, double initial_kinetic) {
  LedgerRow r0;
  r0.E = initial_free_energy;
  r0.K = initial_kinetic;
  rows_.push_back(r0);
}

const LedgerRow& EnergyLedger::record(int k, double t, double tau, const EnergyTerms& terms,
                                      const std::array<double, 4>& e, const ResidualReport& residuals,
                                      double budget_increment) {
  const LedgerRow& prev = rows_.back();
  LedgerRow r;
  r.k = k;
  r.t = t;
  r.E = terms.free_energy;
  r.K = terms.kinetic;
  r.D = prev.D + terms.dissipation_increment;
  r.W_ext = prev.W_ext + terms.external_work_increment;
  r.e_step = e;
  for (int i = 0; i < 4; ++i) r.e_integral[static_cast<std::size_t>(i)] = prev.e_integral[static_cast<std::size_t>(i)] + tau * e[static_cast<std::size_t>(i)];
  r.e_abs_integral = prev.e_abs_integral + tau * (std::abs(e[0]) + std::abs(e[1]) + std::abs(e[2]));
  r.budget = prev.budget + budget_increment;
  r.residuals = residuals;
  r.slack = check_energy_inequality(r, rows_.front());
  rows_.push_back(r);
  return rows_.back();
}

double EnergyLedger::tolerance() const { return 1e-8 * (1.0 + std::abs(initial_total())); }

double check_energy_inequality(const LedgerRow& row, const LedgerRow& initial) {
  const double errors = row.e_integral[0] + row.e_integral[1] + row.e_integral[2] + row.e_integral[3];
  return (initial.E + initial.K + row.W_ext) - (row.E + row.K + row.D + errors);
}

std::string InequalityViolation::describe() const {
  std::ostringstream os;
  if (!violated) {
    os << "energy inequality holds";
  } else {
    os << "energy inequality violated at step " << step << ": slack " << slack << " < -" << tolerance;
  }
  return os.str();
}

InequalityViolation certify_ledger(const EnergyLedger& ledger) {
  InequalityViolation v;
  v.tolerance = ledger.tolerance();
  for (const auto& row : ledger.rows())
    if (row.slack < -v.tolerance) {
      v.violated = true;
      v.step = row.k;
      v.slack = row.slack;
      return v;
    }
  return v;
}

}  // namespace chd
