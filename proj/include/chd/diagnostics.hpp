#ifndef CHD_DIAGNOSTICS_HPP
#define CHD_DIAGNOSTICS_HPP

#include <array>
#include <string>
#include <vector>

#include "chd/functional.hpp"

namespace chd {

struct ConservationReport {
  /// |int c - int c0| / (1 + |int c0|).
  double mass_deviation = 0.0;
  /// max (z - z_prev)_+.
  double irreversibility = 0.0;
  /// max of (-z)_+ and (z - 1)_+.
  double bounds = 0.0;
};

ConservationReport conservation_checks(const Grid& g, const ScalarField& c, double initial_mass, const ScalarField& z,
                                       const ScalarField& z_prev);

/// Defects of the discrete weak equations of one step. r1..r3 are dual norms over
/// L2-normalized nodal test functions; r4 is the size of the most negative
/// pairing of the damage inequality over L2-normalized admissible nodal
/// directions (0 when none is negative).
struct ResidualReport {
  double r1 = 0.0;
  double r2 = 0.0;
  double r3 = 0.0;
  double r4 = 0.0;
  double mass_deviation = 0.0;
  double irreversibility = 0.0;
  double bounds = 0.0;

  double max_el() const;
  bool finite() const;
};

ResidualReport el_residuals(const IncrementalProblem& prob, const Candidate& x, const ScalarField& mu);

struct EnergyTerms {
  double free_energy = 0.0;
  double kinetic = 0.0;
  double dissipation_increment = 0.0;
  double external_work_increment = 0.0;
};

/// Free energy of a configuration, including the second-gradient term.
double free_energy(const Grid& g, const MaterialModel& mm, double delta, const ScalarField& c, const VectorField& u,
                   const ScalarField& z);
double kinetic_energy(const Grid& g, const VectorField& v);

/// Energies of an accepted step. The external work increment of step k is
///   tau [<W_e, eps(Db^k)> + delta A(u^k, Db^k) + <l^k, v^k - Db^k>] + <v^k - v^{k-1}, Db^k>
/// with Db^k = (b^k - b^{k-1}) / tau; summed over k this is the summation by parts
/// form with the boundary terms <v^k, Db^k> - <v^0, Db^0>.
EnergyTerms energy_terms(const IncrementalProblem& prob, const Candidate& x, const ScalarField& mu);

/// e1..e4 at the step, evaluated with exact difference quotients.
std::array<double, 4> error_terms(const IncrementalProblem& prob, const Candidate& x);

/// xi = -chi{z <= threshold} max(0, W_z + f'), with W_z lumped to the nodes.
ScalarField subgradient_xi(const Grid& g, const MaterialModel& mm, const ScalarField& c, const VectorField& u,
                           const ScalarField& z, double threshold = 1e-10);

/// Bound on the energy defect caused by the residuals of one step.
double residual_budget(const IncrementalProblem& prob, const Candidate& x, const ScalarField& mu,
                       const ResidualReport& r);

struct LedgerRow {
  int k = 0;
  double t = 0.0;
  double E = 0.0;
  double K = 0.0;
  /// Cumulative dissipation and external work.
  double D = 0.0;
  double W_ext = 0.0;
  /// Error terms at this step and their signed time integrals up to it.
  std::array<double, 4> e_step{};
  std::array<double, 4> e_integral{};
  /// Time integral of |e1| + |e2| + |e3|.
  double e_abs_integral = 0.0;
  double slack = 0.0;
  /// Accumulated residual budget.
  double budget = 0.0;
  ResidualReport residuals;
};

/// Running ledger of the discrete energy inequality.
class EnergyLedger {
public:
  EnergyLedger(double initial_free_energy, double initial_kinetic);

  const LedgerRow& record(int k, double t, double tau, const EnergyTerms& terms, const std::array<double, 4>& e,
                          const ResidualReport& residuals, double budget_increment);

  const std::vector<LedgerRow>& rows() const { return rows_; }
  double initial_total() const { return rows_.front().E + rows_.front().K; }
  /// Certification tolerance 1e-8 (1 + |E(0) + K(0)|).
  double tolerance() const;

private:
  std::vector<LedgerRow> rows_;
};

/// slack = E(0) + K(0) + W_ext - (E + K + D + int e).
double check_energy_inequality(const LedgerRow& row, const LedgerRow& initial);

struct InequalityViolation {
  bool violated = false;
  int step = -1;
  double slack = 0.0;
  double tolerance = 0.0;
  std::string describe() const;
};

/// First step whose slack falls below -tolerance.
InequalityViolation certify_ledger(const EnergyLedger& ledger);

}  // namespace chd

#endif  // CHD_DIAGNOSTICS_HPP
