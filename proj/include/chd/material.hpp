#ifndef CHD_MATERIAL_HPP
#define CHD_MATERIAL_HPP

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "chd/tensor.hpp"

namespace chd {

/// How the stiffness scales with damage: C(z) = s(z) C0.
enum class StiffnessLaw {
  Increasing,  ///< s(z) = eta + z (default; satisfies C'(z) >= 0)
  Decreasing,  ///< s(z) = eta + 1 - z (violates the monotonicity assumption)
};

enum class MobilityLaw { Constant, Affine };

struct MaterialParams {
  double eta = 0.1;
  double lame_lambda = 0.0;
  double lame_mu = 0.5;
  /// Vegard slope e-hat; entries beyond the model dimension are ignored.
  double eigenstrain_xx = 0.0;
  double eigenstrain_xy = 0.0;
  double eigenstrain_yy = 0.0;
  double alpha = 0.2;
  MobilityLaw mobility = MobilityLaw::Constant;
  double m0 = 1.0;
  double m1 = 0.0;
  /// Damage gradient exponent; 0 selects the default (2 in 1D, 4 in 2D).
  double p = 0.0;
  /// Sobolev critical exponent used only by the growth check (infinite for n <= 2).
  double sobolev_exponent = std::numeric_limits<double>::infinity();
  StiffnessLaw stiffness = StiffnessLaw::Increasing;
};

/// Constitutive data: W(c,e,z) = 1/2 C(z)(e - c e_hat):(e - c e_hat),
/// Psi(c) = (c^2-1)^2/4 = Psi1 + Psi2, f(z) = alpha (1 - z), mobility m(c,z).
/// Immutable after construction.
class MaterialModel {
public:
  MaterialModel(int dimension, const MaterialParams& params);

  int dimension() const { return dim_; }
  const MaterialParams& params() const { return params_; }
  double eta() const { return params_.eta; }
  double alpha() const { return params_.alpha; }
  double p() const { return p_; }
  const SymTensor& eigenstrain_slope() const { return e_hat_; }
  /// Mobility bounds C1 <= m <= C2.
  double mobility_min() const { return c1_; }
  double mobility_max() const { return c2_; }

  /// C0 e = 2 mu e + lambda tr(e) I.
  SymTensor base_stiffness_apply(const SymTensor& e) const;
  double stiffness_scale(double z) const;
  double stiffness_scale_slope() const;

private:
  int dim_;
  MaterialParams params_;
  double p_;
  SymTensor e_hat_;
  double c1_;
  double c2_;
};

/// C(z) e. Throws std::domain_error for z outside [0,1].
SymTensor stiffness_apply(const MaterialModel& mm, double z, const SymTensor& e);
/// C'(z) e.
SymTensor stiffness_slope_apply(const MaterialModel& mm, const SymTensor& e);
/// e*(c) = c e_hat.
SymTensor eigenstrain(const MaterialModel& mm, double c);

double elastic_energy(const MaterialModel& mm, double c, const SymTensor& e, double z);
double elastic_dc(const MaterialModel& mm, double c, const SymTensor& e, double z);
SymTensor elastic_de(const MaterialModel& mm, double c, const SymTensor& e, double z);
double elastic_dz(const MaterialModel& mm, double c, const SymTensor& e, double z);
/// d^2 W / dc^2 = C(z) e_hat : e_hat (W is quadratic in c).
double elastic_dcc(const MaterialModel& mm, double z);
/// (W(a,e,z) - W(b,e,z)) / (a - b); exact midpoint formula since W is quadratic in c.
double elastic_secant_c(const MaterialModel& mm, double a, double b, const SymTensor& e, double z);
/// (W(c,e,a) - W(c,e,b)) / (a - b); C is affine in z.
double elastic_secant_z(const MaterialModel& mm, double c, const SymTensor& e);

double chemical_energy(const MaterialModel& mm, double c);
double psi1(const MaterialModel& mm, double c);
double psi2(const MaterialModel& mm, double c);
double psi_prime(const MaterialModel& mm, double c);
double psi2_prime(const MaterialModel& mm, double c);
double psi_second(const MaterialModel& mm, double c);
/// (Psi(a) - Psi(b)) / (a - b) without cancellation; Psi'(a) when a == b.
double psi_secant(const MaterialModel& mm, double a, double b);

double damage_potential(const MaterialModel& mm, double z);
double f_prime(const MaterialModel& mm, double z);
/// (f(a) - f(b)) / (a - b); f is linear so this is f' exactly.
double f_secant(const MaterialModel& mm, double a, double b);

double mobility(const MaterialModel& mm, double c, double z);

struct AssumptionCheck {
  std::string name;
  bool passed = false;
  /// Smallest observed margin (negative when violated).
  double worst_margin = 0.0;
};

struct AssumptionReport {
  std::vector<AssumptionCheck> checks;
  bool all_passed() const;
  const AssumptionCheck* find(const std::string& name) const;
  std::string describe() const;
};

/// Sampling-based check of the standing constitutive assumptions.
/// Deterministic for a given seed.
AssumptionReport validate_assumptions(const MaterialModel& mm, std::uint64_t seed = 1, int samples = 200);

}  // namespace chd

#endif  // CHD_MATERIAL_HPP
