#include "chd/material.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

namespace chd {

namespace {

void require_unit_interval(double z, const char* what) {
  if (!(z >= 0.0 && z <= 1.0)) {
    std::ostringstream os;
    os << what << ": damage value " << z << " outside [0,1]";
    throw std::domain_error(os.str());
  }
}

}  // namespace

MaterialModel::MaterialModel(int dimension, const MaterialParams& params) : dim_(dimension), params_(params) {
  if (dim_ != 1 && dim_ != 2) throw std::invalid_argument("material: dimension must be 1 or 2");
  if (!(params_.eta > 0.0)) throw std::invalid_argument("material: eta must be positive");
  if (!(params_.lame_mu > 0.0) || params_.lame_lambda < 0.0)
    throw std::invalid_argument("material: need lame_mu > 0 and lame_lambda >= 0");
  if (params_.alpha < 0.0) throw std::invalid_argument("material: alpha must be nonnegative");
  if (!(params_.m0 > 0.0)) throw std::invalid_argument("material: m0 must be positive");
  p_ = params_.p > 0.0 ? params_.p : (dim_ == 1 ? 2.0 : 4.0);
  e_hat_ = zero_tensor(dim_);
  e_hat_(0, 0) = params_.eigenstrain_xx;
  if (dim_ == 2) {
    e_hat_(0, 1) = e_hat_(1, 0) = params_.eigenstrain_xy;
    e_hat_(1, 1) = params_.eigenstrain_yy;
  }
  if (params_.mobility == MobilityLaw::Constant) {
    c1_ = c2_ = params_.m0;
  } else {
    c1_ = std::min(params_.m0, params_.m0 + params_.m1);
    c2_ = std::max(params_.m0, params_.m0 + params_.m1);
    if (!(c1_ > 0.0)) throw std::invalid_argument("material: affine mobility must stay positive on [0,1]");
  }
}

SymTensor MaterialModel::base_stiffness_apply(const SymTensor& e) const {
  return 2.0 * params_.lame_mu * e + params_.lame_lambda * e.trace() * identity_tensor(static_cast<int>(e.rows()));
}

double MaterialModel::stiffness_scale(double z) const {
  return params_.stiffness == StiffnessLaw::Increasing ? params_.eta + z : params_.eta + 1.0 - z;
}

double MaterialModel::stiffness_scale_slope() const {
  return params_.stiffness == StiffnessLaw::Increasing ? 1.0 : -1.0;
}

SymTensor stiffness_apply(const MaterialModel& mm, double z, const SymTensor& e) {
  require_unit_interval(z, "stiffness_apply");
  return mm.stiffness_scale(z) * mm.base_stiffness_apply(e);
}

SymTensor stiffness_slope_apply(const MaterialModel& mm, const SymTensor& e) {
  return mm.stiffness_scale_slope() * mm.base_stiffness_apply(e);
}

SymTensor eigenstrain(const MaterialModel& mm, double c) { return c * mm.eigenstrain_slope(); }

double elastic_energy(const MaterialModel& mm, double c, const SymTensor& e, double z) {
  const SymTensor r = e - eigenstrain(mm, c);
  return 0.5 * contract(stiffness_apply(mm, z, r), r);
}

SymTensor elastic_de(const MaterialModel& mm, double c, const SymTensor& e, double z) {
  return stiffness_apply(mm, z, e - eigenstrain(mm, c));
}

double elastic_dc(const MaterialModel& mm, double c, const SymTensor& e, double z) {
  return -contract(elastic_de(mm, c, e, z), mm.eigenstrain_slope());
}

double elastic_dz(const MaterialModel& mm, double c, const SymTensor& e, double z) {
  require_unit_interval(z, "elastic_dz");
  const SymTensor r = e - eigenstrain(mm, c);
  return 0.5 * contract(stiffness_slope_apply(mm, r), r);
}

double elastic_dcc(const MaterialModel& mm, double z) {
  const SymTensor& eh = mm.eigenstrain_slope();
  return contract(stiffness_apply(mm, z, eh), eh);
}

double elastic_secant_c(const MaterialModel& mm, double a, double b, const SymTensor& e, double z) {
  return elastic_dc(mm, 0.5 * (a + b), e, z);
}

double elastic_secant_z(const MaterialModel& mm, double c, const SymTensor& e) {
  const SymTensor r = e - eigenstrain(mm, c);
  return 0.5 * contract(stiffness_slope_apply(mm, r), r);
}

double chemical_energy(const MaterialModel&, double c) {
  const double s = c * c - 1.0;
  return 0.25 * s * s;
}
double psi1(const MaterialModel&, double c) { return 0.25 * c * c * c * c + 0.25; }
double psi2(const MaterialModel&, double c) { return -0.5 * c * c; }
double psi_prime(const MaterialModel&, double c) { return c * c * c - c; }
double psi2_prime(const MaterialModel&, double c) { return -c; }
double psi_second(const MaterialModel&, double c) { return 3.0 * c * c - 1.0; }

double psi_secant(const MaterialModel&, double a, double b) {
  // (a^2-1)^2 - (b^2-1)^2 = (a^2-b^2)(a^2+b^2-2)
  return 0.25 * (a + b) * (a * a + b * b - 2.0);
}

double damage_potential(const MaterialModel& mm, double z) {
  require_unit_interval(z, "damage_potential");
  return mm.alpha() * (1.0 - z);
}
double f_prime(const MaterialModel& mm, double) { return -mm.alpha(); }
double f_secant(const MaterialModel& mm, double, double) { return -mm.alpha(); }

double mobility(const MaterialModel& mm, double, double z) {
  const auto& p = mm.params();
  if (p.mobility == MobilityLaw::Constant) return p.m0;
  return std::clamp(p.m0 + p.m1 * z, mm.mobility_min(), mm.mobility_max());
}

bool AssumptionReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const AssumptionCheck& c) { return c.passed; });
}

const AssumptionCheck* AssumptionReport::find(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

std::string AssumptionReport::describe() const {
  std::ostringstream os;
  for (const auto& c : checks)
    os << (c.passed ? "pass " : "FAIL ") << c.name << " (worst margin " << c.worst_margin << ")\n";
  return os.str();
}

AssumptionReport validate_assumptions(const MaterialModel& mm, std::uint64_t seed, int samples) {
  const int n = mm.dimension();
  const double rel = 1e-12;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  auto random_unit_sym = [&] {
    SymTensor e(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) e(i, j) = e(j, i) = normal(rng);
    const double norm = e.norm();
    return SymTensor(e / (norm > 0.0 ? norm : 1.0));
  };

  AssumptionReport report;
  AssumptionCheck coercive{"stiffness_coercive", true, std::numeric_limits<double>::infinity()};
  AssumptionCheck monotone{"stiffness_monotone", true, std::numeric_limits<double>::infinity()};
  const int nz = 21;
  for (int s = 0; s < samples; ++s) {
    const SymTensor e = random_unit_sym();
    for (int k = 0; k < nz; ++k) {
      const double z = static_cast<double>(k) / (nz - 1);
      coercive.worst_margin = std::min(coercive.worst_margin, contract(stiffness_apply(mm, z, e), e) - mm.eta());
      monotone.worst_margin = std::min(monotone.worst_margin, contract(stiffness_slope_apply(mm, e), e));
    }
  }
  coercive.passed = coercive.worst_margin >= -rel;
  monotone.passed = monotone.worst_margin >= -rel;
  report.checks.push_back(coercive);
  report.checks.push_back(monotone);

  AssumptionCheck mob{"mobility_bounds", true, std::numeric_limits<double>::infinity()};
  mob.worst_margin = mm.mobility_min();
  for (int i = 0; i <= 40; ++i) {
    const double c = -5.0 + 10.0 * i / 40.0;
    for (int k = 0; k < nz; ++k) {
      const double z = static_cast<double>(k) / (nz - 1);
      const double m = mobility(mm, c, z);
      mob.worst_margin = std::min({mob.worst_margin, m - mm.mobility_min(), mm.mobility_max() - m});
    }
  }
  mob.passed = mm.mobility_min() > 0.0 && mob.worst_margin >= -rel;
  report.checks.push_back(mob);

  // Psi1 convexity and positivity on a sample grid.
  AssumptionCheck convex{"psi1_convex", true, std::numeric_limits<double>::infinity()};
  AssumptionCheck positive{"psi1_nonnegative", true, std::numeric_limits<double>::infinity()};
  const double hc = 0.01;
  for (int i = -500; i <= 500; ++i) {
    const double c = i * hc;
    const double d2 = psi1(mm, c + hc) - 2.0 * psi1(mm, c) + psi1(mm, c - hc);
    convex.worst_margin = std::min(convex.worst_margin, d2);
    positive.worst_margin = std::min(positive.worst_margin, psi1(mm, c));
  }
  convex.passed = convex.worst_margin >= -rel;
  positive.passed = positive.worst_margin >= 0.0;
  report.checks.push_back(convex);
  report.checks.push_back(positive);

  // Growth conditions: the ratio |g(c)| / bound(c) must saturate, i.e. the
  // maximum over [-2R,2R] does not exceed the maximum over [-R,R] by more than 25%.
  auto saturation = [&](auto&& numerator, auto&& bound) {
    const double radius = 20.0;
    double inner = 0.0;
    double outer = 0.0;
    for (int i = -2000; i <= 2000; ++i) {
      const double c = 2.0 * radius * i / 2000.0;
      const double r = std::abs(numerator(c)) / bound(c);
      if (std::abs(c) <= radius) inner = std::max(inner, r);
      outer = std::max(outer, r);
    }
    return 1.25 * inner - outer;
  };
  AssumptionCheck growth2{"psi2_growth", true, 0.0};
  growth2.worst_margin = saturation([&](double c) { return psi2_prime(mm, c); },
                                    [](double c) { return 1.0 + std::abs(c); });
  growth2.passed = growth2.worst_margin >= 0.0;
  report.checks.push_back(growth2);
  AssumptionCheck growth{"psi_growth", true, 0.0};
  if (std::isinf(mm.params().sobolev_exponent)) {
    growth.worst_margin = std::numeric_limits<double>::infinity();
  } else {
    const double q = mm.params().sobolev_exponent / 2.0;
    growth.worst_margin = saturation([&](double c) { return psi_prime(mm, c); },
                                     [q](double c) { return 1.0 + std::pow(std::abs(c), q); });
  }
  growth.passed = growth.worst_margin >= 0.0;
  report.checks.push_back(growth);

  AssumptionCheck fpos{"damage_potential_nonnegative", true, std::numeric_limits<double>::infinity()};
  for (int k = 0; k <= 100; ++k) fpos.worst_margin = std::min(fpos.worst_margin, damage_potential(mm, k / 100.0));
  fpos.passed = fpos.worst_margin >= 0.0;
  report.checks.push_back(fpos);

  AssumptionCheck pn{"p_exceeds_dimension", true, mm.p() - n};
  pn.passed = mm.p() > n;
  report.checks.push_back(pn);
  return report;
}

}  // namespace chd
