#ifndef CHD_DRIVER_HPP
#define CHD_DRIVER_HPP

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "chd/config.hpp"
#include "chd/stepper.hpp"

namespace chd {

/// Sup-in-time norms and integrals monitored across refinement levels.
struct Monitors {
  double grad_c = 0.0;          ///< sup_t ||grad c||_L2
  double velocity = 0.0;        ///< sup_t ||v||_L2
  double grad_z = 0.0;          ///< sup_t ||grad z||_Lp
  double dissipation = 0.0;     ///< D(0, T)
  double sqrt_delta_h2 = 0.0;   ///< sup_t sqrt(delta A(u,u))
  double delta_h2 = 0.0;        ///< sup_t delta A(u,u)
  double sqrt_delta_rate = 0.0; ///< ||sqrt(delta) d/dt c||_L2(L2)
  double error_integral = 0.0;  ///< int_0^T |e1| + |e2| + |e3|
  double e4_max = 0.0;          ///< max_k |e4|
  double worst_slack = 0.0;
  double max_residual = 0.0;
};

Monitors compute_monitors(const SimulationResult& r, const Grid& g, const MaterialModel& mm,
                          const StepperParams& params);

/// Outcome of one certified run.
struct RunReport {
  bool completed = false;
  bool certified = false;
  std::vector<std::string> failures;
  /// First time at which z dropped below its initial value; negative if never.
  double damage_onset = -1.0;
  Monitors monitors;
  std::optional<SimulationResult> result;
};

/// Checks every per-step certificate of a finished (or partial) run.
std::vector<std::string> certify(const SimulationResult& r, const Scenario& s, const Grid& g, const MaterialModel& mm,
                                 const StepperParams& params);

/// Validates the material, runs the simulation and certifies it. When
/// `write_outputs` is set, writes trajectory.csv, ledger.csv and summary.txt
/// into config.output_dir.
RunReport execute(const RunConfig& config, bool write_outputs, std::ostream* log = nullptr);

/// Exit status of `execute`: 0 iff every certificate passed.
int run(const RunConfig& config, std::ostream& log);

enum class SweepAxis { Tau, Delta };

struct SweepLevel {
  double tau = 0.0;
  double delta = 0.0;
  bool certified = false;
  std::vector<std::string> failures;
  Monitors monitors;
};

struct SweepReport {
  SweepAxis axis = SweepAxis::Tau;
  std::vector<SweepLevel> levels;
  std::vector<std::string> failures;
  bool passed() const { return failures.empty(); }
  std::string table() const;
};

/// Reruns the configuration dividing tau (or delta) by `factor` per level;
/// levels run concurrently. Requires levels >= 3 and factor > 1.
SweepReport sweep(const RunConfig& config, SweepAxis axis, int levels, double factor = 2.0,
                  bool write_outputs = false);

void write_ledger_csv(std::ostream& os, const EnergyLedger& ledger);
void write_trajectory_csv(std::ostream& os, const Trajectory& tr, const Grid& g, int stride);

}  // namespace chd

#endif  // CHD_DRIVER_HPP
