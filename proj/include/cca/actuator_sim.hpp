#pragma once

// Second-order actuators with rate and position saturation, and the replay of
// a commanded-moment maneuver through an allocator and an actuator bank.

#include "cca/allocator.hpp"
#include "cca/io.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace cca {

struct ActuatorParams {
  std::string name;
  double omega0 = 1.0;  // rad/s
  double zeta = 1.0;
  double lower = -1.0;  // deg
  double upper = 1.0;   // deg
  double rate_limit = 1.0;  // deg/s, symmetric
  bool saturate = true;

  void validate() const;
};

struct ActuatorState {
  double position = 0.0;  // deg
  double velocity = 0.0;  // deg/s
};

// Clamp activity of one step.
struct StepReport {
  bool position_clamped = false;
  bool rate_clamped = false;
  // How far the unclamped position went past the violated limit (deg).
  double excess = 0.0;
};

// x'' = w^2 (command - x) - 2 zeta w x', one RK4 step of length dt. The
// position derivative is the velocity state limited to +-rate_limit; after
// the step the velocity is clamped to the rate limit and the position to its
// limits, zeroing velocity that pushes into the limit. Throws InputError
// unless 0 < dt <= 1 / (10 omega0).
ActuatorState actuator_step(const ActuatorState& state, const ActuatorParams& params,
                            double command, double dt, StepReport* report = nullptr);

struct ManeuverSample {
  double t = 0.0;
  Vec3 tau_cmd = Vec3::Zero();  // c_l, c_m, c_n
};

using Maneuver = std::vector<ManeuverSample>;

// Five-second style maneuver: left-turn trim, aggressive right roll between
// 0.5 s and 3.5 s with a dip in pitch demand, ending in a right-turn trim.
Maneuver synth_maneuver(double duration = 5.0, double rate_hz = 100.0);

// CSV with header t,cl,cm,cn. Throws InputError on missing columns or
// non-increasing time.
Maneuver read_maneuver(std::istream& is);
Maneuver read_maneuver_file(const std::filesystem::path& path);
void write_maneuver(std::ostream& os, const Maneuver& maneuver);

struct ExperimentOptions {
  double dt = 1e-3;
  bool precompute = true;
  // Also record the redistributed pseudo-inverse solution per sample.
  bool compare_erpi = false;
};

// Clamps smaller than this are integration roundoff of an actuator resting on
// its limit and are not counted as events.
inline constexpr double kClampEventTolerance = 1e-9;

struct TimeSeries {
  std::vector<double> t;
  std::vector<Vec3> tau_cmd;
  std::vector<VecX> u;             // allocator output
  std::vector<VecX> u_act;         // actuator positions at the sample time
  std::vector<Vec3> tau_realized;  // B u_act
  std::vector<Vec3> tau_allocated; // B u
  std::vector<double> clip_scale;
  std::vector<bool> clipped;
  std::vector<double> solve_seconds;
  std::vector<VecX> u_erpi;        // filled when compare_erpi
  std::vector<double> erpi_scale;

  // Per actuator, over every integration step.
  std::vector<int> clamp_events;        // steps clamped by more than kClampEventTolerance
  std::vector<double> max_clamp_excess; // deg past the limit before clamping
  std::vector<double> max_abs_rate;     // deg/s of realized position change
  // Largest excursion of a recorded u_act outside its limits (deg).
  double max_position_violation = 0.0;
};

TimeSeries run_experiment(const AircraftModel& model, const std::vector<ActuatorParams>& actuators,
                          const Maneuver& maneuver, AmsMode mode,
                          const ExperimentOptions& options = {});

// Sum over samples and actuators of |u_k - u_{k-1}|.
double total_variation(const std::vector<VecX>& series);

}  // namespace cca
