#include "cca/actuator_sim.hpp"

#include "cca/baseline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numbers>

namespace cca {

void ActuatorParams::validate() const {
  if (!(omega0 > 0.0)) throw InputError("actuator " + name + ": omega0 must be positive");
  if (!(zeta > 0.0)) throw InputError("actuator " + name + ": zeta must be positive");
  if (!(lower < upper)) throw InputError("actuator " + name + ": lower limit must be below upper");
  if (!(rate_limit > 0.0)) throw InputError("actuator " + name + ": rate limit must be positive");
}

ActuatorState actuator_step(const ActuatorState& state, const ActuatorParams& p, double command,
                            double dt, StepReport* report) {
  if (!(dt > 0.0) || dt > 1.0 / (10.0 * p.omega0) * (1.0 + 1e-12)) {
    throw InputError("actuator " + p.name + ": dt must be in (0, 1/(10 omega0)]");
  }
  const double w2 = p.omega0 * p.omega0;
  const double damping = 2.0 * p.zeta * p.omega0;
  auto deriv = [&](double x, double v) {
    const double xdot = p.saturate ? std::clamp(v, -p.rate_limit, p.rate_limit) : v;
    return std::pair{xdot, w2 * (command - x) - damping * v};
  };

  const double x0 = state.position;
  const double v0 = state.velocity;
  const auto [k1x, k1v] = deriv(x0, v0);
  const auto [k2x, k2v] = deriv(x0 + 0.5 * dt * k1x, v0 + 0.5 * dt * k1v);
  const auto [k3x, k3v] = deriv(x0 + 0.5 * dt * k2x, v0 + 0.5 * dt * k2v);
  const auto [k4x, k4v] = deriv(x0 + dt * k3x, v0 + dt * k3v);

  ActuatorState next;
  next.position = x0 + dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
  next.velocity = v0 + dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);

  StepReport local;
  if (p.saturate) {
    if (std::abs(next.velocity) > p.rate_limit) {
      next.velocity = std::copysign(p.rate_limit, next.velocity);
      local.rate_clamped = true;
    }
    if (next.position > p.upper) {
      local.excess = next.position - p.upper;
      local.position_clamped = true;
      next.position = p.upper;
      next.velocity = std::min(next.velocity, 0.0);
    } else if (next.position < p.lower) {
      local.excess = p.lower - next.position;
      local.position_clamped = true;
      next.position = p.lower;
      next.velocity = std::max(next.velocity, 0.0);
    }
  }
  if (report != nullptr) *report = local;
  return next;
}

namespace {

// Maneuver shape constants. Roll and yaw are moment coefficients; the pitch
// trim corresponds to the 5 g turn and dips by 2/5 towards 3 g.
constexpr double kPitchTrim = 0.12;
constexpr double kPitchDip = 0.4;
constexpr double kRollPeak = 0.1235;
constexpr double kYawTrim = 0.004;
constexpr double kRollStart = 0.5;
constexpr double kRollEnd = 3.5;
constexpr double kRollRise = 0.3;
constexpr double kRollFall = 1.0;
constexpr double kDipStart = 1.0;
constexpr double kDipEnd = 4.0;

double smoothstep(double s) {
  s = std::clamp(s, 0.0, 1.0);
  return s * s * (3.0 - 2.0 * s);
}

// 0 before start, 1 on the plateau, 0 after end.
double window(double t, double start, double end, double rise, double fall) {
  return smoothstep((t - start) / rise) * (1.0 - smoothstep((t - (end - fall)) / fall));
}

}  // namespace

Maneuver synth_maneuver(double duration, double rate_hz) {
  if (!(duration > 0.0)) throw InputError("maneuver: duration must be positive");
  if (!(rate_hz > 0.0)) throw InputError("maneuver: rate must be positive");
  const auto count = static_cast<long>(std::floor(duration * rate_hz + 1e-9)) + 1;
  Maneuver out;
  out.reserve(static_cast<std::size_t>(count));
  for (long k = 0; k < count; ++k) {
    const double t = static_cast<double>(k) / rate_hz;
    const double roll = window(t, kRollStart, kRollEnd, kRollRise, kRollFall);
    const double dip = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi *
                                            std::clamp((t - kDipStart) / (kDipEnd - kDipStart), 0.0, 1.0));
    const double turn = 2.0 * smoothstep((t - kRollStart) / (kRollEnd - kRollStart)) - 1.0;
    ManeuverSample s;
    s.t = t;
    s.tau_cmd = Vec3(kRollPeak * roll, kPitchTrim * (1.0 - kPitchDip * dip), kYawTrim * turn);
    out.push_back(s);
  }
  return out;
}

Maneuver read_maneuver(std::istream& is) {
  const CsvTable table = read_csv(is);
  const int ct = table.column("t");
  const int cl = table.column("cl");
  const int cm = table.column("cm");
  const int cn = table.column("cn");
  if (ct < 0 || cl < 0 || cm < 0 || cn < 0) {
    throw InputError("maneuver: header must contain t,cl,cm,cn");
  }
  Maneuver out;
  for (const auto& row : table.rows) {
    ManeuverSample s;
    s.t = row[ct];
    s.tau_cmd = Vec3(row[cl], row[cm], row[cn]);
    if (!out.empty() && !(s.t > out.back().t)) {
      throw InputError("maneuver: time stamps must be strictly increasing");
    }
    out.push_back(s);
  }
  return out;
}

Maneuver read_maneuver_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open maneuver file " + path.string());
  return read_maneuver(in);
}

void write_maneuver(std::ostream& os, const Maneuver& maneuver) {
  CsvTable table;
  table.header = {"t", "cl", "cm", "cn"};
  for (const auto& s : maneuver) table.rows.push_back({s.t, s.tau_cmd.x(), s.tau_cmd.y(), s.tau_cmd.z()});
  write_csv(os, table);
}

TimeSeries run_experiment(const AircraftModel& model, const std::vector<ActuatorParams>& actuators,
                          const Maneuver& maneuver, AmsMode mode,
                          const ExperimentOptions& options) {
  if (maneuver.empty()) throw InputError("experiment: maneuver is empty");
  const int m = model.actuators();
  if (static_cast<int>(actuators.size()) != m) {
    throw InputError("experiment: " + std::to_string(actuators.size()) +
                     " actuators for a model with " + std::to_string(m));
  }
  for (const auto& a : actuators) a.validate();

  Allocator allocator(model, mode, options.precompute);
  // Start trimmed: every actuator at rest on the first allocated position.
  std::vector<ActuatorState> states(static_cast<std::size_t>(m));
  {
    const VecX u0 = allocator.allocate(maneuver.front().tau_cmd).u;
    for (int j = 0; j < m; ++j) states[j].position = u0[j];
    allocator.reset_warm_start();
  }

  TimeSeries ts;
  ts.clamp_events.assign(static_cast<std::size_t>(m), 0);
  ts.max_clamp_excess.assign(static_cast<std::size_t>(m), 0.0);
  ts.max_abs_rate.assign(static_cast<std::size_t>(m), 0.0);

  for (std::size_t k = 0; k < maneuver.size(); ++k) {
    const ManeuverSample& s = maneuver[k];
    const auto start = std::chrono::steady_clock::now();
    AllocationResult res;
    try {
      res = allocator.allocate(s.tau_cmd);
    } catch (const QpInfeasibleError& e) {
      std::string msg = "t = " + format_double(s.t) + ": " + e.what();
      if (mode == AmsMode::rate_paper) {
        msg += " (the rate_paper AMS admits moments that position and rate limits cannot "
               "realize jointly; rate_exact avoids this)";
      }
      throw QpInfeasibleError(msg);
    }
    const auto stop = std::chrono::steady_clock::now();

    VecX act(m);
    for (int j = 0; j < m; ++j) {
      act[j] = states[j].position;
      ts.max_position_violation =
          std::max({ts.max_position_violation, act[j] - actuators[j].upper,
                    actuators[j].lower - act[j]});
    }

    ts.t.push_back(s.t);
    ts.tau_cmd.push_back(s.tau_cmd);
    ts.u.push_back(res.u);
    ts.u_act.push_back(act);
    ts.tau_realized.emplace_back(model.B * act);
    ts.tau_allocated.push_back(res.tau_achieved);
    ts.clip_scale.push_back(res.clip.scale);
    ts.clipped.push_back(res.clip.was_clipped);
    ts.solve_seconds.push_back(std::chrono::duration<double>(stop - start).count());
    if (options.compare_erpi) {
      const BaselineResult erpi = erpi_allocate(model, s.tau_cmd);
      ts.u_erpi.push_back(erpi.u);
      ts.erpi_scale.push_back(erpi.scale_applied);
    }

    if (k + 1 == maneuver.size()) break;
    const double span = maneuver[k + 1].t - s.t;
    const auto steps = std::max<long>(1, static_cast<long>(std::ceil(span / options.dt - 1e-9)));
    const double h = span / static_cast<double>(steps);
    for (long n = 0; n < steps; ++n) {
      for (int j = 0; j < m; ++j) {
        StepReport report;
        const ActuatorState next = actuator_step(states[j], actuators[j], res.u[j], h, &report);
        ts.max_abs_rate[j] =
            std::max(ts.max_abs_rate[j], std::abs(next.position - states[j].position) / h);
        if (report.position_clamped && report.excess > kClampEventTolerance) {
          ++ts.clamp_events[j];
          ts.max_clamp_excess[j] = std::max(ts.max_clamp_excess[j], report.excess);
        }
        states[j] = next;
      }
    }
  }
  return ts;
}

double total_variation(const std::vector<VecX>& series) {
  double tv = 0.0;
  for (std::size_t k = 1; k < series.size(); ++k) tv += (series[k] - series[k - 1]).lpNorm<1>();
  return tv;
}

}  // namespace cca
