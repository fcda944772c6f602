#include "cca/f18.hpp"

namespace cca {

AircraftModel f18_model() {
  AircraftModel model;
  model.names = {"tail_l", "tail_r", "flap_l", "flap_r", "ail_l", "ail_r", "rudder"};
  model.B.resize(3, 7);
  model.B << 23.8, -23.8, 123.0, -123.0, 41.8, -41.8, 3.6,
      -698.0, -698.0, 99.4, 99.4, -55.2, -55.2, 0.0,
      -30.9, 30.9, 0.0, 0.0, -17.4, 17.4, -56.2;
  model.B *= 1e-5;

  VecX pos_upper(7), pos_lower(7), rate_upper(7);
  pos_upper << 10.5, 10.5, 45.0, 45.0, 42.0, 42.0, 30.0;
  pos_lower << -24.0, -24.0, -8.0, -8.0, -25.0, -25.0, -30.0;
  rate_upper << 40.0, 40.0, 18.0, 18.0, 100.0, 100.0, 82.0;
  model.position_limits = BoxLimits(pos_lower, pos_upper);
  model.rate_limits = BoxLimits(-rate_upper, rate_upper);

  model.A = -2.0 * MatX::Identity(7, 7);
  model.R = MatX::Identity(7, 7);
  model.R_rate = MatX::Identity(7, 7);
  return model;
}

std::vector<ActuatorParams> f18_actuators() {
  const AircraftModel model = f18_model();
  // omega0 [rad/s], zeta per surface type.
  const double tail[2] = {30.74, 0.509};
  const double rudder[2] = {72.1, 0.69};
  const double aileron[2] = {75.0, 0.59};
  const double flap[2] = {35.0, 0.71};
  const double* kind[7] = {tail, tail, flap, flap, aileron, aileron, rudder};

  std::vector<ActuatorParams> out;
  for (int j = 0; j < 7; ++j) {
    ActuatorParams p;
    p.name = model.names[j];
    p.omega0 = kind[j][0];
    p.zeta = kind[j][1];
    p.lower = model.position_limits.lower[j];
    p.upper = model.position_limits.upper[j];
    p.rate_limit = model.rate_limits.upper[j];
    out.push_back(p);
  }
  return out;
}

}  // namespace cca
