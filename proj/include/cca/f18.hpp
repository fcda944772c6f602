#pragma once

// F-18 case-study data: effectiveness matrix, limits, first-order rate
// dynamics and second-order actuator parameters for seven control surfaces
// ordered tail_l, tail_r, flap_l, flap_r, ail_l, ail_r, rudder.

#include "cca/actuator_sim.hpp"

#include <vector>

namespace cca {

// A = -2 I (7 x 7); the source lists eight diagonal entries for seven
// actuators and the extra entry is dropped.
AircraftModel f18_model();

std::vector<ActuatorParams> f18_actuators();

}  // namespace cca
