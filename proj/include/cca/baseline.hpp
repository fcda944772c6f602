#pragma once

// Comparison allocators: the plain minimum-norm pseudo-inverse and a
// redistributed pseudo-inverse that scales the remaining moment demand so the
// achieved moment keeps the commanded direction.

#include "cca/allocator.hpp"

#include <vector>

namespace cca {

// Minimum-norm solution B'(BB')^-1 tau, no limits. Throws InputError when B
// lacks full row rank.
VecX pseudo_inverse_allocate(const MatX& B, const VecX& tau);

struct BaselineResult {
  VecX u;
  std::vector<int> saturated;  // frozen actuators, in freezing order
  double scale_applied = 1.0;  // achieved moment = scale_applied * tau_cmd
  bool rank_loss = false;      // stopped because the free columns lost rank
  int iterations = 0;
};

inline constexpr double kSaturationTolerance = 1e-9;

// Redistributed pseudo-inverse on the position limits of the model.
BaselineResult erpi_allocate(const AircraftModel& model, const Vec3& tau_cmd);
BaselineResult erpi_allocate(const MatX& B, const BoxLimits& limits, const Vec3& tau_cmd);

}  // namespace cca
