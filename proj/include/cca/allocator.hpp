#pragma once

// Constrained control allocation with direction-preserving clipping.
//
// A commanded moment outside the attainable moment set (AMS) is scaled along
// its own direction onto the AMS boundary, which makes the allocation QP
// feasible without slack variables:
//
//   position only:  min u'Ru          s.t. B u = tau, lower <= u <= upper
//   rate modes:     min u'(R + A'R_rate A)u
//                                     s.t. B u = tau, box(u), box(A u)
//
// The rate problem is the stacked [u; u_dot] problem with u_dot = A u
// substituted out.

#include "cca/polytope.hpp"
#include "cca/qp.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cca {

struct AircraftModel {
  MatX B;  // 3 x m, moment coefficients per degree
  BoxLimits position_limits;  // deg
  BoxLimits rate_limits;      // deg/s
  MatX A;                     // m x m, 1/s
  MatX R;                     // m x m weighting on u
  MatX R_rate;                // m x m weighting on u_dot
  std::vector<std::string> names;

  int actuators() const { return static_cast<int>(B.cols()); }
  bool a_is_diagonal() const;
  // Throws InputError naming the first violated invariant.
  void validate() const;
};

enum class AmsMode { position_only, rate_paper, rate_exact };

std::string_view to_string(AmsMode mode);
// Throws InputError for unknown names.
AmsMode parse_mode(std::string_view name);
// rate_exact when A is diagonal, rate_paper otherwise.
AmsMode default_rate_mode(const AircraftModel& model);
bool uses_rates(AmsMode mode);

// Box U ∩ A^-1 U_dot for diagonal A. Throws InputError for non-diagonal A and
// GeometryError when the intersection is empty.
BoxLimits effective_position_limits(const AircraftModel& model);

struct Ams {
  AmsMode mode = AmsMode::position_only;
  PolytopeV hull;       // the set commands are clipped to
  PolytopeH halfspace;  // N tau <= 1 form of `hull`
  PolytopeV position_hull;               // conv(B V(U))
  std::optional<PolytopeV> rate_hull;    // conv(B A^-1 Z(U_dot)), rate modes only
};

// With `components` false, rate_exact skips the position and rate hulls,
// which only serve as diagnostics there; position_hull is then empty.
Ams build_ams(const AircraftModel& model, AmsMode mode,
              double rel_tol = kDefaultRelativeTolerance, bool components = true);

struct ClipResult {
  Vec3 tau = Vec3::Zero();
  double scale = 1.0;
  bool was_clipped = false;
  // Points of intersection that satisfy every facet inequality.
  std::vector<Vec3> candidates;
  // 1 / (N tau_cmd) per row; only filled when clipping happened.
  VecX scaling_vector;
  int facet = -1;  // row producing the chosen point, -1 when not clipped
};

ClipResult clip_to_ams(const Vec3& tau_cmd, const PolytopeH& h);

struct AllocationResult {
  VecX u;
  std::optional<VecX> u_dot;
  Vec3 tau_achieved = Vec3::Zero();
  std::vector<int> active_set;
  int iterations = 0;
  double kkt_residual = 0.0;
  ClipResult clip;
};

// Stateless allocation. Builds the AMS unless `precomputed` is supplied, in
// which case it must have been built from the same model and mode.
AllocationResult allocate(const AircraftModel& model, const Vec3& tau_cmd, AmsMode mode,
                          const Ams* precomputed = nullptr);

// Sequential allocation session: caches the AMS and seeds each QP with the
// previous sample's active set.
class Allocator {
 public:
  Allocator(AircraftModel model, AmsMode mode, bool precompute = true);

  AllocationResult allocate(const Vec3& tau_cmd);

  const AircraftModel& model() const { return model_; }
  AmsMode mode() const { return mode_; }
  // Throws when the session was created without precomputation.
  const Ams& ams() const;
  void reset_warm_start() { warm_start_.clear(); }

 private:
  AircraftModel model_;
  AmsMode mode_;
  std::optional<Ams> ams_;
  std::vector<int> warm_start_;
};

// QP data for one command; exposed for tests and diagnostics.
struct AllocationQp {
  MatX H;
  MatX Aeq;
  VecX beq;
  MatX Aineq;
  VecX bineq;
};

AllocationQp allocation_qp(const AircraftModel& model, const Vec3& tau, AmsMode mode);

}  // namespace cca
