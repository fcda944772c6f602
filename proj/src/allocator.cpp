#include "cca/allocator.hpp"

#include "cca/io.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>

namespace cca {

bool AircraftModel::a_is_diagonal() const {
  const MatX off = A - MatX(A.diagonal().asDiagonal());
  return off.cwiseAbs().maxCoeff() == 0.0;
}

void AircraftModel::validate() const {
  const int m = actuators();
  if (B.rows() != 3) throw InputError("model: B must have 3 rows");
  if (m < 1) throw InputError("model: B has no columns");
  if (position_limits.size() != m) throw InputError("model: position limits do not match B");
  if (rate_limits.size() != m) throw InputError("model: rate limits do not match B");
  if (A.rows() != m || A.cols() != m) throw InputError("model: A must be m x m");
  if (R.rows() != m || R.cols() != m) throw InputError("model: R must be m x m");
  if (R_rate.rows() != m || R_rate.cols() != m) throw InputError("model: R_rate must be m x m");
  if (!names.empty() && static_cast<int>(names.size()) != m) {
    throw InputError("model: names do not match B");
  }

  Eigen::FullPivLU<MatX> lu_b(B);
  if (lu_b.rank() < 3) throw InputError("model: rank(B) < 3, the AMS has no interior");
  Eigen::FullPivLU<MatX> lu_a(A);
  if (!lu_a.isInvertible()) throw InputError("model: A is singular");
  for (const MatX* w : {&R, &R_rate}) {
    if ((*w - w->transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + w->cwiseAbs().maxCoeff())) {
      throw InputError("model: weighting matrix is not symmetric");
    }
    Eigen::LLT<MatX> llt(*w);
    if (llt.info() != Eigen::Success) {
      throw InputError("model: weighting matrix is not positive definite");
    }
  }
}

std::string_view to_string(AmsMode mode) {
  switch (mode) {
    case AmsMode::position_only: return "position_only";
    case AmsMode::rate_paper: return "rate_paper";
    case AmsMode::rate_exact: return "rate_exact";
  }
  return "?";
}

AmsMode parse_mode(std::string_view name) {
  if (name == "position_only") return AmsMode::position_only;
  if (name == "rate_paper") return AmsMode::rate_paper;
  if (name == "rate_exact") return AmsMode::rate_exact;
  throw InputError("unknown mode '" + std::string(name) +
                   "' (expected position_only, rate_paper or rate_exact)");
}

AmsMode default_rate_mode(const AircraftModel& model) {
  if (model.a_is_diagonal()) return AmsMode::rate_exact;
  std::cerr << "warning: A is not diagonal; using rate_paper, whose AMS may admit "
               "commands the joint limits cannot realize\n";
  return AmsMode::rate_paper;
}

bool uses_rates(AmsMode mode) { return mode != AmsMode::position_only; }

BoxLimits effective_position_limits(const AircraftModel& model) {
  if (!model.a_is_diagonal()) {
    throw InputError("unsupported: exact mode requires diagonal A");
  }
  const int m = model.actuators();
  VecX lo(m);
  VecX hi(m);
  for (int j = 0; j < m; ++j) {
    const double a = model.A(j, j);
    const double r1 = model.rate_limits.lower[j] / a;
    const double r2 = model.rate_limits.upper[j] / a;
    lo[j] = std::max(model.position_limits.lower[j], std::min(r1, r2));
    hi[j] = std::min(model.position_limits.upper[j], std::max(r1, r2));
    if (!(lo[j] < hi[j])) {
      throw GeometryError("rate and position limits of actuator " + std::to_string(j) +
                          " leave no feasible interval");
    }
  }
  return BoxLimits(lo, hi);
}

Ams build_ams(const AircraftModel& model, AmsMode mode, double rel_tol, bool components) {
  Ams ams;
  ams.mode = mode;
  if (mode == AmsMode::rate_exact && !components) {
    ams.hull = convex_hull_3d(
        map_vertices(enumerate_vertices(effective_position_limits(model)), model.B), rel_tol);
    ams.halfspace = to_halfspace(ams.hull, rel_tol);
    return ams;
  }
  ams.position_hull =
      convex_hull_3d(map_vertices(enumerate_vertices(model.position_limits), model.B), rel_tol);

  switch (mode) {
    case AmsMode::position_only:
      ams.hull = ams.position_hull;
      break;
    case AmsMode::rate_paper: {
      const MatX transform = model.B * model.A.inverse();
      ams.rate_hull = convex_hull_3d(
          map_vertices(enumerate_vertices(model.rate_limits), transform), rel_tol);
      ams.hull = intersect(ams.position_hull, *ams.rate_hull, rel_tol);
      break;
    }
    case AmsMode::rate_exact: {
      const BoxLimits box = effective_position_limits(model);
      const MatX transform = model.B * model.A.inverse();
      ams.rate_hull = convex_hull_3d(
          map_vertices(enumerate_vertices(model.rate_limits), transform), rel_tol);
      ams.hull = convex_hull_3d(map_vertices(enumerate_vertices(box), model.B), rel_tol);
      break;
    }
  }
  ams.halfspace = to_halfspace(ams.hull, rel_tol);
  return ams;
}

ClipResult clip_to_ams(const Vec3& tau_cmd, const PolytopeH& h) {
  if (!tau_cmd.allFinite()) throw InputError("clip: commanded moment is not finite");
  ClipResult out;
  const VecX products = h.normals * tau_cmd;
  const double worst = products.size() > 0 ? products.maxCoeff() : 0.0;
  if (worst <= 1.0 + h.tolerance) {
    out.tau = tau_cmd;
    return out;
  }

  // Scale per facet plane; rows facing away from the command have no crossing
  // on the positive ray.
  const int k = static_cast<int>(products.size());
  out.scaling_vector.resize(k);
  for (int i = 0; i < k; ++i) {
    out.scaling_vector[i] = products[i] > 0.0 ? 1.0 / products[i]
                                              : std::numeric_limits<double>::quiet_NaN();
  }

  // A candidate r_i tau_cmd satisfies N x <= 1 iff r_i * max(N tau_cmd) <= 1.
  double best_dist = std::numeric_limits<double>::infinity();
  const double tie = h.tolerance * tau_cmd.norm();
  for (int i = 0; i < k; ++i) {
    if (!(products[i] > 0.0)) continue;
    const double r = out.scaling_vector[i];
    if (r * worst > 1.0 + h.tolerance) continue;
    const Vec3 candidate = r * tau_cmd;
    out.candidates.push_back(candidate);
    const double dist = (tau_cmd - candidate).norm();
    if (dist < best_dist - tie) {
      best_dist = dist;
      out.facet = i;
    }
  }
  if (out.facet < 0) {
    throw NumericalError("clip: no point of intersection found; AMS does not contain the origin");
  }
  out.scale = out.scaling_vector[out.facet];
  out.tau = out.scale * tau_cmd;
  out.was_clipped = true;
  return out;
}

AllocationQp allocation_qp(const AircraftModel& model, const Vec3& tau, AmsMode mode) {
  const int m = model.actuators();
  AllocationQp qp;
  qp.Aeq = model.B;
  qp.beq = tau;
  const MatX I = MatX::Identity(m, m);
  if (!uses_rates(mode)) {
    qp.H = model.R;
    qp.Aineq.resize(2 * m, m);
    qp.Aineq << I, -I;
    qp.bineq.resize(2 * m);
    qp.bineq << model.position_limits.upper, -model.position_limits.lower;
  } else {
    qp.H = model.R + model.A.transpose() * model.R_rate * model.A;
    qp.Aineq.resize(4 * m, m);
    qp.Aineq << I, -I, model.A, -model.A;
    qp.bineq.resize(4 * m);
    qp.bineq << model.position_limits.upper, -model.position_limits.lower,
        model.rate_limits.upper, -model.rate_limits.lower;
  }
  return qp;
}

namespace {

AllocationResult solve_clipped(const AircraftModel& model, const Vec3& tau_cmd, AmsMode mode,
                               const Ams& ams, std::vector<int>* warm_start) {
  AllocationResult out;
  out.clip = clip_to_ams(tau_cmd, ams.halfspace);
  const AllocationQp qp = allocation_qp(model, out.clip.tau, mode);
  QpOptions options;
  if (warm_start != nullptr) options.warm_start = *warm_start;
  const QpResult sol = qp_solve(qp.H, qp.Aeq, qp.beq, qp.Aineq, qp.bineq, options);
  if (warm_start != nullptr) *warm_start = sol.active_set;
  out.u = sol.x;
  if (uses_rates(mode)) out.u_dot = VecX(model.A * sol.x);
  out.tau_achieved = model.B * sol.x;
  out.active_set = sol.active_set;
  out.iterations = sol.iterations;
  out.kkt_residual = sol.kkt_residual;
  return out;
}

}  // namespace

AllocationResult allocate(const AircraftModel& model, const Vec3& tau_cmd, AmsMode mode,
                          const Ams* precomputed) {
  if (precomputed != nullptr) return solve_clipped(model, tau_cmd, mode, *precomputed, nullptr);
  const Ams ams = build_ams(model, mode, kDefaultRelativeTolerance, false);
  return solve_clipped(model, tau_cmd, mode, ams, nullptr);
}

Allocator::Allocator(AircraftModel model, AmsMode mode, bool precompute)
    : model_(std::move(model)), mode_(mode) {
  model_.validate();
  if (precompute) ams_ = build_ams(model_, mode_);
}

const Ams& Allocator::ams() const {
  if (!ams_) throw Error("allocator: AMS was not precomputed");
  return *ams_;
}

AllocationResult Allocator::allocate(const Vec3& tau_cmd) {
  if (ams_) return solve_clipped(model_, tau_cmd, mode_, *ams_, &warm_start_);
  const Ams fresh = build_ams(model_, mode_, kDefaultRelativeTolerance, false);
  return solve_clipped(model_, tau_cmd, mode_, fresh, &warm_start_);
}

}  // namespace cca
