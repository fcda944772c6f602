#include "cca/allocator.hpp"
#include "cca/f18.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <random>

using namespace cca;

namespace {

PolytopeH unit_cube() {
  std::vector<Vec3> pts;
  for (int i = 0; i < 8; ++i) pts.emplace_back(i & 1 ? 1 : -1, i & 2 ? 1 : -1, i & 4 ? 1 : -1);
  return to_halfspace(convex_hull_3d(pts));
}

Vec3 random_direction(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Vec3 d(g(rng), g(rng), g(rng));
  return d.normalized();
}

// Small random model with a diagonal, invertible A and rate limits tight
// enough to bind.
AircraftModel random_model(std::mt19937_64& rng, int m) {
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> uni(0.5, 2.0);
  AircraftModel model;
  model.B.resize(3, m);
  for (int i = 0; i < model.B.size(); ++i) model.B.data()[i] = g(rng);
  VecX lo(m), hi(m), rlo(m), rhi(m);
  VecX a(m);
  for (int j = 0; j < m; ++j) {
    lo[j] = -uni(rng);
    hi[j] = uni(rng);
    a[j] = (j % 2 ? 1.0 : -1.0) * uni(rng);
    rlo[j] = -uni(rng);
    rhi[j] = uni(rng);
  }
  model.position_limits = BoxLimits(lo, hi);
  model.rate_limits = BoxLimits(rlo, rhi);
  model.A = a.asDiagonal();
  model.R = MatX::Identity(m, m);
  model.R_rate = MatX::Identity(m, m);
  model.validate();
  return model;
}

}  // namespace

TEST_SUITE("allocator") {

TEST_CASE("clip on the unit cube") {
  const PolytopeH h = unit_cube();
  ClipResult r = clip_to_ams(Vec3(2, 0, 0), h);
  CHECK(r.was_clipped);
  CHECK(r.scale == doctest::Approx(0.5));
  CHECK((r.tau - Vec3(1, 0, 0)).norm() <= 1e-15);
  CHECK(r.scaling_vector.size() == h.rows());
  CHECK_FALSE(r.candidates.empty());

  r = clip_to_ams(Vec3(-3, 0, 0), h);
  CHECK(r.scale == doctest::Approx(1.0 / 3.0));
  CHECK((r.tau - Vec3(-1, 0, 0)).norm() <= 1e-15);

  r = clip_to_ams(Vec3(0.2, 0.1, 0), h);
  CHECK_FALSE(r.was_clipped);
  CHECK(r.scale == 1.0);
  CHECK(r.tau == Vec3(0.2, 0.1, 0));
  CHECK(r.facet == -1);
}

TEST_CASE("edge exits pick the lowest facet index") {
  const PolytopeH h = unit_cube();
  const Vec3 cmd(2, 2, 0);
  const ClipResult r = clip_to_ams(cmd, h);
  const VecX prod = h.normals * cmd;
  int lowest = -1;
  for (int i = 0; i < prod.size(); ++i) {
    if (std::abs(prod[i] - prod.maxCoeff()) <= 1e-12) {
      lowest = i;
      break;
    }
  }
  CHECK(r.facet == lowest);
  CHECK((r.tau - Vec3(1, 1, 0)).norm() <= 1e-15);
  CHECK(r.candidates.size() >= 2);
}

TEST_CASE("non-finite command is rejected") {
  CHECK_THROWS_AS(clip_to_ams(Vec3(std::nan(""), 0, 0), unit_cube()), InputError);
}

TEST_CASE("clip properties on the F-18 AMS") {
  const Ams ams = build_ams(f18_model(), AmsMode::position_only);
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> mag(0.05, 2.0);
  for (int trial = 0; trial < 2000; ++trial) {
    const Vec3 cmd = mag(rng) * random_direction(rng);
    const ClipResult r = clip_to_ams(cmd, ams.halfspace);
    CHECK(r.scale > 0.0);
    CHECK(r.scale <= 1.0);
    CHECK(r.tau.cross(cmd).norm() <= 1e-12 * cmd.squaredNorm());
    CHECK(contains(ams.halfspace, r.tau));
    if (r.was_clipped) {
      CHECK(max_row_product(ams.halfspace, r.tau) == doctest::Approx(1.0).epsilon(1e-9));
      const ClipResult again = clip_to_ams(r.tau, ams.halfspace);
      CHECK_FALSE(again.was_clipped);
      CHECK(again.tau == r.tau);
      const ClipResult bigger = clip_to_ams(3.7 * cmd, ams.halfspace);
      CHECK((bigger.tau - r.tau).norm() <= 1e-12 * r.tau.norm());
    }
  }
}

TEST_CASE("interior command reduces to the minimum-norm solution") {
  const AircraftModel model = f18_model();
  const Vec3 tau(0, 0.05, 0);
  const AllocationResult r = allocate(model, tau, AmsMode::position_only);
  CHECK_FALSE(r.clip.was_clipped);
  CHECK(r.active_set.empty());
  CHECK((r.u - oracle::min_norm_svd(model.B, tau)).cwiseAbs().maxCoeff() <= 1e-8);
  CHECK_FALSE(r.u_dot.has_value());
}

TEST_CASE("far exterior command is clipped, colinear and saturating") {
  const AircraftModel model = f18_model();
  const Vec3 tau(0, 0.5, 0);
  const AllocationResult r = allocate(model, tau, AmsMode::position_only);
  CHECK(r.clip.was_clipped);
  CHECK(r.tau_achieved.cross(tau).norm() <= 1e-10 * tau.squaredNorm());
  CHECK(r.tau_achieved.dot(tau) > 0.0);
  CHECK((r.tau_achieved - r.clip.tau).cwiseAbs().maxCoeff() <= 1e-8);
  CHECK_FALSE(r.active_set.empty());
  bool at_bound = false;
  for (int j = 0; j < 7; ++j) {
    at_bound |= std::abs(r.u[j] - model.position_limits.upper[j]) <= 1e-9 ||
                std::abs(r.u[j] - model.position_limits.lower[j]) <= 1e-9;
  }
  CHECK(at_bound);
  CHECK(model.position_limits.contains(r.u, 1e-9));
}

TEST_CASE("zero command allocates zero") {
  const AircraftModel model = f18_model();
  for (AmsMode mode : {AmsMode::position_only, AmsMode::rate_exact}) {
    const AllocationResult r = allocate(model, Vec3::Zero(), mode);
    CHECK(r.u.norm() == 0.0);
    if (uses_rates(mode)) {
      REQUIRE(r.u_dot.has_value());
      CHECK(r.u_dot->norm() == 0.0);
    }
  }
}

TEST_CASE("rate_exact uses the shrunk box; tail bounds are [-20, 10.5]") {
  const AircraftModel model = f18_model();
  const BoxLimits box = effective_position_limits(model);
  CHECK(box.lower[0] == -20.0);
  CHECK(box.upper[0] == 10.5);
  CHECK(box.lower[1] == -20.0);
  for (int j = 0; j < 7; ++j) {
    CHECK(box.lower[j] == std::max(model.position_limits.lower[j], -model.rate_limits.upper[j] / 2));
    CHECK(box.upper[j] == std::min(model.position_limits.upper[j], model.rate_limits.upper[j] / 2));
  }
  const Ams ams = build_ams(model, AmsMode::rate_exact);
  const PolytopeV direct = convex_hull_3d(map_vertices(enumerate_vertices(box), model.B));
  CHECK(same_vertex_set(ams.hull.vertices, direct.vertices, 1e-12));
  const PolytopeH pos = to_halfspace(ams.position_hull);
  for (const auto& v : ams.hull.vertices) CHECK(contains(pos, v));
}

TEST_CASE("huge rate limits make rate_paper equal position_only") {
  AircraftModel model = f18_model();
  model.rate_limits = BoxLimits(VecX::Constant(7, -1e4), VecX::Constant(7, 1e4));
  const Ams intersected = build_ams(model, AmsMode::rate_paper);
  const Ams position = build_ams(model, AmsMode::position_only);
  CHECK(intersected.hull.vertices.size() == position.hull.vertices.size());
  CHECK(same_vertex_set(intersected.hull.vertices, position.hull.vertices, 1e-12));
}

TEST_CASE("rate_paper AMS contains the rate_exact AMS") {
  const AircraftModel model = f18_model();
  const PolytopeH intersected = build_ams(model, AmsMode::rate_paper).halfspace;
  for (const auto& v : build_ams(model, AmsMode::rate_exact).hull.vertices) CHECK(contains(intersected, v));
}

TEST_CASE("non-diagonal A: exact mode unsupported, default falls back") {
  AircraftModel model = f18_model();
  model.A(0, 1) = 0.3;
  try {
    build_ams(model, AmsMode::rate_exact);
    FAIL("expected InputError");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("unsupported: exact mode requires diagonal A") != std::string::npos);
  }
  CHECK(default_rate_mode(model) == AmsMode::rate_paper);
  CHECK(default_rate_mode(f18_model()) == AmsMode::rate_exact);
}

TEST_CASE("mode names round-trip") {
  for (AmsMode m : {AmsMode::position_only, AmsMode::rate_paper, AmsMode::rate_exact}) {
    CHECK(parse_mode(to_string(m)) == m);
  }
  CHECK_THROWS_AS(parse_mode("rates"), InputError);
}

TEST_CASE("model validation") {
  AircraftModel model = f18_model();
  model.A = MatX::Zero(7, 7);
  CHECK_THROWS_AS(model.validate(), InputError);
  model = f18_model();
  model.B.row(2) = model.B.row(0);
  CHECK_THROWS_AS(model.validate(), InputError);
  model = f18_model();
  model.R(0, 0) = -1.0;
  CHECK_THROWS_AS(model.validate(), InputError);
}

TEST_CASE("reduced rate problem equals the stacked problem in u and u_dot") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    const int m = 3 + trial % 3;
    const AircraftModel model = random_model(rng, m);
    const Ams ams = build_ams(model, AmsMode::rate_exact);
    const Vec3 tau = 2.0 * random_direction(rng);
    const AllocationResult red = allocate(model, tau, AmsMode::rate_exact, &ams);

    // Variables [u; u_dot]: B u = tau, A u - u_dot = 0, both boxes.
    const MatX I = MatX::Identity(m, m);
    MatX H = MatX::Zero(2 * m, 2 * m);
    H.topLeftCorner(m, m) = model.R;
    H.bottomRightCorner(m, m) = model.R_rate;
    MatX Aeq = MatX::Zero(3 + m, 2 * m);
    Aeq.topLeftCorner(3, m) = model.B;
    Aeq.bottomLeftCorner(m, m) = model.A;
    Aeq.bottomRightCorner(m, m) = -I;
    VecX beq = VecX::Zero(3 + m);
    beq.head(3) = red.clip.tau;
    MatX Aineq = MatX::Zero(4 * m, 2 * m);
    Aineq.block(0, 0, m, m) = I;
    Aineq.block(m, 0, m, m) = -I;
    Aineq.block(2 * m, m, m, m) = I;
    Aineq.block(3 * m, m, m, m) = -I;
    VecX bineq(4 * m);
    bineq << model.position_limits.upper, -model.position_limits.lower, model.rate_limits.upper,
        -model.rate_limits.lower;
    const QpResult full = qp_solve(H, Aeq, beq, Aineq, bineq);
    CHECK((full.x.head(m) - red.u).cwiseAbs().maxCoeff() <= 1e-8);
    CHECK((full.x.tail(m) - *red.u_dot).cwiseAbs().maxCoeff() <= 1e-8);

    // Rate feasibility of the reduced answer.
    const VecX udot = model.A * red.u;
    CHECK((udot - model.rate_limits.upper).maxCoeff() <= 1e-9);
    CHECK((model.rate_limits.lower - udot).maxCoeff() <= 1e-9);
    CHECK(model.position_limits.contains(red.u, 1e-9));
    CHECK((model.B * red.u - red.clip.tau).cwiseAbs().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("allocation QP matches active-set enumeration on small models") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 30; ++trial) {
    const AircraftModel model = random_model(rng, 3 + trial % 2);
    const Vec3 tau = 1.5 * random_direction(rng);
    for (AmsMode mode : {AmsMode::position_only, AmsMode::rate_exact}) {
      const AllocationResult r = allocate(model, tau, mode);
      const AllocationQp qp = allocation_qp(model, r.clip.tau, mode);
      const auto ref = oracle::brute_force_qp(qp.H, qp.Aeq, qp.beq, qp.Aineq, qp.bineq);
      REQUIRE(ref.feasible);
      CHECK(std::abs(0.5 * r.u.dot(qp.H * r.u) - ref.objective) <= 1e-8);
    }
  }
}

TEST_CASE("session with warm start matches stateless allocation") {
  const AircraftModel model = f18_model();
  Allocator session(model, AmsMode::rate_exact);
  const Ams ams = build_ams(model, AmsMode::rate_exact);
  std::mt19937_64 rng(5);
  Vec3 tau(0.0, 0.1, 0.0);
  for (int k = 0; k < 300; ++k) {
    tau += 0.01 * random_direction(rng);
    const AllocationResult a = session.allocate(tau);
    const AllocationResult b = allocate(model, tau, AmsMode::rate_exact, &ams);
    CHECK((a.u - b.u).cwiseAbs().maxCoeff() <= 1e-9);
  }
  Allocator lazy(model, AmsMode::position_only, false);
  CHECK_THROWS_AS(lazy.ams(), Error);
  CHECK((lazy.allocate(tau).u - allocate(model, tau, AmsMode::position_only).u).norm() <= 1e-9);
}

}  // TEST_SUITE
