// Acceptance run: one PASS or FAIL line per criterion, with the measured
// numbers on the same line. Exit status is nonzero when any criterion fails.

#include "cca/baseline.hpp"
#include "cca/f18.hpp"
#include "cli.hpp"
#include "oracles.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

using namespace cca;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

void report(int id, const char* title, bool ok, const std::string& detail) {
  std::printf("[%s] %d. %s: %s\n", ok ? "PASS" : "FAIL", id, title, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

void criterion_ams_geometry() {
  const auto t0 = Clock::now();
  const AircraftModel model = f18_model();
  const auto corners = enumerate_vertices(model.position_limits);
  const auto images = map_vertices(corners, model.B);
  const PolytopeV hull = convex_hull_3d(images);
  const PolytopeH h = to_halfspace(hull);
  const double seconds = since(t0);

  const auto expected = oracle::corner_sum_extents(model.B, model.position_limits.lower,
                                                   model.position_limits.upper);
  const double extent_err = (extents(hull) - expected).cwiseAbs().maxCoeff();
  bool contained = true;
  for (const auto& p : images) contained &= contains(h, p);
  // Every facet plane touches the hull: max over vertices of each row is 1.
  double row_gap = 0.0;
  for (int i = 0; i < h.rows(); ++i) {
    double best = -1e300;
    for (const auto& v : hull.vertices) best = std::max(best, h.normals.row(i).dot(v));
    row_gap = std::max(row_gap, std::abs(best - 1.0));
  }
  const int edges = static_cast<int>(3 * hull.facets.size() / 2);
  const int euler = static_cast<int>(hull.vertices.size()) - edges + static_cast<int>(hull.facets.size());

  const bool ok = extent_err <= 1e-12 && images.size() == 128 && euler == 2 &&
                  hull.euler_characteristic() == 2 && contained && row_gap <= 1e-9 && seconds < 1.0;
  std::ostringstream d;
  d << "max c_m " << expected(1, 1) << ", extent error " << extent_err << ", images " << images.size()
    << ", V-E+F = " << euler << " (V " << hull.vertices.size() << ", F " << hull.facets.size()
    << "), all images contained " << (contained ? "yes" : "no") << ", " << fmt("%.4f s", seconds);
  report(1, "F-18 AMS geometry", ok, d.str());
}

void criterion_direction_preservation() {
  const auto t0 = Clock::now();
  const Ams ams = build_ams(f18_model(), AmsMode::position_only);
  std::mt19937_64 rng(20240601);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> mag(1.0, 10.0);
  int tested = 0;
  int bad_scale = 0, bad_colinear = 0, bad_boundary = 0, bad_idempotent = 0;
  double worst_cross = 0.0;
  while (tested < 10000) {
    Vec3 d(g(rng), g(rng), g(rng));
    d.normalize();
    // Push each direction well outside the AMS.
    const double exit = 1.0 / max_row_product(ams.halfspace, d);
    const Vec3 cmd = exit * mag(rng) * d * 1.01;
    if (contains(ams.halfspace, cmd)) continue;
    ++tested;
    const ClipResult r = clip_to_ams(cmd, ams.halfspace);
    if (!(r.scale > 0.0 && r.scale <= 1.0) || !r.was_clipped) ++bad_scale;
    const double cross = r.tau.cross(cmd).norm();
    worst_cross = std::max(worst_cross, cross / r.scale);
    if (cross > 1e-9 * r.scale) ++bad_colinear;
    const double m = max_row_product(ams.halfspace, r.tau);
    if (m < 1.0 - 1e-6 || m > 1.0 + 1e-6) ++bad_boundary;
    const ClipResult again = clip_to_ams(r.tau, ams.halfspace);
    if (again.was_clipped || again.tau != r.tau) ++bad_idempotent;
  }
  const double seconds = since(t0);
  const bool ok = bad_scale == 0 && bad_colinear == 0 && bad_boundary == 0 && bad_idempotent == 0 &&
                  seconds < 5.0;
  std::ostringstream d;
  d << tested << " exterior commands; scale failures " << bad_scale << ", colinearity failures "
    << bad_colinear << " (worst |tau x cmd|/s " << worst_cross << "), boundary failures "
    << bad_boundary << ", idempotence failures " << bad_idempotent << ", " << fmt("%.3f s", seconds);
  report(2, "Direction preservation", ok, d.str());
}

void criterion_qp() {
  std::mt19937_64 rng(777);
  std::normal_distribution<double> g;
  int mismatches = 0, kkt_fail = 0, oracle_infeasible = 0;
  double worst_obj = 0.0, worst_kkt = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = std::uniform_int_distribution<int>(1, 5)(rng);
    const int p = std::uniform_int_distribution<int>(0, std::min(2, n - 1))(rng);
    const int q = std::uniform_int_distribution<int>(1, 6)(rng);
    MatX L(n, n);
    for (int i = 0; i < L.size(); ++i) L.data()[i] = g(rng);
    const MatX H = L * L.transpose() + 0.1 * MatX::Identity(n, n);
    VecX x0(n);
    for (int i = 0; i < n; ++i) x0[i] = g(rng);
    MatX Aeq(p, n), Aineq(q, n);
    for (int i = 0; i < Aeq.size(); ++i) Aeq.data()[i] = g(rng);
    for (int i = 0; i < Aineq.size(); ++i) Aineq.data()[i] = g(rng);
    const VecX beq = Aeq * x0;
    VecX bineq = Aineq * x0;
    for (int i = 0; i < q; ++i) bineq[i] += std::abs(g(rng));

    const auto ref = oracle::brute_force_qp(H, Aeq, beq, Aineq, bineq);
    if (!ref.feasible) {
      ++oracle_infeasible;
      continue;
    }
    const QpResult r = qp_solve(H, Aeq, beq, Aineq, bineq);
    const double diff = std::abs(0.5 * r.x.dot(H * r.x) - ref.objective);
    worst_obj = std::max(worst_obj, diff);
    worst_kkt = std::max(worst_kkt, r.kkt_residual);
    if (diff > 1e-8) ++mismatches;
    if (r.kkt_residual > 1e-8) ++kkt_fail;
  }
  const bool ok = mismatches == 0 && kkt_fail == 0 && oracle_infeasible == 0;
  std::ostringstream d;
  d << "1000 instances; worst objective difference " << worst_obj << ", worst KKT residual " << worst_kkt
    << ", mismatches " << mismatches << ", KKT failures " << kkt_fail;
  report(3, "QP correctness", ok, d.str());
}

void criterion_method_equivalence() {
  const AircraftModel model = f18_model();
  Allocator qp(model, AmsMode::position_only);
  const Maneuver man = synth_maneuver();
  int colinear_fail = 0, interior = 0, interior_fail = 0;
  double worst_cross = 0.0, worst_diff = 0.0;
  for (const auto& s : man) {
    const AllocationResult a = qp.allocate(s.tau_cmd);
    const BaselineResult b = erpi_allocate(model, s.tau_cmd);
    const Vec3 tb = model.B * b.u;
    const double n2 = s.tau_cmd.squaredNorm();
    for (const Vec3& t : {a.tau_achieved, tb}) {
      const double cross = t.cross(s.tau_cmd).norm();
      worst_cross = std::max(worst_cross, cross / n2);
      if (cross > 1e-9 * n2 || t.dot(s.tau_cmd) < 0.0) ++colinear_fail;
    }
    const bool qp_saturated = a.clip.was_clipped || !a.active_set.empty();
    const bool erpi_saturated = !b.saturated.empty() || b.scale_applied < 1.0;
    if (qp_saturated || erpi_saturated) continue;
    ++interior;
    const double diff = (a.u - b.u).cwiseAbs().maxCoeff();
    worst_diff = std::max(worst_diff, diff);
    if (diff > 1e-8) ++interior_fail;
  }
  const bool ok = colinear_fail == 0 && interior_fail == 0 && interior > 0;
  std::ostringstream d;
  d << man.size() << " samples; colinearity failures " << colinear_fail << " (worst cross/|tau|^2 "
    << worst_cross << "); " << interior << " unsaturated samples, worst |u_qp - u_erpi| " << worst_diff;
  report(4, "Method equivalence", ok, d.str());
}

void criterion_rate_limits() {
  const AircraftModel model = f18_model();
  const Ams exact = build_ams(model, AmsMode::rate_exact);
  // Shrunk box written out from the rate bounds: |-2 u| <= r means |u| <= r / 2.
  VecX lo(7), hi(7);
  for (int j = 0; j < 7; ++j) {
    lo[j] = std::max(model.position_limits.lower[j], -model.rate_limits.upper[j] / 2.0);
    hi[j] = std::min(model.position_limits.upper[j], model.rate_limits.upper[j] / 2.0);
  }
  const PolytopeV shrunk = convex_hull_3d(map_vertices(enumerate_vertices(BoxLimits(lo, hi)), model.B));
  const bool same = exact.hull.vertices.size() == shrunk.vertices.size() &&
                    same_vertex_set(exact.hull.vertices, shrunk.vertices, 1e-12);
  const BoxLimits eff = effective_position_limits(model);
  const bool tails = eff.lower[0] == -20.0 && eff.upper[0] == 10.5 && eff.lower[1] == -20.0 &&
                     eff.upper[1] == 10.5;
  const bool all = eff.lower == lo && eff.upper == hi;
  const bool ok = model.A.rows() == 7 && model.A.cols() == 7 && same && tails && all;
  std::ostringstream d;
  d << "A " << model.A.rows() << "x" << model.A.cols() << ", vertex sets match " << (same ? "yes" : "no")
    << " (" << exact.hull.vertices.size() << " vs " << shrunk.vertices.size() << "), left tail ["
    << eff.lower[0] << ", " << eff.upper[0] << "], all channels match " << (all ? "yes" : "no");
  report(5, "Rate-mode effective limits", ok, d.str());
}

void criterion_actuator() {
  ActuatorParams p = f18_actuators()[0];
  const double expected = std::exp(-p.zeta * std::numbers::pi / std::sqrt(1.0 - p.zeta * p.zeta));
  ActuatorState s;
  double peak = 0.0;
  for (int k = 0; k < 5000; ++k) {
    s = actuator_step(s, p, 1.0, 1e-4);
    peak = std::max(peak, s.position);
  }
  const double overshoot = peak - 1.0;
  const double rel = std::abs(overshoot - expected) / expected;

  s = {};
  double fastest = 0.0;
  const double dt = 1e-3;
  for (int k = 0; k < 2000; ++k) {
    const ActuatorState next = actuator_step(s, p, -20.0, dt);
    fastest = std::max(fastest, std::abs(next.position - s.position) / dt);
    s = next;
  }
  const bool ok = rel <= 0.01 && fastest <= 40.0 * 1.01;
  std::ostringstream d;
  d << "overshoot " << overshoot * 100 << "% vs analytic " << expected * 100 << "% (relative error "
    << rel * 100 << "%), max mean step velocity " << fastest << " deg/s";
  report(6, "Actuator fidelity", ok, d.str());
}

void criterion_actuator_study() {
  const AircraftModel model = f18_model();
  const auto acts = f18_actuators();
  const Maneuver man = synth_maneuver();
  const TimeSeries pos = run_experiment(model, acts, man, AmsMode::position_only);
  const TimeSeries rate = run_experiment(model, acts, man, AmsMode::rate_exact);

  int clamp_events = 0;
  for (int e : pos.clamp_events) clamp_events += e;
  const double tv_pos = total_variation(pos.u);
  const double tv_rate = total_variation(rate.u);

  double num = 0.0, den = 0.0;
  int samples = 0;
  for (std::size_t k = 0; k < pos.t.size(); ++k) {
    if (pos.clipped[k] || rate.clipped[k]) continue;
    num += (pos.tau_realized[k] - rate.tau_realized[k]).squaredNorm();
    den += pos.tau_realized[k].squaredNorm();
    ++samples;
  }
  const double rms = std::sqrt(num / den);

  const bool a = clamp_events >= 1;
  const bool b = rate.max_position_violation <= 1e-6;
  const bool c = tv_rate < tv_pos;
  const bool dd = rms <= 0.10;
  std::ostringstream d;
  d << "position-only clamp events " << clamp_events << (a ? " ok" : " FAIL")
    << "; rate_exact max violation " << rate.max_position_violation << " deg" << (b ? " ok" : " FAIL")
    << "; TV(u) " << tv_rate << " < " << tv_pos << (c ? " ok" : " FAIL") << "; realized-moment RMS "
    << rms * 100 << "% over " << samples << " unclipped samples" << (dd ? " ok" : " FAIL (limit 10%)");
  report(7, "Actuator-dynamics reproduction", a && b && c && dd, d.str());
}

void criterion_timing() {
  const auto t0 = Clock::now();
  const cli::BenchmarkResult bench =
      cli::benchmark(f18_model(), synth_maneuver(), AmsMode::rate_exact, 100);
  const double seconds = since(t0);
  const auto hp = cli::histogram(bench.precomputed);
  const auto hr = cli::histogram(bench.recomputed);
  const double mp = cli::mean(bench.precomputed);
  const double mr = cli::mean(bench.recomputed);
  const double maxp = *std::max_element(bench.precomputed.begin(), bench.precomputed.end());
  const double maxr = *std::max_element(bench.recomputed.begin(), bench.recomputed.end());
  long counted = 0;
  for (long c : hp) counted += c;
  const bool ok = mp < mr && std::isfinite(maxp) && std::isfinite(maxr) &&
                  counted == 100L * bench.samples && seconds < 60.0;
  std::ostringstream d;
  d << "mean precomputed " << fmt("%.2f", mp * 1e6) << " us < recomputed " << fmt("%.2f", mr * 1e6)
    << " us; max " << fmt("%.3f", maxp * 1e3) << " / " << fmt("%.3f", maxr * 1e3) << " ms; 1 ms buckets "
    << hp.size() << " / " << hr.size() << " over " << counted << " solves each; "
    << fmt("%.2f s", seconds);
  report(8, "Timing", ok, d.str());
}

}  // namespace

int main() {
  const std::pair<const char*, void (*)()> criteria[] = {
      {"F-18 AMS geometry", criterion_ams_geometry},
      {"Direction preservation", criterion_direction_preservation},
      {"QP correctness", criterion_qp},
      {"Method equivalence", criterion_method_equivalence},
      {"Rate-mode effective limits", criterion_rate_limits},
      {"Actuator fidelity", criterion_actuator},
      {"Actuator-dynamics reproduction", criterion_actuator_study},
      {"Timing", criterion_timing},
  };
  int id = 0;
  for (const auto& [title, run] : criteria) {
    ++id;
    try {
      run();
    } catch (const std::exception& e) {
      report(id, title, false, std::string("exception: ") + e.what());
    }
  }
  std::printf("%d of 8 criteria passed\n", 8 - failures);
  return failures == 0 ? 0 : 1;
}
