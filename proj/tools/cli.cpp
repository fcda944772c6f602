#include "cli.hpp"

#include "cca/baseline.hpp"
#include "cca/f18.hpp"
#include "cca/io.hpp"
#include "cca/polytope.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>

namespace cca::cli {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Options {
  std::string builtin;
  std::string model_path;
  std::string maneuver_path;
  bool synth = false;
  std::string mode = "auto";
  std::string compare = "none";
  bool precompute = false;
  std::string out_dir = ".";
  double dt = 1e-3;
  int reps = 0;  // 0 selects the per-command default
};

struct LoadedModel {
  AircraftModel model;
  // Present for the built-in model, or when the file carries omega0 and zeta.
  std::optional<std::vector<ActuatorParams>> actuators;
};

std::vector<double> per_actuator(const nlohmann::json& j, const std::string& key, int m) {
  if (j.is_number()) return std::vector<double>(static_cast<std::size_t>(m), j.get<double>());
  if (!j.is_array() || static_cast<int>(j.size()) != m) {
    throw InputError("model: '" + key + "' must be a number or an array of " +
                     std::to_string(m) + " numbers");
  }
  std::vector<double> out;
  for (const auto& v : j) {
    if (!v.is_number()) throw InputError("model: '" + key + "' must contain numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

std::vector<std::string> actuator_names(const AircraftModel& model) {
  if (!model.names.empty()) return model.names;
  std::vector<std::string> names;
  for (int j = 0; j < model.actuators(); ++j) names.push_back("u" + std::to_string(j + 1));
  return names;
}

LoadedModel load_model(const Options& opt, std::ostream& out) {
  LoadedModel loaded;
  if (!opt.builtin.empty()) {
    loaded.model = f18_model();
    loaded.actuators = f18_actuators();
    out << "note: f18 rate dynamics use A = -2 I sized 7 x 7 (one per actuator); "
           "the eighth diagonal entry of the source table is dropped\n";
    return loaded;
  }
  std::ifstream in(opt.model_path);
  if (!in) throw InputError("cannot open model file " + opt.model_path);
  const KeyValues values = read_key_values(in);
  loaded.model = model_from_key_values(values);

  const bool has_omega = values.count("omega0") > 0;
  const bool has_zeta = values.count("zeta") > 0;
  if (has_omega != has_zeta) throw InputError("model: omega0 and zeta must be given together");
  if (has_omega) {
    const int m = loaded.model.actuators();
    const auto omega = per_actuator(values.at("omega0"), "omega0", m);
    const auto zeta = per_actuator(values.at("zeta"), "zeta", m);
    const auto names = actuator_names(loaded.model);
    std::vector<ActuatorParams> params;
    for (int j = 0; j < m; ++j) {
      ActuatorParams p;
      p.name = names[j];
      p.omega0 = omega[j];
      p.zeta = zeta[j];
      p.lower = loaded.model.position_limits.lower[j];
      p.upper = loaded.model.position_limits.upper[j];
      p.rate_limit = std::min(-loaded.model.rate_limits.lower[j], loaded.model.rate_limits.upper[j]);
      p.validate();
      params.push_back(p);
    }
    loaded.actuators = std::move(params);
  }
  return loaded;
}

AmsMode resolve_mode(const Options& opt, const AircraftModel& model) {
  if (opt.mode == "auto") return default_rate_mode(model);
  return parse_mode(opt.mode);
}

Maneuver load_maneuver(const Options& opt) {
  if (opt.synth) return synth_maneuver();
  if (opt.maneuver_path.empty()) throw InputError("a maneuver is required: --maneuver PATH or --synth");
  return read_maneuver_file(opt.maneuver_path);
}

std::filesystem::path prepare_out_dir(const Options& opt) {
  const std::filesystem::path dir(opt.out_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw InputError("cannot create output directory " + dir.string() + ": " + ec.message());
  return dir;
}

void write_off_file(const std::filesystem::path& path, const PolytopeV& hull) {
  std::ofstream os(path);
  if (!os) throw InputError("cannot write " + path.string());
  write_off(os, hull);
}

void print_hull(std::ostream& out, const std::string& label, const PolytopeV& hull) {
  const auto ext = extents(hull);
  out << label << ": " << hull.vertices.size() << " vertices, " << hull.facets.size()
      << " facets, Euler characteristic " << hull.euler_characteristic() << '\n';
  const char* axes[3] = {"c_l", "c_m", "c_n"};
  for (int a = 0; a < 3; ++a) {
    out << "  " << axes[a] << " [" << ext(a, 0) << ", " << ext(a, 1) << "]\n";
  }
}

int cmd_ams(const Options& opt, std::ostream& out) {
  const LoadedModel loaded = load_model(opt, out);
  const AircraftModel& model = loaded.model;
  const AmsMode mode = resolve_mode(opt, model);
  const auto dir = prepare_out_dir(opt);

  const Ams ams = build_ams(model, mode);
  out << std::setprecision(9);
  out << "mode " << to_string(mode) << '\n';
  write_off_file(dir / "ams_position.off", ams.position_hull);
  print_hull(out, "position hull", ams.position_hull);
  if (uses_rates(mode)) {
    write_off_file(dir / "ams_rate.off", *ams.rate_hull);
    write_off_file(dir / "ams_intersection.off", ams.hull);
    print_hull(out, "rate hull", *ams.rate_hull);
    print_hull(out, "attainable moment set", ams.hull);
  }
  if (mode == AmsMode::rate_exact) {
    const BoxLimits box = effective_position_limits(model);
    const auto names = actuator_names(model);
    out << "effective position limits (deg):\n";
    for (int j = 0; j < model.actuators(); ++j) {
      out << "  " << names[j] << " [" << box.lower[j] << ", " << box.upper[j] << "]\n";
    }
  }
  return kExitOk;
}

void write_timing(const std::filesystem::path& dir, const Maneuver& maneuver,
                  const BenchmarkResult& bench, const std::vector<double>* run_solve) {
  const auto n = static_cast<std::size_t>(bench.samples);
  auto per_sample_mean = [&](const std::vector<double>& all, std::size_t k) {
    double sum = 0.0;
    for (int r = 0; r < bench.reps; ++r) sum += all[static_cast<std::size_t>(r) * n + k];
    return sum / bench.reps;
  };

  CsvTable timing;
  timing.header = {"t"};
  if (run_solve != nullptr) timing.header.push_back("solve_s");
  for (const char* h : {"precomputed_s", "recomputed_s", "erpi_s"}) timing.header.push_back(h);
  for (std::size_t k = 0; k < n; ++k) {
    std::vector<double> row = {maneuver[k].t};
    if (run_solve != nullptr) row.push_back((*run_solve)[k]);
    row.push_back(per_sample_mean(bench.precomputed, k));
    row.push_back(per_sample_mean(bench.recomputed, k));
    row.push_back(per_sample_mean(bench.erpi, k));
    timing.rows.push_back(std::move(row));
  }
  write_csv_file(dir / "timing.csv", timing);

  const auto hp = histogram(bench.precomputed);
  const auto hr = histogram(bench.recomputed);
  const auto he = histogram(bench.erpi);
  const std::size_t buckets = std::max({hp.size(), hr.size(), he.size()});
  auto at = [](const std::vector<long>& h, std::size_t b) {
    return b < h.size() ? static_cast<double>(h[b]) : 0.0;
  };
  CsvTable hist;
  hist.header = {"bucket_ms", "precomputed", "recomputed", "erpi"};
  for (std::size_t b = 0; b < buckets; ++b) {
    hist.rows.push_back({static_cast<double>(b), at(hp, b), at(hr, b), at(he, b)});
  }
  write_csv_file(dir / "timing_histogram.csv", hist);
}

void print_timing_line(std::ostream& out, const std::string& label, const std::vector<double>& s) {
  out << "  " << std::left << std::setw(12) << label << std::right << std::fixed
      << std::setprecision(2) << " mean " << mean(s) * 1e6 << " us, p50 " << percentile(s, 50) * 1e6
      << " us, p99 " << percentile(s, 99) * 1e6 << " us, max "
      << *std::max_element(s.begin(), s.end()) * 1e6 << " us\n";
  out.unsetf(std::ios::floatfield);
}

void print_benchmark(std::ostream& out, const BenchmarkResult& bench) {
  out << "timing over " << bench.reps << " repetitions of " << bench.samples << " samples:\n";
  print_timing_line(out, "precomputed", bench.precomputed);
  print_timing_line(out, "recomputed", bench.recomputed);
  print_timing_line(out, "erpi", bench.erpi);
  out << std::setprecision(6) << "  one-time AMS build " << bench.ams_build_seconds * 1e3
      << " ms, benchmark wall time " << bench.total_seconds << " s\n";
}

int cmd_run(const Options& opt, std::ostream& out) {
  const LoadedModel loaded = load_model(opt, out);
  const AircraftModel& model = loaded.model;
  if (!loaded.actuators) {
    throw InputError("model file " + opt.model_path + " has no omega0/zeta entries; run needs them");
  }
  if (!(opt.dt > 0.0)) throw InputError("--dt must be positive");
  if (opt.compare != "none" && opt.compare != "erpi" && opt.compare != "pi") {
    throw InputError("--compare must be erpi, pi or none");
  }
  const AmsMode mode = resolve_mode(opt, model);
  const Maneuver maneuver = load_maneuver(opt);
  const auto dir = prepare_out_dir(opt);

  ExperimentOptions eo;
  eo.dt = opt.dt;
  eo.precompute = opt.precompute;
  eo.compare_erpi = opt.compare == "erpi";
  const TimeSeries ts = run_experiment(model, *loaded.actuators, maneuver, mode, eo);

  const auto names = actuator_names(model);
  const int m = model.actuators();
  const std::size_t n = ts.t.size();

  CsvTable inputs;
  inputs.header = {"t"};
  for (const auto& name : names) inputs.header.push_back("u_" + name);
  if (uses_rates(mode)) {
    for (const auto& name : names) inputs.header.push_back("udot_" + name);
  }
  if (opt.compare != "none") {
    for (const auto& name : names) inputs.header.push_back(opt.compare + "_" + name);
  }
  for (std::size_t k = 0; k < n; ++k) {
    std::vector<double> row = {ts.t[k]};
    for (int j = 0; j < m; ++j) row.push_back(ts.u[k][j]);
    if (uses_rates(mode)) {
      const VecX udot = model.A * ts.u[k];
      for (int j = 0; j < m; ++j) row.push_back(udot[j]);
    }
    if (opt.compare == "erpi") {
      for (int j = 0; j < m; ++j) row.push_back(ts.u_erpi[k][j]);
    } else if (opt.compare == "pi") {
      const VecX pi = pseudo_inverse_allocate(model.B, ts.tau_cmd[k]);
      for (int j = 0; j < m; ++j) row.push_back(pi[j]);
    }
    inputs.rows.push_back(std::move(row));
  }
  write_csv_file(dir / "inputs.csv", inputs);

  CsvTable realized;
  realized.header = {"t"};
  for (const auto& name : names) realized.header.push_back("act_" + name);
  for (const char* h : {"cl", "cm", "cn", "cl_alloc", "cm_alloc", "cn_alloc"}) realized.header.push_back(h);
  for (std::size_t k = 0; k < n; ++k) {
    std::vector<double> row = {ts.t[k]};
    for (int j = 0; j < m; ++j) row.push_back(ts.u_act[k][j]);
    for (int a = 0; a < 3; ++a) row.push_back(ts.tau_realized[k][a]);
    for (int a = 0; a < 3; ++a) row.push_back(ts.tau_allocated[k][a]);
    realized.rows.push_back(std::move(row));
  }
  write_csv_file(dir / "realized.csv", realized);

  CsvTable clip;
  clip.header = {"t", "scale", "was_clipped"};
  for (std::size_t k = 0; k < n; ++k) {
    clip.rows.push_back({ts.t[k], ts.clip_scale[k], ts.clipped[k] ? 1.0 : 0.0});
  }
  write_csv_file(dir / "clip.csv", clip);

  const BenchmarkResult bench = benchmark(model, maneuver, mode, opt.reps > 0 ? opt.reps : 1);
  write_timing(dir, maneuver, bench, &ts.solve_seconds);

  const auto clipped = std::count(ts.clipped.begin(), ts.clipped.end(), true);
  out << "mode " << to_string(mode) << ", " << n << " samples, " << clipped << " clipped\n";
  out << std::setprecision(6) << "max position limit violation " << ts.max_position_violation
      << " deg\n";
  out << "total variation of u " << total_variation(ts.u) << " deg\n";
  for (int j = 0; j < m; ++j) {
    if (ts.clamp_events[j] == 0) continue;
    out << "  " << names[j] << ": " << ts.clamp_events[j] << " position clamp steps, max excess "
        << ts.max_clamp_excess[j] << " deg\n";
  }
  out << "solve time (" << (opt.precompute ? "precomputed" : "recomputed") << " AMS):\n";
  print_timing_line(out, "allocate", ts.solve_seconds);
  print_benchmark(out, bench);
  return kExitOk;
}

int cmd_bench(const Options& opt, std::ostream& out) {
  const LoadedModel loaded = load_model(opt, out);
  const AmsMode mode = resolve_mode(opt, loaded.model);
  const Maneuver maneuver = load_maneuver(opt);
  const auto dir = prepare_out_dir(opt);
  const BenchmarkResult bench = benchmark(loaded.model, maneuver, mode, opt.reps > 0 ? opt.reps : 100);
  write_timing(dir, maneuver, bench, nullptr);
  out << "mode " << to_string(mode) << '\n';
  print_benchmark(out, bench);
  return kExitOk;
}

}  // namespace

BenchmarkResult benchmark(const AircraftModel& model, const Maneuver& maneuver, AmsMode mode,
                          int reps) {
  if (reps < 1) throw InputError("benchmark: repetitions must be positive");
  if (maneuver.empty()) throw InputError("benchmark: maneuver is empty");
  const auto total_start = Clock::now();

  BenchmarkResult res;
  res.reps = reps;
  res.samples = static_cast<int>(maneuver.size());
  const auto total = static_cast<std::size_t>(reps) * maneuver.size();
  res.precomputed.reserve(total);
  res.recomputed.reserve(total);
  res.erpi.reserve(total);

  const auto build_start = Clock::now();
  Allocator cached(model, mode, true);
  res.ams_build_seconds = seconds_since(build_start);

  // Keeps the results observable so no call can be optimized away.
  volatile double sink = 0.0;
  for (int r = 0; r < reps; ++r) {
    cached.reset_warm_start();
    Allocator fresh(model, mode, false);
    for (const auto& s : maneuver) {
      auto start = Clock::now();
      sink = sink + cached.allocate(s.tau_cmd).u[0];
      res.precomputed.push_back(seconds_since(start));

      start = Clock::now();
      sink = sink + fresh.allocate(s.tau_cmd).u[0];
      res.recomputed.push_back(seconds_since(start));

      start = Clock::now();
      sink = sink + erpi_allocate(model, s.tau_cmd).u[0];
      res.erpi.push_back(seconds_since(start));
    }
  }
  res.total_seconds = seconds_since(total_start);
  return res;
}

std::vector<long> histogram(const std::vector<double>& seconds, double bucket_width) {
  if (!(bucket_width > 0.0)) throw InputError("histogram: bucket width must be positive");
  std::vector<long> counts;
  for (double s : seconds) {
    const auto b = static_cast<std::size_t>(std::max(0.0, s) / bucket_width);
    if (b >= counts.size()) counts.resize(b + 1, 0);
    ++counts[b];
  }
  return counts;
}

double percentile(std::vector<double> values, double p) {
  if (values.empty()) throw InputError("percentile: no values");
  std::sort(values.begin(), values.end());
  const double pos = std::clamp(p, 0.0, 100.0) / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

double mean(const std::vector<double>& values) {
  if (values.empty()) return 0.0;
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Options opt;
  CLI::App app{"Constrained control allocation: attainable moment sets, clipping and QP allocation"};
  app.name("cca");
  app.require_subcommand(1);
  auto* builtin = app.add_option("--builtin", opt.builtin, "Built-in model")
                      ->check(CLI::IsMember({"f18"}));
  auto* model = app.add_option("--model", opt.model_path, "Model file (key = value)");
  builtin->excludes(model);

  auto mode_option = [&](CLI::App* sub) {
    sub->add_option("--mode", opt.mode, "position_only, rate_paper, rate_exact or auto")
        ->check(CLI::IsMember({"auto", "position_only", "rate_paper", "rate_exact"}));
  };
  auto maneuver_options = [&](CLI::App* sub) {
    auto* path = sub->add_option("--maneuver", opt.maneuver_path, "Maneuver CSV with t,cl,cm,cn");
    auto* synth = sub->add_flag("--synth", opt.synth, "Use the built-in synthetic maneuver");
    path->excludes(synth);
  };

  auto* ams = app.add_subcommand("ams", "Build the attainable moment set and export OFF files");
  ams->fallthrough();
  mode_option(ams);
  ams->add_option("--out", opt.out_dir, "Output directory");

  auto* run = app.add_subcommand("run", "Replay a maneuver through allocator and actuators");
  run->fallthrough();
  mode_option(run);
  maneuver_options(run);
  run->add_option("--compare", opt.compare, "Baseline written next to the allocation")
      ->check(CLI::IsMember({"erpi", "pi", "none"}));
  run->add_flag("--precompute", opt.precompute, "Reuse one AMS for the whole maneuver");
  run->add_option("--out", opt.out_dir, "Output directory");
  run->add_option("--dt", opt.dt, "Actuator integration step (s)");
  run->add_option("--reps", opt.reps, "Timing repetitions (default 1)");

  auto* bench = app.add_subcommand("bench", "Time allocation with cached and rebuilt AMS");
  bench->fallthrough();
  mode_option(bench);
  maneuver_options(bench);
  bench->add_option("--out", opt.out_dir, "Output directory");
  bench->add_option("--reps", opt.reps, "Repetitions of the maneuver (default 100)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (opt.builtin.empty() && opt.model_path.empty()) {
      throw InputError("select a model with --builtin f18 or --model PATH");
    }
    if (app.got_subcommand(ams)) return cmd_ams(opt, out);
    if (app.got_subcommand(run)) return cmd_run(opt, out);
    return cmd_bench(opt, out);
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
}

}  // namespace cca::cli
