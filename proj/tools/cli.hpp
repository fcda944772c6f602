#pragma once

// Command-line front end. `run_cli` is the whole program minus process
// plumbing so tests can drive it with captured streams.

#include "cca/actuator_sim.hpp"

#include <iosfwd>
#include <vector>

namespace cca::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumerical = 3;

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// Wall-clock seconds per allocation call, sample-major within each
// repetition, for three ways of producing the command: cached AMS, AMS rebuilt
// on every call, and the redistributed pseudo-inverse.
struct BenchmarkResult {
  int reps = 0;
  int samples = 0;
  std::vector<double> precomputed;
  std::vector<double> recomputed;
  std::vector<double> erpi;
  double ams_build_seconds = 0.0;  // one-time cost excluded from `precomputed`
  double total_seconds = 0.0;
};

BenchmarkResult benchmark(const AircraftModel& model, const Maneuver& maneuver, AmsMode mode,
                          int reps);

// Counts per bucket [k w, (k+1) w); the last bucket holds the maximum.
std::vector<long> histogram(const std::vector<double>& seconds, double bucket_width = 1e-3);

// Linear interpolation between order statistics, p in [0, 100].
double percentile(std::vector<double> values, double p);

double mean(const std::vector<double>& values);

}  // namespace cca::cli
