#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "stit/measure.hpp"

namespace stit {

/// Measure section of a run configuration.
struct MeasureConfig {
  std::string kind = "isotropic";  // "isotropic" | "axis_parallel" | "discrete"
  double gamma = 6.283185307179586;
  int dim = 2;
  std::vector<DirectionalDistribution::Atom> atoms;  // "discrete" only

  // Unvalidated directional distribution (so that `verify` can report
  // broken atoms instead of refusing them).
  DirectionalDistribution theta() const;
  // Throws AssumptionFailed for an invalid theta.
  HyperplaneMeasure build() const;
};

/// Declarative run configuration (JSON, schema in docs/config.md).
struct RunConfig {
  std::string experiment = "stit";
  MeasureConfig measure;
  double a = 1.0;  // W' = [-a,a]^l
  double b = 4.0;  // W = [-b,b]^l
  double t = 0.25;
  double s = 0.1;
  std::size_t replicates = 1000;
  std::uint64_t seed = 1;
  int threads = 0;  // 0 = all hardware threads
  std::string output_dir = "out";
  std::vector<double> b_grid = {4.0, 8.0, 16.0, 32.0, 64.0};
  std::vector<double> us = {0.7, 0.8, 0.9};
  std::vector<double> vs = {0.2, 0.3};
  int probes_per_side = 2;
  double margin = 2.0;
};

// Parses JSON text; unknown keys and wrong types are rejected. Throws
// ConfigError.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::string& path);

// Cross-field checks: 0 < a < b, 0 < s < t, N >= 1, grids above a, and
// (when require_valid_measure) a valid theta. Throws ConfigError.
void validate(const RunConfig& config, bool require_valid_measure = true);

// Canonical JSON echo of the fields that determine the results (threads
// and output_dir are left out), written next to the artifacts.
std::string config_json(const RunConfig& config);

}  // namespace stit
