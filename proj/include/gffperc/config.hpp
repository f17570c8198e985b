#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "gffperc/common.hpp"

namespace gffperc {

/// Experiment configuration, read from one JSON file. Every key is optional;
/// missing keys take the defaults below. See README for the schema.
struct ExperimentConfig {
  int d = 3;
  std::vector<double> theta{0.7};
  std::vector<int> L{4, 8, 16};
  int ell = 8;
  /// Torus half-side for qcurve is lbar_multiple * L.
  int lbar_multiple = 17;
  /// Box margin beyond B(0, 2L); 0 picks the default for theta.
  int margin = 0;
  std::vector<double> h_grid;
  std::size_t replicas = 1000;
  std::uint64_t seed = 1;
  std::string out = "out";
  /// Grid levels must satisfy |h| < M; the verify domination check uses it too.
  double M = 2.0;
  double gamma = 0.1;
  double gap_below = 0.6;
  double gap_above = 0.6;
  std::size_t verify_replicas = 20000;
  /// dump-field: "torus" or "box", with half-side / radius.
  std::string dump_geometry = "torus";
  int dump_extent = 8;

  nlohmann::json to_json() const;
};

/// Parses and validates; throws ConfigError on unknown keys or bad values.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);
void validate(const ExperimentConfig& c);

/// FNV-1a over the canonical dump, excluding seed and output directory.
std::string config_hash(const ExperimentConfig& c);

/// start, start + step, ... up to stop inclusive (count fixed up front).
std::vector<double> linear_grid(double start, double stop, double step);

}  // namespace gffperc
