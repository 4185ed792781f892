#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "ydl/system.hpp"

namespace ydl {

/// Schema or semantic violation in an experiment config; `field` names the
/// offending entry (dot-separated path). Maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field_name, const std::string& message)
      : std::runtime_error(field_name + ": " + message), field(std::move(field_name)) {}
  std::string field;
};

struct NoiseConfig {
  double hurst = 0.75;
  double h = 1.0 / 4096.0;
  double horizon = 2.0;  ///< two-sided span: samples live on [-horizon, horizon]
  std::uint64_t seed = 12345;
  std::size_t paths = 20;
};

struct ExperimentBlock {
  std::string operation = "all";
  std::string out_dir = "out";
  int depths = 20;        ///< pullback / singleton / tempered depth
  int intervals = 10;     ///< delay intervals for bound checks
  int k_max = 30;         ///< absorbing partial-sum cutoff
  int cloud = 8;          ///< sample points per ball
  double radius = 1.0;    ///< initial ball radius
  int windows = 0;        ///< time-average windows (0 = use paths count)
  std::vector<double> c_g_grid;  ///< amplitudes for the ergodic-average sweep
  double epsilon_tol = 1e-3;
  double upper_bracket = 1.0;
  std::vector<int> k0_grid;  ///< block lengths for the bounded-diffusion scan
  double safety = 1.5;
  bool use_cache = true;
};

struct ExperimentConfig {
  int schema_version = 1;
  SystemSpec system;
  NoiseConfig noise;
  ExperimentBlock experiment;
};

/// Parses and fully validates a JSON config. Unknown fields are rejected
/// (fail-loud reproducibility); every violation throws ConfigError naming the
/// field. The exponent chain and grid divisibility are enforced here.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config_file(const std::string& path);

/// Canonical serialization (sorted keys, round-trip-exact numbers): two
/// configs are equivalent iff their canonical forms are byte-identical.
std::string config_canonical_json(const ExperimentConfig& cfg);

/// FNV-1a-64 over the canonical serialization, as a hex string.
std::string config_hash(const ExperimentConfig& cfg);

const std::vector<std::string>& valid_operations();

}  // namespace ydl
