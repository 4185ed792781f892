#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace ydl {

struct RunOptions {
  std::string config_path;
  std::string subcommand;  ///< empty = use the config's operation
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  unsigned threads = 1;
  std::string kernels = "auto";
};

/// Executes one experiment end to end: parse + validate config, run the
/// operation(s), write CSV/JSON artifacts and the manifest.
/// Exit codes: 0 = every pass flag true; 2 = config/schema violation (message
/// on stderr names the field); 3 = numerical failure or failed pass flag
/// (partial artifacts and manifest still written).
int run_experiment(const RunOptions& opts);

}  // namespace ydl
