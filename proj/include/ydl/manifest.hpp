#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ydl {

inline constexpr const char* kCodeVersion = "ydelab 0.1.0";

struct ManifestEntry {
  std::string file;  ///< path relative to the output directory
  std::uint64_t bytes = 0;
  std::string fnv64;  ///< hex FNV-1a-64 of the file contents
};

struct SeedEntry {
  std::string purpose;
  std::uint64_t seed = 0;
};

/// Reproducibility record written next to every experiment's outputs. The
/// wall_clock_sec field is the only nondeterministic entry; byte-identity
/// comparisons must strip it (see manifest_json_deterministic).
struct RunManifest {
  std::string code_version = kCodeVersion;
  std::string config_hash;
  std::uint64_t base_seed = 0;
  std::vector<SeedEntry> seed_ledger;
  std::vector<ManifestEntry> outputs;  ///< every produced file except the manifest itself
  double wall_clock_sec = 0.0;
  int exit_status = 0;
};

/// Hashes dir/name and appends it to the manifest (file stored relative).
void manifest_add_file(RunManifest& man, const std::string& dir,
                       const std::string& name);

std::string manifest_json(const RunManifest& man);
/// Same document with wall_clock_sec forced to 0 (for byte-identity checks).
std::string manifest_json_deterministic(const RunManifest& man);

/// Writes manifest.json into dir.
void write_manifest(const RunManifest& man, const std::string& dir);

}  // namespace ydl
