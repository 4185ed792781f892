#include "ydl/manifest.hpp"

#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "ydl/cache.hpp"

namespace ydl {

void manifest_add_file(RunManifest& man, const std::string& dir,
                       const std::string& name) {
  std::filesystem::path p = std::filesystem::path(dir) / name;
  ManifestEntry e;
  e.file = name;
  e.bytes = std::filesystem::exists(p) ? std::filesystem::file_size(p) : 0;
  e.fnv64 = fnv1a64_hex(fnv1a64_file(p.string()));
  man.outputs.push_back(std::move(e));
}

namespace {

std::string render(const RunManifest& man, double wall_clock) {
  nlohmann::json root;
  root["code_version"] = man.code_version;
  root["config_hash"] = man.config_hash;
  root["base_seed"] = man.base_seed;
  nlohmann::json seeds = nlohmann::json::array();
  for (const SeedEntry& s : man.seed_ledger)
    seeds.push_back(nlohmann::json{{"purpose", s.purpose}, {"seed", s.seed}});
  root["seed_ledger"] = seeds;
  nlohmann::json outs = nlohmann::json::array();
  for (const ManifestEntry& e : man.outputs)
    outs.push_back(
        nlohmann::json{{"file", e.file}, {"bytes", e.bytes}, {"fnv64", e.fnv64}});
  root["outputs"] = outs;
  root["wall_clock_sec"] = wall_clock;
  root["exit_status"] = man.exit_status;
  return root.dump(2) + "\n";
}

}  // namespace

std::string manifest_json(const RunManifest& man) {
  return render(man, man.wall_clock_sec);
}

std::string manifest_json_deterministic(const RunManifest& man) {
  return render(man, 0.0);
}

void write_manifest(const RunManifest& man, const std::string& dir) {
  std::filesystem::path p = std::filesystem::path(dir) / "manifest.json";
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << manifest_json(man);
  if (!out) throw std::runtime_error("write_manifest: cannot write " + p.string());
}

}  // namespace ydl
