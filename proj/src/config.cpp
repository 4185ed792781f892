#include "ydl/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ydl/functional.hpp"

namespace ydl {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::string& where,
                    std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* k : allowed)
      if (it.key() == k) {
        known = true;
        break;
      }
    if (!known)
      throw ConfigError(where.empty() ? it.key() : where + "." + it.key(),
                        "unknown field (schema is closed; remove or fix the entry)");
  }
}

const json& need(const json& obj, const std::string& where, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end())
    throw ConfigError(where.empty() ? key : where + "." + key, "required field missing");
  return *it;
}

double get_number(const json& v, const std::string& field) {
  if (!v.is_number()) throw ConfigError(field, "expected a number");
  return v.get<double>();
}

std::int64_t get_integer(const json& v, const std::string& field) {
  if (!v.is_number_integer()) throw ConfigError(field, "expected an integer");
  return v.get<std::int64_t>();
}

Eigen::MatrixXd get_matrix(const json& v, const std::string& field) {
  if (!v.is_array() || v.empty())
    throw ConfigError(field, "expected a nonempty array of rows");
  std::size_t rows = v.size();
  // A flat numeric array is a single-column matrix.
  if (v[0].is_number()) {
    Eigen::MatrixXd m(rows, 1);
    for (std::size_t i = 0; i < rows; ++i) m(static_cast<Eigen::Index>(i), 0) =
        get_number(v[i], field);
    return m;
  }
  std::size_t cols = v[0].is_array() ? v[0].size() : 0;
  if (cols == 0) throw ConfigError(field, "rows must be nonempty arrays");
  Eigen::MatrixXd m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    if (!v[i].is_array() || v[i].size() != cols)
      throw ConfigError(field, "rows must all have the same length");
    for (std::size_t j = 0; j < cols; ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          get_number(v[i][j], field);
  }
  return m;
}

Eigen::VectorXd get_vector(const json& v, const std::string& field) {
  if (!v.is_array() || v.empty()) throw ConfigError(field, "expected a nonempty array");
  Eigen::VectorXd out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    out(static_cast<Eigen::Index>(i)) = get_number(v[i], field);
  return out;
}

FunctionalDescriptor parse_functional(const json& v, const std::string& where) {
  if (!v.is_object()) throw ConfigError(where, "expected an object");
  std::string kind = need(v, where, "kind").get<std::string>();
  if (kind == "linear") {
    reject_unknown(v, where, {"kind", "offset", "columns"});
    PointDelayLinear f;
    f.offset = get_matrix(need(v, where, "offset"), where + ".offset");
    const json& cols = need(v, where, "columns");
    if (!cols.is_array()) throw ConfigError(where + ".columns", "expected an array");
    f.columns.resize(cols.size());
    for (std::size_t l = 0; l < cols.size(); ++l) {
      const json& terms = cols[l];
      std::string cfield = where + ".columns[" + std::to_string(l) + "]";
      if (!terms.is_array()) throw ConfigError(cfield, "expected an array of terms");
      for (std::size_t j = 0; j < terms.size(); ++j) {
        std::string tfield = cfield + "[" + std::to_string(j) + "]";
        reject_unknown(terms[j], tfield, {"lag", "B"});
        LinearTerm term;
        term.lag = get_number(need(terms[j], tfield, "lag"), tfield + ".lag");
        term.B = get_matrix(need(terms[j], tfield, "B"), tfield + ".B");
        f.columns[l].push_back(std::move(term));
      }
    }
    return f;
  }
  if (kind == "saturating") {
    reject_unknown(v, where, {"kind", "rows", "cols", "entries"});
    SaturatingPoint f;
    f.rows = static_cast<int>(get_integer(need(v, where, "rows"), where + ".rows"));
    f.cols = static_cast<int>(get_integer(need(v, where, "cols"), where + ".cols"));
    const json& entries = need(v, where, "entries");
    if (!entries.is_array() ||
        entries.size() != static_cast<std::size_t>(f.rows) * static_cast<std::size_t>(f.cols))
      throw ConfigError(where + ".entries", "expected rows*cols entries (row-major)");
    for (std::size_t i = 0; i < entries.size(); ++i) {
      std::string efield = where + ".entries[" + std::to_string(i) + "]";
      reject_unknown(entries[i], efield, {"lag", "w", "c"});
      SatEntry e;
      e.lag = get_number(need(entries[i], efield, "lag"), efield + ".lag");
      e.w = get_vector(need(entries[i], efield, "w"), efield + ".w");
      e.c = get_number(need(entries[i], efield, "c"), efield + ".c");
      f.entries.push_back(std::move(e));
    }
    return f;
  }
  throw ConfigError(where + ".kind", "unknown functional kind '" + kind +
                                         "' (expected \"linear\" or \"saturating\")");
}

json functional_to_json(const FunctionalDescriptor& f) {
  json out;
  if (const auto* lin = std::get_if<PointDelayLinear>(&f)) {
    out["kind"] = "linear";
    json offset = json::array();
    for (Eigen::Index i = 0; i < lin->offset.rows(); ++i) {
      json row = json::array();
      for (Eigen::Index j = 0; j < lin->offset.cols(); ++j) row.push_back(lin->offset(i, j));
      offset.push_back(row);
    }
    out["offset"] = offset;
    json cols = json::array();
    for (const auto& column : lin->columns) {
      json terms = json::array();
      for (const LinearTerm& t : column) {
        json b = json::array();
        for (Eigen::Index i = 0; i < t.B.rows(); ++i) {
          json row = json::array();
          for (Eigen::Index j = 0; j < t.B.cols(); ++j) row.push_back(t.B(i, j));
          b.push_back(row);
        }
        terms.push_back(json{{"lag", t.lag}, {"B", b}});
      }
      cols.push_back(terms);
    }
    out["columns"] = cols;
  } else {
    const auto& sat = std::get<SaturatingPoint>(f);
    out["kind"] = "saturating";
    out["rows"] = sat.rows;
    out["cols"] = sat.cols;
    json entries = json::array();
    for (const SatEntry& e : sat.entries) {
      json w = json::array();
      for (Eigen::Index i = 0; i < e.w.size(); ++i) w.push_back(e.w(i));
      entries.push_back(json{{"lag", e.lag}, {"w", w}, {"c", e.c}});
    }
    out["entries"] = entries;
  }
  return out;
}

}  // namespace

const std::vector<std::string>& valid_operations() {
  static const std::vector<std::string> ops = {
      "noise",    "solve",    "bounds",   "ghat",      "epsilon",
      "pullback", "singleton", "tempered", "bounded-g", "all"};
  return ops;
}

ExperimentConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError("<root>", std::string("invalid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("<root>", "top level must be an object");
  reject_unknown(root, "", {"schema_version", "system", "noise", "experiment"});

  ExperimentConfig cfg;
  std::int64_t sv = get_integer(need(root, "", "schema_version"), "schema_version");
  if (sv != 1) throw ConfigError("schema_version", "unsupported version (expected 1)");
  cfg.schema_version = 1;

  // --- system ---
  const json& sys = need(root, "", "system");
  if (!sys.is_object()) throw ConfigError("system", "expected an object");
  reject_unknown(sys, "system",
                 {"A", "drift", "diffusion", "r", "beta0", "beta", "nu", "margin"});
  cfg.system.A = get_matrix(need(sys, "system", "A"), "system.A");
  cfg.system.drift = parse_functional(need(sys, "system", "drift"), "system.drift");
  cfg.system.diffusion =
      parse_functional(need(sys, "system", "diffusion"), "system.diffusion");
  cfg.system.r = get_number(need(sys, "system", "r"), "system.r");
  cfg.system.beta0 = get_number(need(sys, "system", "beta0"), "system.beta0");
  cfg.system.beta = get_number(need(sys, "system", "beta"), "system.beta");
  cfg.system.nu = get_number(need(sys, "system", "nu"), "system.nu");
  if (sys.contains("margin"))
    cfg.system.margin = get_number(sys["margin"], "system.margin");
  try {
    cfg.system.validate();
  } catch (const std::exception& e) {
    // Validation messages already carry the "system.<field>" prefix.
    std::string msg = e.what();
    std::string field = msg.substr(0, msg.find(' '));
    throw ConfigError(field, msg);
  }

  // --- noise ---
  const json& noise = need(root, "", "noise");
  if (!noise.is_object()) throw ConfigError("noise", "expected an object");
  reject_unknown(noise, "noise", {"hurst", "h", "horizon", "seed", "paths"});
  cfg.noise.hurst = get_number(need(noise, "noise", "hurst"), "noise.hurst");
  cfg.noise.h = get_number(need(noise, "noise", "h"), "noise.h");
  cfg.noise.horizon = get_number(need(noise, "noise", "horizon"), "noise.horizon");
  if (noise.contains("seed")) {
    const json& s = noise["seed"];
    if (!s.is_number_unsigned() && !s.is_number_integer())
      throw ConfigError("noise.seed", "expected a nonnegative integer");
    std::int64_t raw = s.get<std::int64_t>();
    if (s.is_number_integer() && !s.is_number_unsigned() && raw < 0)
      throw ConfigError("noise.seed", "expected a nonnegative integer");
    cfg.noise.seed = s.get<std::uint64_t>();
  }
  if (noise.contains("paths")) {
    std::int64_t p = get_integer(noise["paths"], "noise.paths");
    if (p < 1) throw ConfigError("noise.paths", "must be >= 1");
    cfg.noise.paths = static_cast<std::size_t>(p);
  }
  if (!(cfg.noise.hurst > 0.5 && cfg.noise.hurst < 1.0))
    throw ConfigError("noise.hurst", "must lie in (1/2, 1)");
  if (!(cfg.noise.h > 0.0)) throw ConfigError("noise.h", "must be positive");
  if (!(cfg.noise.horizon > 0.0)) throw ConfigError("noise.horizon", "must be positive");
  if (!(cfg.system.nu < cfg.noise.hurst))
    throw ConfigError("system.nu", "must lie strictly below noise.hurst");
  double ratio = cfg.system.r / cfg.noise.h;
  if (std::abs(ratio - std::llround(ratio)) > 1e-9 * std::max(1.0, ratio))
    throw ConfigError("noise.h", "the delay r must be an integer multiple of h");

  // --- experiment ---
  if (root.contains("experiment")) {
    const json& exp = root["experiment"];
    if (!exp.is_object()) throw ConfigError("experiment", "expected an object");
    reject_unknown(exp, "experiment",
                   {"operation", "out_dir", "depths", "intervals", "k_max", "cloud",
                    "radius", "windows", "c_g_grid", "epsilon_tol", "upper_bracket",
                    "k0_grid", "safety", "use_cache"});
    ExperimentBlock& e = cfg.experiment;
    if (exp.contains("operation")) {
      e.operation = exp["operation"].get<std::string>();
      bool ok = false;
      for (const std::string& op : valid_operations()) ok = ok || op == e.operation;
      if (!ok)
        throw ConfigError("experiment.operation", "unknown operation '" + e.operation + "'");
    }
    if (exp.contains("out_dir")) e.out_dir = exp["out_dir"].get<std::string>();
    auto get_pos_int = [&](const char* key, int& slot) {
      if (!exp.contains(key)) return;
      std::int64_t v = get_integer(exp[key], std::string("experiment.") + key);
      if (v < 1) throw ConfigError(std::string("experiment.") + key, "must be >= 1");
      slot = static_cast<int>(v);
    };
    get_pos_int("depths", e.depths);
    get_pos_int("intervals", e.intervals);
    get_pos_int("k_max", e.k_max);
    get_pos_int("cloud", e.cloud);
    if (exp.contains("windows")) {
      // 0 is a stored value (= use the ensemble path count), so the canonical
      // serialization stays re-parseable.
      std::int64_t v = get_integer(exp["windows"], "experiment.windows");
      if (v < 0) throw ConfigError("experiment.windows", "must be >= 0");
      e.windows = static_cast<int>(v);
    }
    if (exp.contains("radius")) {
      e.radius = get_number(exp["radius"], "experiment.radius");
      if (!(e.radius > 0.0)) throw ConfigError("experiment.radius", "must be positive");
    }
    if (exp.contains("c_g_grid")) {
      const json& g = exp["c_g_grid"];
      if (!g.is_array()) throw ConfigError("experiment.c_g_grid", "expected an array");
      for (std::size_t i = 0; i < g.size(); ++i) {
        double v = get_number(g[i], "experiment.c_g_grid");
        if (v < 0.0) throw ConfigError("experiment.c_g_grid", "amplitudes must be >= 0");
        e.c_g_grid.push_back(v);
      }
    }
    if (exp.contains("epsilon_tol")) {
      e.epsilon_tol = get_number(exp["epsilon_tol"], "experiment.epsilon_tol");
      if (!(e.epsilon_tol > 0.0))
        throw ConfigError("experiment.epsilon_tol", "must be positive");
    }
    if (exp.contains("upper_bracket")) {
      e.upper_bracket = get_number(exp["upper_bracket"], "experiment.upper_bracket");
      if (!(e.upper_bracket > 0.0))
        throw ConfigError("experiment.upper_bracket", "must be positive");
    }
    if (exp.contains("k0_grid")) {
      const json& g = exp["k0_grid"];
      if (!g.is_array()) throw ConfigError("experiment.k0_grid", "expected an array");
      for (std::size_t i = 0; i < g.size(); ++i) {
        std::int64_t v = get_integer(g[i], "experiment.k0_grid");
        if (v < 1) throw ConfigError("experiment.k0_grid", "block lengths must be >= 1");
        e.k0_grid.push_back(static_cast<int>(v));
      }
    }
    if (exp.contains("safety")) {
      e.safety = get_number(exp["safety"], "experiment.safety");
      if (!(e.safety >= 1.0)) throw ConfigError("experiment.safety", "must be >= 1");
    }
    if (exp.contains("use_cache")) {
      if (!exp["use_cache"].is_boolean())
        throw ConfigError("experiment.use_cache", "expected a boolean");
      e.use_cache = exp["use_cache"].get<bool>();
    }
  }
  return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("<config>", "cannot read config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string config_canonical_json(const ExperimentConfig& cfg) {
  json root;
  root["schema_version"] = cfg.schema_version;
  json sys;
  json a = json::array();
  for (Eigen::Index i = 0; i < cfg.system.A.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < cfg.system.A.cols(); ++j) row.push_back(cfg.system.A(i, j));
    a.push_back(row);
  }
  sys["A"] = a;
  sys["drift"] = functional_to_json(cfg.system.drift);
  sys["diffusion"] = functional_to_json(cfg.system.diffusion);
  sys["r"] = cfg.system.r;
  sys["beta0"] = cfg.system.beta0;
  sys["beta"] = cfg.system.beta;
  sys["nu"] = cfg.system.nu;
  sys["margin"] = cfg.system.margin;
  root["system"] = sys;
  root["noise"] = json{{"hurst", cfg.noise.hurst},
                       {"h", cfg.noise.h},
                       {"horizon", cfg.noise.horizon},
                       {"seed", cfg.noise.seed},
                       {"paths", cfg.noise.paths}};
  const ExperimentBlock& e = cfg.experiment;
  // out_dir deliberately omitted: the hash identifies the computation, and
  // the same experiment written to two directories is the same experiment.
  root["experiment"] = json{{"operation", e.operation},
                            {"depths", e.depths},
                            {"intervals", e.intervals},
                            {"k_max", e.k_max},
                            {"cloud", e.cloud},
                            {"radius", e.radius},
                            {"windows", e.windows},
                            {"c_g_grid", e.c_g_grid},
                            {"epsilon_tol", e.epsilon_tol},
                            {"upper_bracket", e.upper_bracket},
                            {"k0_grid", e.k0_grid},
                            {"safety", e.safety},
                            {"use_cache", e.use_cache}};
  return root.dump(2);
}

std::string config_hash(const ExperimentConfig& cfg) {
  std::string s = config_canonical_json(cfg);
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace ydl
