#include "ydl/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "ydl/attractor.hpp"
#include "ydl/bounds.hpp"
#include "ydl/cache.hpp"
#include "ydl/config.hpp"
#include "ydl/holder.hpp"
#include "ydl/kernels.hpp"
#include "ydl/ledger.hpp"
#include "ydl/manifest.hpp"
#include "ydl/parallel.hpp"
#include "ydl/solver.hpp"
#include "ydl/stats.hpp"

namespace ydl {

namespace {

using nlohmann::json;

std::string num17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

GridPath make_const_segment(int dim, std::size_t r_steps, double h,
                            const Eigen::VectorXd& v) {
  GridPath eta;
  eta.t0 = -static_cast<double>(r_steps) * h;
  eta.h = h;
  eta.dim = dim;
  eta.values.resize((r_steps + 1) * static_cast<std::size_t>(dim));
  for (std::size_t k = 0; k <= r_steps; ++k)
    for (int c = 0; c < dim; ++c)
      eta.values[k * static_cast<std::size_t>(dim) + static_cast<std::size_t>(c)] =
          v(c);
  return eta;
}

/// Deterministic boundary + interior sample points of a centered ball.
std::vector<Eigen::VectorXd> ball_points(int dim, double radius, int count) {
  static const double mags[8] = {1.0, 0.5, 0.75, 0.25, 0.9, 0.6, 0.35, 0.15};
  std::vector<Eigen::VectorXd> pts;
  pts.reserve(static_cast<std::size_t>(count));
  for (int j = 0; j < count; ++j) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(dim);
    int coord = (j / 2) % dim;
    double sign = (j % 2 == 0) ? 1.0 : -1.0;
    double mag = mags[(j / (2 * dim)) % 8];
    v(coord) = sign * mag * radius;
    pts.push_back(v);
  }
  return pts;
}

struct Ctx {
  ExperimentConfig cfg;
  unsigned threads = 1;
  std::string out;
  RunManifest man;
  json summary = json::object();
  std::vector<std::string> warnings;
  bool pass = true;
  std::optional<ConstantsLedger> led;

  const ConstantsLedger& ledger() {
    if (!led) led = build_ledger(cfg.system);
    return *led;
  }

  void write_text(const std::string& name, const std::string& text) {
    std::filesystem::path p = std::filesystem::path(out) / name;
    std::filesystem::create_directories(p.parent_path());
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    f << text;
    if (!f) throw std::runtime_error("cannot write " + p.string());
  }

  void require_horizon(double needed, const std::string& op) {
    if (cfg.noise.horizon + 1e-9 < needed)
      throw ConfigError("noise.horizon", "operation '" + op + "' needs horizon >= " +
                                             num17(needed));
  }

  void flag(const std::string& name, bool ok) {
    summary["pass"][name] = ok;
    pass = pass && ok;
  }

  /// Ensemble of two-sided drivers with per-path mixed seeds, cache-through.
  std::vector<TwoSidedPath> ensemble(std::size_t count, double horizon,
                                     const std::string& purpose) {
    FbmSpec base;
    base.hurst = cfg.noise.hurst;
    base.h = cfg.noise.h;
    base.horizon = horizon;
    base.dim = cfg.system.noise_dim();
    std::string cache_dir = (std::filesystem::path(out) / "cache").string();
    if (cfg.experiment.use_cache) std::filesystem::create_directories(cache_dir);

    std::vector<TwoSidedPath> paths(count);
    std::vector<std::string> warn(count);
    parallel_for(count, threads, [&](std::size_t i) {
      FbmSpec spec = base;
      spec.seed = mix_seed(cfg.noise.seed, i);
      std::vector<std::string> w;
      paths[i] = cached_fbm(spec, cache_dir, cfg.experiment.use_cache, &w);
      if (!w.empty()) warn[i] = w.front();
    });
    for (std::size_t i = 0; i < count; ++i) {
      man.seed_ledger.push_back(
          SeedEntry{purpose + "[" + std::to_string(i) + "]", mix_seed(cfg.noise.seed, i)});
      if (!warn[i].empty()) warnings.push_back(warn[i]);
    }
    return paths;
  }
};

// --- individual operations -------------------------------------------------

void op_noise(Ctx& c) {
  const double r = c.cfg.system.r;
  c.require_horizon(r, "noise");
  auto ens = c.ensemble(c.cfg.noise.paths, c.cfg.noise.horizon, "noise-path");

  std::string csv = "i,seed,sup_0r,semi_nu_0r\n";
  for (std::size_t i = 0; i < ens.size(); ++i) {
    std::size_t lo = ens[i].raw_index_at(0.0);
    Window w{lo, lo + steps_of(r, ens[i].h())};
    csv += std::to_string(i) + "," + std::to_string(mix_seed(c.cfg.noise.seed, i)) +
           "," + num17(sup_norm(ens[i].raw(), w)) + "," +
           num17(holder_semi_value(ens[i].raw(), w, c.cfg.system.nu)) + "\n";
  }
  c.write_text("noise.csv", csv);

  MeanCI gamma = gamma_moment(ens, c.cfg.system.beta, c.cfg.system.nu, r);
  c.summary["noise"] = {{"paths", ens.size()},
                        {"gamma_value", gamma.value},
                        {"gamma_ci_half", gamma.ci_half}};
  c.flag("noise_finite", std::isfinite(gamma.value));
}

void op_solve(Ctx& c) {
  const SystemSpec& spec = c.cfg.system;
  const double r = spec.r;
  const double T = static_cast<double>(c.cfg.experiment.intervals) * r;
  c.require_horizon(T, "solve");
  auto ens = c.ensemble(1, c.cfg.noise.horizon, "solve-path");
  std::size_t r_steps = steps_of(r, c.cfg.noise.h);
  GridPath eta = make_const_segment(spec.dim(), r_steps, c.cfg.noise.h,
                                    ball_points(spec.dim(), c.cfg.experiment.radius, 1)[0]);
  SolveOutput sol = solve_euler(spec, eta, ens[0], T, true);

  std::string csv = "t";
  for (int d = 0; d < spec.dim(); ++d) csv += ",y" + std::to_string(d);
  csv += "\n";
  for (std::size_t k = 0; k < sol.y.points(); ++k) {
    csv += num17(sol.y.time_at(k));
    for (int d = 0; d < spec.dim(); ++d) csv += "," + num17(sol.y.point(k)[d]);
    csv += "\n";
  }
  c.write_text("solution.csv", csv);

  std::string icsv = "n,sup,semi,weighted\n";
  for (const IntervalDiag& d : sol.intervals)
    icsv += std::to_string(d.n) + "," + num17(d.sup) + "," + num17(d.semi) + "," +
            num17(d.weighted) + "\n";
  c.write_text("intervals.csv", icsv);

  c.summary["solve"] = {{"ok", sol.ok}, {"t_end", sol.t_end()},
                        {"intervals", sol.intervals.size()}};
  c.flag("solve_finite", sol.ok);
}

void op_bounds(Ctx& c) {
  const SystemSpec& spec = c.cfg.system;
  ConstantsLedger led = c.ledger();
  if (!(led.lambda0 > 0.0)) {
    c.summary["bounds"] = {{"hypothesis_ok", false}, {"lambda0", led.lambda0}};
    c.flag("bounds_hypothesis", false);
    return;
  }
  const double r = spec.r;
  const int n_int = c.cfg.experiment.intervals;
  const double T = static_cast<double>(n_int) * r;
  c.require_horizon(T + r, "bounds");

  std::size_t n_paths = std::max<std::size_t>(2, c.cfg.noise.paths);
  auto ens = c.ensemble(n_paths, c.cfg.noise.horizon, "bounds-path");
  std::size_t r_steps = steps_of(r, c.cfg.noise.h);
  auto cloud = ball_points(spec.dim(), c.cfg.experiment.radius, c.cfg.experiment.cloud);

  std::vector<PathIntervalData> data(n_paths);
  parallel_for(n_paths, c.threads, [&](std::size_t i) {
    GridPath eta = make_const_segment(spec.dim(), r_steps, c.cfg.noise.h,
                                      cloud[i % cloud.size()]);
    SolveOutput sol = solve_euler(spec, eta, ens[i], T, false);
    data[i] = analyze_path(sol, ens[i], led, mix_seed(c.cfg.noise.seed, i));
  });

  std::size_t n_cal = (n_paths + 1) / 2;
  std::vector<PathIntervalData> cal(data.begin(), data.begin() + static_cast<std::ptrdiff_t>(n_cal));
  calibrate_ledger(led, cal, c.cfg.experiment.safety, c.cfg.noise.seed);
  // The first-interval shape constant only covers the paths it was fitted on
  // (its denominator swings by hundreds of orders of magnitude with N_0), so
  // it is fitted over the whole ensemble rather than the calibration split.
  calibrate_first_interval(led, data, c.cfg.experiment.safety, c.cfg.noise.seed);

  BoundReport rec, supb, holdb, first;
  std::size_t collapsed = 0;
  for (std::size_t i = n_cal; i < n_paths; ++i) {
    rec.merge(verify_trajectory_recurrence(data[i], led));
    supb.merge(interval_norm_bounds(data[i], led, IntervalBoundMode::supnorm));
    holdb.merge(interval_norm_bounds(data[i], led, IntervalBoundMode::holder));
    first.merge(first_interval_bounds(data[i], led));
    collapsed += data[i].collapsed ? 1 : 0;
  }
  c.write_text("bounds_recurrence.csv", bound_report_csv(rec));
  c.write_text("bounds_sup.csv", bound_report_csv(supb));
  c.write_text("bounds_holder.csv", bound_report_csv(holdb));
  c.write_text("bounds_first.csv", bound_report_csv(first));
  c.write_text("ledger.json", ledger_json(led));

  c.summary["bounds"] = {
      {"hypothesis_ok", led.hypothesis_ok},
      {"calibration_paths", n_cal},
      {"holdout_paths", n_paths - n_cal},
      {"collapsed_scans", collapsed},
      {"m2", led.m2.value},
      {"m4", led.m4.value},
      {"m9", led.m9.value},
      {"d", led.d_first.value},
      {"violations",
       {{"recurrence", rec.violations},
        {"sup", supb.violations},
        {"holder", holdb.violations},
        {"first_interval", first.violations}}}};
  bool ok = rec.violations == 0 && supb.violations == 0 && holdb.violations == 0 &&
            first.violations == 0;
  bool finite = !(rec.overflowed || supb.overflowed || holdb.overflowed ||
                  first.overflowed);
  c.flag("bounds_zero_violations", ok);
  c.flag("bounds_finite", finite);
}

void op_ghat(Ctx& c) {
  const SystemSpec& spec = c.cfg.system;
  const ConstantsLedger& led = c.ledger();
  const double r = spec.r;
  c.require_horizon(r, "ghat");
  auto ens = c.ensemble(c.cfg.noise.paths, c.cfg.noise.horizon, "ghat-path");

  std::vector<double> grid = c.cfg.experiment.c_g_grid;
  if (grid.empty()) grid = {0.2, 0.1, 0.05, 0.01};

  std::string csv = "c_g,value,ci_half,n,batches\n";
  std::vector<double> values;
  for (double cg : grid) {
    ErgodicEstimate est = birkhoff_g_hat(ens, led, cg);
    values.push_back(est.value);
    csv += num17(cg) + "," + num17(est.value) + "," + num17(est.ci_half) + "," +
           std::to_string(est.n) + "," + std::to_string(est.batches) + "\n";
  }
  ErgodicEstimate zero = birkhoff_g_hat(ens, led, 0.0);
  csv += "0," + num17(zero.value) + "," + num17(zero.ci_half) + "," +
         std::to_string(zero.n) + "," + std::to_string(zero.batches) + "\n";
  c.write_text("ghat.csv", csv);

  // Sorted descending: larger amplitude must give the strictly larger mean.
  std::vector<std::size_t> order(grid.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return grid[a] > grid[b]; });
  bool monotone = true;
  for (std::size_t i = 0; i + 1 < order.size(); ++i)
    if (grid[order[i]] > grid[order[i + 1]])
      monotone = monotone && values[order[i]] > values[order[i + 1]];

  // Monte Carlo vs single-path time average at the system amplitude.
  int windows = c.cfg.experiment.windows > 0 ? c.cfg.experiment.windows : 50;
  FbmSpec tspec;
  tspec.hurst = c.cfg.noise.hurst;
  tspec.h = c.cfg.noise.h;
  tspec.horizon = static_cast<double>(windows) * r;
  tspec.dim = spec.noise_dim();
  tspec.seed = mix_seed(c.cfg.noise.seed, 0x74696d65u);  // dedicated stream
  c.man.seed_ledger.push_back(SeedEntry{"ghat-time-average", tspec.seed});
  std::string cache_dir = (std::filesystem::path(c.out) / "cache").string();
  TwoSidedPath long_path =
      cached_fbm(tspec, cache_dir, c.cfg.experiment.use_cache, &c.warnings);
  ErgodicEstimate mc = birkhoff_g_hat(ens, led, led.c_g);
  ErgodicEstimate ta = birkhoff_time_average(long_path, led, led.c_g, windows);
  bool agree = std::abs(mc.value - ta.value) <= mc.ci_half + ta.ci_half;

  c.summary["ghat"] = {{"grid", grid},
                       {"values", values},
                       {"zero_value", zero.value},
                       {"mc_value", mc.value},
                       {"mc_ci_half", mc.ci_half},
                       {"time_average_value", ta.value},
                       {"time_average_ci_half", ta.ci_half},
                       {"windows", windows}};
  c.flag("ghat_monotone", monotone);
  c.flag("ghat_zero_is_zero", zero.value == 0.0);
  c.flag("ghat_mc_vs_time_average", agree);
}

void op_epsilon(Ctx& c) {
  const ConstantsLedger& led = c.ledger();
  const double r = c.cfg.system.r;
  c.require_horizon(r, "epsilon");
  auto ens = c.ensemble(c.cfg.noise.paths, c.cfg.noise.horizon, "epsilon-path");
  EpsilonResult res = epsilon_search(ens, led, c.cfg.experiment.epsilon_tol,
                                     c.cfg.experiment.upper_bracket);
  bool certified = res.upper_bracket_hit ||
                   (res.eps_hat > 0.0 &&
                    res.g_hat_at_eps + res.ci_at_eps < res.margin);
  double delta = (led.lambda0 * r - res.g_hat_at_eps) / 4.0;
  json out = {{"eps_hat", res.eps_hat},
              {"lo", res.lo},
              {"hi", res.hi},
              {"g_hat_at_eps", res.g_hat_at_eps},
              {"ci_at_eps", res.ci_at_eps},
              {"margin_lambda0_r", res.margin},
              {"upper_bracket_hit", res.upper_bracket_hit},
              {"certified", certified},
              {"delta", delta}};
  c.write_text("epsilon.json", out.dump(2) + "\n");
  c.summary["epsilon"] = out;
  c.flag("epsilon_certified", certified);
}

void op_pullback(Ctx& c) {
  const SystemSpec& spec = c.cfg.system;
  const ConstantsLedger& led = c.ledger();
  const double r = spec.r;
  const int depths = c.cfg.experiment.depths;
  // Shifting the driver to depth -n r shrinks its window by n r, and the
  // transport back to time 0 consumes n r more: 2 n r in total.
  c.require_horizon(2.0 * static_cast<double>(depths) * r, "pullback");
  auto ens = c.ensemble(c.cfg.noise.paths, c.cfg.noise.horizon, "pullback-path");
  std::size_t r_steps = steps_of(r, c.cfg.noise.h);

  auto pts = ball_points(spec.dim(), c.cfg.experiment.radius, c.cfg.experiment.cloud);
  std::vector<GridPath> cloud;
  for (const auto& v : pts)
    cloud.push_back(make_const_segment(spec.dim(), r_steps, c.cfg.noise.h, v));

  std::vector<PullbackRun> runs(ens.size());
  parallel_for(ens.size(), c.threads, [&](std::size_t i) {
    runs[i] = pullback_experiment(spec, cloud, ens[i], depths);
  });

  std::string csv = "path,seed,depth,diameter,max_norm,overflow\n";
  bool any_overflow = false, contracted = true;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const PullbackRun& run = runs[i];
    for (std::size_t kd = 0; kd < run.depths.size(); ++kd) {
      csv += std::to_string(i) + "," + std::to_string(mix_seed(c.cfg.noise.seed, i)) +
             "," + std::to_string(run.depths[kd]) + "," + num17(run.diameter[kd]) +
             "," + num17(run.max_norm[kd]) + "," +
             std::to_string(static_cast<int>(run.overflow[kd])) + "\n";
      any_overflow = any_overflow || run.overflow[kd];
    }
    contracted = contracted && run.diameter.back() <= run.initial_diameter;
  }
  c.write_text("pullback.csv", csv);

  ErgodicEstimate ghat = birkhoff_g_hat(ens, led, led.c_g);
  double delta = (led.lambda0 * r - ghat.value) / 4.0;
  c.summary["pullback"] = {{"depths", depths},
                           {"cloud", c.cfg.experiment.cloud},
                           {"initial_diameter", runs.empty() ? 0.0 : runs[0].initial_diameter},
                           {"g_hat", ghat.value},
                           {"delta", delta}};
  c.flag("pullback_finite", !any_overflow);
  c.flag("pullback_contracted", contracted);
}

void op_singleton(Ctx& c) {
  const SystemSpec& spec = c.cfg.system;
  const ConstantsLedger& led = c.ledger();
  const double r = spec.r;
  const int depths = c.cfg.experiment.depths;
  // As in the pullback run: depth-n transport needs a window of 2 n r.
  c.require_horizon(2.0 * static_cast<double>(depths) * r, "singleton");
  if (!functional_is_linear_homogeneous(spec.diffusion))
    throw ConfigError("system.diffusion",
                      "operation 'singleton' requires a homogeneous linear diffusion");
  auto ens = c.ensemble(c.cfg.noise.paths, c.cfg.noise.horizon, "singleton-path");
  std::size_t r_steps = steps_of(r, c.cfg.noise.h);
  double radius = c.cfg.experiment.radius;
  GridPath eta1 = make_const_segment(spec.dim(), r_steps, c.cfg.noise.h,
                                     ball_points(spec.dim(), radius, 1)[0]);
  GridPath eta2 = make_const_segment(spec.dim(), r_steps, c.cfg.noise.h,
                                     -ball_points(spec.dim(), radius, 1)[0]);

  std::vector<SingletonReport> reps(ens.size());
  parallel_for(ens.size(), c.threads, [&](std::size_t i) {
    reps[i] = singleton_test(spec, eta1, eta2, ens[i], depths);
  });

  std::string csv = "path,seed,depth,pullback_dist,forward_dist\n";
  std::vector<double> slopes;
  bool any_overflow = false;
  for (std::size_t i = 0; i < reps.size(); ++i) {
    for (int n = 1; n <= depths; ++n)
      csv += std::to_string(i) + "," + std::to_string(mix_seed(c.cfg.noise.seed, i)) +
             "," + std::to_string(n) + "," +
             num17(reps[i].pullback_dist[static_cast<std::size_t>(n - 1)]) + "," +
             num17(reps[i].forward_dist[static_cast<std::size_t>(n - 1)]) + "\n";
    slopes.push_back(reps[i].pullback_slope);
    any_overflow = any_overflow || reps[i].overflowed;
  }
  c.write_text("singleton.csv", csv);

  ErgodicEstimate ghat = birkhoff_g_hat(ens, led, led.c_g);
  double threshold = -0.5 * (led.lambda0 * r - ghat.value);
  double mean_slope = mean(slopes);
  c.summary["singleton"] = {{"mean_pullback_slope", mean_slope},
                            {"slope_threshold", threshold},
                            {"g_hat", ghat.value},
                            {"delta", (led.lambda0 * r - ghat.value) / 4.0}};
  c.flag("singleton_finite", !any_overflow);
  c.flag("singleton_slope", threshold < 0.0 ? mean_slope <= threshold : true);
}

void op_tempered(Ctx& c) {
  const SystemSpec& spec = c.cfg.system;
  const ConstantsLedger& led = c.ledger();
  const double r = spec.r;
  const int depths = c.cfg.experiment.depths;
  const int k_max = c.cfg.experiment.k_max;
  c.require_horizon(static_cast<double>(depths + k_max) * r, "tempered");
  auto ens = c.ensemble(c.cfg.noise.paths, c.cfg.noise.horizon, "tempered-path");
  std::size_t r_steps = steps_of(r, c.cfg.noise.h);

  // Per path: seminorms of every unit window [-k r, -(k-1) r], k = 1..depths+k_max,
  // measured once; H factors and absorbing partial tails reuse them.
  std::size_t total = static_cast<std::size_t>(depths + k_max);
  std::vector<std::vector<double>> semis(ens.size());
  parallel_for(ens.size(), c.threads, [&](std::size_t i) {
    semis[i].resize(total);
    for (std::size_t k = 1; k <= total; ++k) {
      std::size_t base = ens[i].raw_index_at(-static_cast<double>(k) * r);
      semis[i][k - 1] =
          holder_semi_value(ens[i].raw(), Window{base, base + r_steps}, spec.nu);
    }
  });

  // OLS slope of n -> log^+ value, taking the log values directly (the
  // factors themselves overflow doubles at moderate amplitudes).
  auto logplus_slope_of_logs = [](const std::vector<double>& logs) {
    std::vector<double> xs(logs.size()), ys(logs.size());
    for (std::size_t k = 0; k < logs.size(); ++k) {
      xs[k] = static_cast<double>(k + 1);
      ys[k] = std::max(logs[k], 0.0);
    }
    return ols_slope(xs, ys);
  };

  std::string csv = "path,seed,n,log_h,log_b_partial\n";
  std::vector<double> h_slopes, b_slopes;
  for (std::size_t i = 0; i < ens.size(); ++i) {
    std::vector<double> lh(static_cast<std::size_t>(depths));
    std::vector<double> lb(static_cast<std::size_t>(depths));
    for (int n = 1; n <= depths; ++n) {
      GHFactors gh = gh_from_semi(semis[i][static_cast<std::size_t>(n - 1)], led, led.c_g);
      lh[static_cast<std::size_t>(n - 1)] = gh.log_h;
      // Base absorbing sum started at depth n (windows n+1 .. n+k_max),
      // including the leading 1, assembled as a log-sum-exp.
      double log_prod = 0.0, peak = 0.0;
      std::vector<double> lts(static_cast<std::size_t>(k_max));
      for (int k = 1; k <= k_max; ++k) {
        double sk = semis[i][static_cast<std::size_t>(n + k - 1)];
        GHFactors gk = gh_from_semi(sk, led, led.c_g);
        log_prod += log_contraction_factor(sk, led, led.c_g);
        double lt = -led.lambda0 * static_cast<double>(k) * r + gk.log_h + log_prod;
        lts[static_cast<std::size_t>(k - 1)] = lt;
        peak = std::max(peak, lt);
      }
      double acc = std::exp(-peak);
      for (double lt : lts) acc += std::exp(lt - peak);
      double log_b = peak + std::log(acc);
      lb[static_cast<std::size_t>(n - 1)] = log_b;
      csv += std::to_string(i) + "," + std::to_string(mix_seed(c.cfg.noise.seed, i)) +
             "," + std::to_string(n) + "," + num17(gh.log_h) + "," +
             num17(log_b) + "\n";
    }
    h_slopes.push_back(logplus_slope_of_logs(lh));
    b_slopes.push_back(logplus_slope_of_logs(lb));
  }
  c.write_text("tempered.csv", csv);

  double h_slope = mean(h_slopes), b_slope = mean(b_slopes);
  c.summary["tempered"] = {{"mean_h_slope", h_slope},
                           {"mean_b_slope", b_slope},
                           {"depths", depths},
                           {"k_max", k_max}};
  c.flag("tempered_h", std::abs(h_slope) <= 0.05);
  c.flag("tempered_b", std::isfinite(b_slope) && std::abs(b_slope) <= 0.05);
}

void op_bounded_g(Ctx& c) {
  const SystemSpec& spec = c.cfg.system;
  if (!std::isfinite(functional_sup_bound(spec.diffusion)))
    throw ConfigError("system.diffusion",
                      "operation 'bounded-g' requires a bounded (saturating) diffusion");
  const double r = spec.r;
  const int n_int = c.cfg.experiment.intervals;
  const double T = static_cast<double>(n_int) * r;
  c.require_horizon(T, "bounded-g");
  auto ens = c.ensemble(c.cfg.noise.paths, c.cfg.noise.horizon, "bounded-g-path");
  std::size_t r_steps = steps_of(r, c.cfg.noise.h);

  auto pts = ball_points(spec.dim(), 10.0 * c.cfg.experiment.radius,
                         static_cast<int>(ens.size()));
  std::vector<GridPath> etas;
  for (std::size_t i = 0; i < ens.size(); ++i)
    etas.push_back(make_const_segment(spec.dim(), r_steps, c.cfg.noise.h,
                                      pts[i % pts.size()]));

  std::vector<int> k0_grid = c.cfg.experiment.k0_grid;
  if (k0_grid.empty())
    for (int k : {1, 2, 3, 4, 5, 8, 10, 15, 20})
      if (k < n_int) k0_grid.push_back(k);

  ContractionReport rep = bounded_g_contraction(spec, etas, ens, k0_grid, T,
                                                c.cfg.experiment.safety);

  std::string csv = "k0,median_factor\n";
  for (std::size_t i = 0; i < rep.k0_grid.size(); ++i)
    csv += std::to_string(rep.k0_grid[i]) + "," + num17(rep.median_factor[i]) + "\n";
  c.write_text("bounded_g.csv", csv);
  std::string bcsv = "path,block,weighted_norm\n";
  for (std::size_t i = 0; i < rep.block_norms.size(); ++i)
    for (std::size_t m = 0; m < rep.block_norms[i].size(); ++m)
      bcsv += std::to_string(i) + "," + std::to_string(m) + "," +
              num17(rep.block_norms[i][m]) + "\n";
  c.write_text("bounded_g_blocks.csv", bcsv);

  // Exactness of the smooth + rough splitting on one trajectory.
  int k0 = rep.chosen_k0 > 1 ? rep.chosen_k0 : 2;
  double recon = 0.0;
  if (static_cast<double>(k0) * r < T) {
    MuHDecomposition dec = decompose_mu_h(spec, etas[0], ens[0], T, k0);
    std::size_t off = dec.y.r_steps;  // mu/h start at time 0, y starts at -r
    for (std::size_t k = 0; k < dec.mu.points(); ++k)
      for (int d = 0; d < spec.dim(); ++d)
        recon = std::max(recon, std::abs(dec.mu.point(k)[d] + dec.h_path.point(k)[d] -
                                         dec.y.y.point(k + off)[d]));
  }

  c.summary["bounded_g"] = {{"chosen_k0", rep.chosen_k0},
                            {"fitted_radius", rep.fitted_radius},
                            {"max_norm", rep.max_norm},
                            {"overflow_count", rep.overflow_count},
                            {"reconstruction_error", recon}};
  c.flag("bounded_g_finite", rep.overflow_count == 0);
  c.flag("bounded_g_contracts", rep.chosen_k0 > 0);
  c.flag("bounded_g_reconstruction", recon <= 1e-12);
}

void dispatch(Ctx& c, const std::string& op) {
  if (op == "noise") return op_noise(c);
  if (op == "solve") return op_solve(c);
  if (op == "bounds") return op_bounds(c);
  if (op == "ghat") return op_ghat(c);
  if (op == "epsilon") return op_epsilon(c);
  if (op == "pullback") return op_pullback(c);
  if (op == "singleton") return op_singleton(c);
  if (op == "tempered") return op_tempered(c);
  if (op == "bounded-g") return op_bounded_g(c);
  throw ConfigError("experiment.operation", "unknown operation '" + op + "'");
}

void run_all(Ctx& c) {
  for (const std::string& op : valid_operations()) {
    if (op == "all") continue;
    if (op == "singleton" && !functional_is_linear_homogeneous(c.cfg.system.diffusion)) {
      c.summary["skipped"].push_back(op);
      continue;
    }
    if (op == "bounded-g" && !std::isfinite(functional_sup_bound(c.cfg.system.diffusion))) {
      c.summary["skipped"].push_back(op);
      continue;
    }
    dispatch(c, op);
  }
}

void finalize(Ctx& c, std::chrono::steady_clock::time_point t0, int exit_code) {
  // No thread count or timing here: summary.json is a data artifact and must
  // be identical for identical (config, seed) at any parallelism degree.
  // Wall clock lives in the manifest, which documents the run.
  c.summary["code_version"] = kCodeVersion;
  c.summary["config_hash"] = c.man.config_hash;
  c.summary["operation"] = c.cfg.experiment.operation;
  c.summary["kernel_backend"] = kernels::active().name;
  c.summary["warnings"] = c.warnings;
  c.summary["all_pass"] = c.pass;
  c.write_text("summary.json", c.summary.dump(2) + "\n");

  // Manifest lists every file in the output directory (sorted), except itself.
  std::vector<std::string> files;
  for (const auto& entry :
       std::filesystem::recursive_directory_iterator(c.out))
    if (entry.is_regular_file()) {
      std::string rel =
          std::filesystem::relative(entry.path(), c.out).generic_string();
      if (rel != "manifest.json") files.push_back(rel);
    }
  std::sort(files.begin(), files.end());
  for (const std::string& f : files) manifest_add_file(c.man, c.out, f);

  c.man.base_seed = c.cfg.noise.seed;
  c.man.exit_status = exit_code;
  c.man.wall_clock_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_manifest(c.man, c.out);
}

}  // namespace

int run_experiment(const RunOptions& opts) {
  auto t0 = std::chrono::steady_clock::now();
  Ctx c;
  try {
    c.cfg = load_config_file(opts.config_path);
    if (!opts.subcommand.empty()) {
      bool known = false;
      for (const std::string& op : valid_operations())
        known = known || op == opts.subcommand;
      if (!known)
        throw ConfigError("experiment.operation",
                          "unknown operation '" + opts.subcommand + "'");
      c.cfg.experiment.operation = opts.subcommand;
    }
    if (opts.seed) c.cfg.noise.seed = *opts.seed;
    if (opts.out_dir) c.cfg.experiment.out_dir = *opts.out_dir;
    kernels::force_backend(opts.kernels.c_str());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  }

  c.threads = std::max(1u, opts.threads);
  c.out = c.cfg.experiment.out_dir;
  c.man.config_hash = config_hash(c.cfg);

  int code = 0;
  try {
    std::filesystem::create_directories(c.out);
    if (c.cfg.experiment.operation == "all")
      run_all(c);
    else
      dispatch(c, c.cfg.experiment.operation);
    code = c.pass ? 0 : 3;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    c.summary["error"] = e.what();
    code = 3;
  }
  try {
    finalize(c, t0, code);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "failed to write artifacts: %s\n", e.what());
    code = code == 0 ? 3 : code;
  }
  return code;
}

}  // namespace ydl
