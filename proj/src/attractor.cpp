#include "ydl/attractor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "ydl/functional.hpp"
#include "ydl/holder.hpp"
#include "ydl/stats.hpp"

namespace ydl {

namespace {

std::size_t r_steps_of(const TwoSidedPath& x, double r) {
  return steps_of(r, x.raw().h);
}

double window_semi(const TwoSidedPath& x, double t_lo, double r, double nu) {
  std::size_t base = x.raw_index_at(t_lo);
  Window w{base, base + r_steps_of(x, r)};
  return holder_semi_value(x.raw(), w, nu);
}

MeanCI estimate_from_values(const std::vector<double>& vals) {
  std::size_t batches = std::min<std::size_t>(20, std::max<std::size_t>(1, vals.size()));
  return batch_means(vals, batches);
}

double weighted_distance(const GridPath& a, const GridPath& b, double beta) {
  GridPath diff = path_difference(a, b);
  return window_norms(diff, Window{0, diff.points() - 1}, beta).weighted;
}

GridPath terminal_segment(const GridPath& y, std::size_t r_steps) {
  GridPath seg;
  seg.t0 = -static_cast<double>(r_steps) * y.h;
  seg.h = y.h;
  seg.dim = y.dim;
  std::size_t last = y.points() - 1;
  seg.values.assign(y.values.begin() + static_cast<std::ptrdiff_t>((last - r_steps) * y.dim),
                    y.values.end());
  return seg;
}

}  // namespace

GHFactors gh_from_semi(double x_semi, const ConstantsLedger& led, double c_g) {
  if (x_semi < 0.0 || c_g < 0.0)
    throw std::invalid_argument("gh_from_semi: seminorm and amplitude must be nonnegative");
  GHFactors out;
  out.x_semi = x_semi;
  double e = 1.0 / (led.nu - led.beta);
  double bracket = 2.0 * (led.k_big + 1.0) * c_g * std::pow(led.r, led.nu);
  out.f = 1.0 + std::pow(bracket, e) * std::pow(x_semi, e);
  double e0 = 1.0 / (led.nu - led.beta0);
  double bracket0 = 2.0 * (led.k0_big + 1.0) * c_g * std::pow(led.r, led.nu);
  out.f_first = 1.0 + std::pow(bracket0, e0) * std::pow(x_semi, e0);
  double ekf = std::exp(led.kappa * out.f);
  out.g = x_semi * (1.0 + ekf);
  out.h = (1.0 + x_semi) * ekf;
  out.log_h = led.kappa * out.f + std::log1p(x_semi);
  return out;
}

GHFactors g_h_factors(const GridPath& x, Window w, const ConstantsLedger& led,
                      double c_g) {
  return gh_from_semi(holder_semi_value(x, w, led.nu), led, c_g);
}

double log_contraction_factor(double x_semi, const ConstantsLedger& led, double c_g) {
  GHFactors gh = gh_from_semi(x_semi, led, c_g);
  if (c_g == 0.0 || x_semi == 0.0) return 0.0;  // G or the prefactor vanishes
  // 1 + c M7 G = 1 + c M7 X + c M7 X e^{kappa F} = 1 + e^t + e^{t+s}.
  double t = std::log(c_g * led.m7 * x_semi);
  double s = led.kappa * gh.f;
  double m = std::max({0.0, t, t + s});
  return m + std::log(std::exp(-m) + std::exp(t - m) + std::exp(t + s - m));
}

double log_factor_majorant(double x_semi, const ConstantsLedger& led, double c_g) {
  if (x_semi < 0.0 || c_g < 0.0)
    throw std::invalid_argument("log_factor_majorant: arguments must be nonnegative");
  double e = 1.0 / (led.nu - led.beta);
  double bracket = 4.0 * (led.k_big + 1.0) * c_g * std::pow(led.r, led.nu);
  return led.kappa + 2.0 * c_g * led.m7 * x_semi +
         led.kappa * std::pow(bracket, e) * std::pow(x_semi, e);
}

ErgodicEstimate birkhoff_g_hat(const std::vector<TwoSidedPath>& ensemble,
                               const ConstantsLedger& led, double c_g) {
  if (ensemble.empty())
    throw std::invalid_argument("birkhoff_g_hat: empty ensemble");
  std::vector<double> vals(ensemble.size());
  for (std::size_t i = 0; i < ensemble.size(); ++i)
    vals[i] = log_contraction_factor(window_semi(ensemble[i], 0.0, led.r, led.nu),
                                     led, c_g);
  MeanCI ci = estimate_from_values(vals);
  return ErgodicEstimate{"G_hat (Monte Carlo)", ci.value, ci.ci_half, ci.n,
                         static_cast<int>(ci.batches)};
}

ErgodicEstimate birkhoff_time_average(const TwoSidedPath& x, const ConstantsLedger& led,
                                      double c_g, int n_windows) {
  if (n_windows < 1)
    throw std::invalid_argument("birkhoff_time_average: need at least one window");
  std::vector<double> vals(static_cast<std::size_t>(n_windows));
  for (int k = 0; k < n_windows; ++k)
    vals[static_cast<std::size_t>(k)] = log_contraction_factor(
        window_semi(x, static_cast<double>(k) * led.r, led.r, led.nu), led, c_g);
  MeanCI ci = estimate_from_values(vals);
  return ErgodicEstimate{"G_hat (time average)", ci.value, ci.ci_half, ci.n,
                         static_cast<int>(ci.batches)};
}

EpsilonResult epsilon_search(const std::vector<TwoSidedPath>& ensemble,
                             const ConstantsLedger& led, double tol,
                             double upper_bracket) {
  if (!(led.lambda0 > 0.0))
    throw std::invalid_argument(
        "epsilon_search: lambda0 must be positive for the smallness certificate");
  if (ensemble.empty()) throw std::invalid_argument("epsilon_search: empty ensemble");
  if (!(tol > 0.0) || !(upper_bracket > 0.0))
    throw std::invalid_argument("epsilon_search: tol and upper_bracket must be positive");

  // Window seminorms are independent of c_g: measure once, reuse at every
  // trial amplitude (common random numbers; the estimate is then exactly
  // monotone in c_g).
  std::vector<double> semis(ensemble.size());
  for (std::size_t i = 0; i < ensemble.size(); ++i)
    semis[i] = window_semi(ensemble[i], 0.0, led.r, led.nu);

  auto evaluate = [&](double c) {
    std::vector<double> vals(semis.size());
    for (std::size_t i = 0; i < semis.size(); ++i)
      vals[i] = log_contraction_factor(semis[i], led, c);
    return estimate_from_values(vals);
  };

  EpsilonResult res;
  res.margin = led.lambda0 * led.r;

  MeanCI top = evaluate(upper_bracket);
  if (top.value + top.ci_half < res.margin) {
    res.eps_hat = res.lo = res.hi = upper_bracket;
    res.g_hat_at_eps = top.value;
    res.ci_at_eps = top.ci_half;
    res.upper_bracket_hit = true;
    return res;
  }

  // Descend geometrically until some amplitude qualifies (the estimate tends
  // to 0 with c_g, so this terminates unless the margin is unreachable even
  // at denormal amplitudes).
  double lo = upper_bracket, hi = upper_bracket;
  MeanCI at_lo;
  bool found = false;
  while (lo > 1e-300) {
    hi = lo;
    lo *= 0.125;
    at_lo = evaluate(lo);
    if (at_lo.value + at_lo.ci_half < res.margin) {
      found = true;
      break;
    }
  }
  if (!found) {
    res.eps_hat = res.lo = 0.0;
    res.hi = hi;
    return res;
  }

  // Log-space bisection; cap the final ratio at 2 so that
  // Ghat(2 eps) >= Ghat(hi) >= margin - CI (two-sided certificate).
  double target = 1.0 + std::min(tol, 1.0);
  while (hi / lo > target) {
    double mid = lo * std::sqrt(hi / lo);
    MeanCI est = evaluate(mid);
    if (est.value + est.ci_half < res.margin) {
      lo = mid;
      at_lo = est;
    } else {
      hi = mid;
    }
  }
  res.eps_hat = lo;
  res.lo = lo;
  res.hi = hi;
  res.g_hat_at_eps = at_lo.value;
  res.ci_at_eps = at_lo.ci_half;
  return res;
}

AbsorbingSums absorbing_radius(const TwoSidedPath& x, const ConstantsLedger& led,
                               double c_g, double f0, double g0, int k_max) {
  if (!(led.lambda0 > 0.0))
    throw std::invalid_argument("absorbing_radius: lambda0 must be positive");
  if (!(led.m8 > 0.0))
    throw std::runtime_error(
        "absorbing_radius: the ledger must carry fitted constants (M8 unset)");
  if (k_max < 1) throw std::invalid_argument("absorbing_radius: k_max must be >= 1");
  double fg = std::max(f0, g0);

  AbsorbingSums out;
  out.partial.reserve(static_cast<std::size_t>(k_max) + 1);
  out.terms.reserve(static_cast<std::size_t>(k_max));
  out.log_terms.reserve(static_cast<std::size_t>(k_max));
  out.partial.push_back(1.0);
  double log_prod = 0.0;
  for (int k = 1; k <= k_max; ++k) {
    double semi = window_semi(x, -static_cast<double>(k) * led.r, led.r, led.nu);
    GHFactors gh = gh_from_semi(semi, led, c_g);
    log_prod += log_contraction_factor(semi, led, c_g);
    double log_term = -led.lambda0 * static_cast<double>(k) * led.r + gh.log_h + log_prod;
    double term = std::exp(log_term);  // +inf once the divergent tail overflows
    double s = out.partial.back() + (fg > 0.0 ? led.m8 * fg * term : 0.0);
    out.log_terms.push_back(log_term);
    out.terms.push_back(term);
    out.partial.push_back(s);
    out.overflowed = out.overflowed || !std::isfinite(s);
  }

  std::size_t m = out.log_terms.size();
  if (m >= 2) {
    std::size_t lo = m >= 8 ? m / 2 : 0;  // tail window once transients die out
    std::vector<double> xs, ys;
    for (std::size_t j = lo; j < m; ++j) {
      xs.push_back(static_cast<double>(j + 1));
      ys.push_back(out.log_terms[j]);
    }
    out.tail_log_slope = ols_slope(xs, ys);
  }
  out.diverging = out.tail_log_slope > 0.0 || out.overflowed;
  return out;
}

PullbackRun pullback_experiment(const SystemSpec& spec,
                                const std::vector<GridPath>& initial_segments,
                                const TwoSidedPath& x, int n_max) {
  if (initial_segments.empty())
    throw std::invalid_argument("pullback_experiment: empty initial cloud");
  if (n_max < 1) throw std::invalid_argument("pullback_experiment: n_max must be >= 1");
  const std::size_t cloud = initial_segments.size();
  const std::size_t r_steps = r_steps_of(x, spec.r);

  PullbackRun run;
  for (std::size_t i = 0; i < cloud; ++i)
    for (std::size_t j = i + 1; j < cloud; ++j)
      run.initial_diameter =
          std::max(run.initial_diameter,
                   weighted_distance(initial_segments[i], initial_segments[j], spec.beta));

  for (int n = 1; n <= n_max; ++n) {
    TwoSidedPath xs = shift_path(x, -static_cast<double>(n) * spec.r);
    std::vector<GridPath> segs(cloud);
    bool bad = false;
    for (std::size_t i = 0; i < cloud; ++i) {
      SolveOutput sol = solve_euler(spec, initial_segments[i], xs,
                                    static_cast<double>(n) * spec.r, false);
      bad = bad || !sol.ok;
      segs[i] = terminal_segment(sol.y, r_steps);
    }
    double diam = 0.0, max_norm = 0.0;
    if (bad) {
      diam = max_norm = std::numeric_limits<double>::infinity();
    } else {
      for (std::size_t i = 0; i < cloud; ++i) {
        max_norm = std::max(
            max_norm, window_norms(segs[i], Window{0, r_steps}, spec.beta).weighted);
        for (std::size_t j = i + 1; j < cloud; ++j)
          diam = std::max(diam, weighted_distance(segs[i], segs[j], spec.beta));
      }
    }
    run.depths.push_back(n);
    run.diameter.push_back(diam);
    run.max_norm.push_back(max_norm);
    run.overflow.push_back(bad ? 1 : 0);
    if (n == n_max) run.deepest_segments = std::move(segs);
  }
  return run;
}

double logplus_slope(const std::vector<double>& vals) {
  if (vals.size() < 2) return 0.0;
  std::vector<double> xs(vals.size()), ys(vals.size());
  for (std::size_t i = 0; i < vals.size(); ++i) {
    xs[i] = static_cast<double>(i + 1);
    ys[i] = std::log(std::max(vals[i], 1.0));
  }
  return ols_slope(xs, ys);
}

std::vector<double> shifted_factor_sequence(const TwoSidedPath& x,
                                            const ConstantsLedger& led, double c_g,
                                            int n_max, bool backward, char which) {
  if (n_max < 1)
    throw std::invalid_argument("shifted_factor_sequence: n_max must be >= 1");
  std::vector<double> vals(static_cast<std::size_t>(n_max));
  for (int n = 1; n <= n_max; ++n) {
    double t_lo = backward ? -static_cast<double>(n) * led.r
                           : static_cast<double>(n) * led.r;
    double semi = window_semi(x, t_lo, led.r, led.nu);
    GHFactors gh = gh_from_semi(semi, led, c_g);
    double v = 0.0;
    switch (which) {
      case 'H': v = gh.h; break;
      case 'G': v = gh.g; break;
      case 'X': v = semi; break;
      default:
        throw std::invalid_argument("shifted_factor_sequence: which must be H, G or X");
    }
    vals[static_cast<std::size_t>(n - 1)] = v;
  }
  return vals;
}

SingletonReport singleton_test(const SystemSpec& spec, const GridPath& eta1,
                               const GridPath& eta2, const TwoSidedPath& x,
                               int n_max) {
  if (!functional_is_linear_homogeneous(spec.diffusion))
    throw std::invalid_argument(
        "singleton_test: requires a homogeneous linear diffusion (difference of "
        "solutions must again be a solution)");
  if (n_max < 1) throw std::invalid_argument("singleton_test: n_max must be >= 1");
  const std::size_t r_steps = r_steps_of(x, spec.r);

  SingletonReport rep;

  // Pullback distances: a two-point cloud transported from depth -n r.
  PullbackRun run = pullback_experiment(spec, {eta1, eta2}, x, n_max);
  rep.pullback_dist = run.diameter;
  for (char b : run.overflow) rep.overflowed = rep.overflowed || b != 0;

  // Forward distances along one fixed driver realization.
  double T = static_cast<double>(n_max) * spec.r;
  SolveOutput s1 = solve_euler(spec, eta1, x, T, false);
  SolveOutput s2 = solve_euler(spec, eta2, x, T, false);
  rep.overflowed = rep.overflowed || !s1.ok || !s2.ok;
  GridPath diff = path_difference(s1.y, s2.y);
  rep.forward_dist.resize(static_cast<std::size_t>(n_max));
  for (int n = 1; n <= n_max; ++n) {
    Window w{static_cast<std::size_t>(n) * r_steps,
             static_cast<std::size_t>(n + 1) * r_steps};
    rep.forward_dist[static_cast<std::size_t>(n - 1)] =
        (s1.ok && s2.ok) ? window_norms(diff, w, spec.beta).weighted
                         : std::numeric_limits<double>::infinity();
  }

  auto slope_of = [](const std::vector<double>& d) {
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (d[i] > 0.0 && std::isfinite(d[i])) {
        xs.push_back(static_cast<double>(i + 1));
        ys.push_back(std::log(d[i]));
      }
    }
    return xs.size() >= 2 ? ols_slope(xs, ys) : 0.0;
  };
  rep.pullback_slope = slope_of(rep.pullback_dist);
  rep.forward_slope = slope_of(rep.forward_dist);
  return rep;
}

ContractionReport bounded_g_contraction(const SystemSpec& spec,
                                        const std::vector<GridPath>& etas,
                                        const std::vector<TwoSidedPath>& xs,
                                        const std::vector<int>& k0_grid, double T,
                                        double safety) {
  if (!std::isfinite(functional_sup_bound(spec.diffusion)))
    throw std::invalid_argument(
        "bounded_g_contraction: requires a diffusion with a finite sup bound");
  if (etas.empty() || etas.size() != xs.size())
    throw std::invalid_argument(
        "bounded_g_contraction: need matching nonempty initial data and drivers");
  if (k0_grid.empty())
    throw std::invalid_argument("bounded_g_contraction: empty block-length grid");

  ContractionReport rep;
  rep.k0_grid = k0_grid;

  std::vector<std::vector<double>> w(etas.size());
  for (std::size_t i = 0; i < etas.size(); ++i) {
    SolveOutput sol = solve_euler(spec, etas[i], xs[i], T, true);
    if (!sol.ok) {
      ++rep.overflow_count;
      continue;
    }
    w[i].reserve(sol.intervals.size());
    for (const IntervalDiag& d : sol.intervals) {
      w[i].push_back(d.weighted);
      rep.max_norm = std::max(rep.max_norm, d.weighted);
    }
  }

  for (int k0 : k0_grid) {
    std::vector<double> factors;
    for (const auto& wi : w) {
      if (wi.size() > static_cast<std::size_t>(k0) && wi[0] > 0.0)
        factors.push_back(wi[static_cast<std::size_t>(k0)] / wi[0]);
    }
    double med = factors.empty() ? std::numeric_limits<double>::quiet_NaN()
                                 : quantile(factors, 0.5);
    rep.median_factor.push_back(med);
    if (rep.chosen_k0 < 0 && med < 1.0) rep.chosen_k0 = k0;
  }

  if (rep.chosen_k0 > 0) {
    double raw = 0.0;
    bool any_tail = false;
    for (const auto& wi : w) {
      if (wi.empty()) continue;
      std::vector<double> blocks;
      for (std::size_t m = 0; m * static_cast<std::size_t>(rep.chosen_k0) < wi.size();
           ++m)
        blocks.push_back(wi[m * static_cast<std::size_t>(rep.chosen_k0)]);
      // Tail blocks only: the initial datum may be arbitrarily large.
      std::size_t lo = std::max<std::size_t>(1, blocks.size() / 2);
      for (std::size_t m = lo; m < blocks.size(); ++m) {
        raw = std::max(raw, blocks[m]);
        any_tail = true;
      }
      rep.block_norms.push_back(std::move(blocks));
    }
    if (any_tail) rep.fitted_radius = safety * raw;
  }
  return rep;
}

}  // namespace ydl
