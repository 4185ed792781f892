#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "ydl/attractor.hpp"
#include "ydl/holder.hpp"
#include "ydl/system.hpp"

using namespace ydl;

namespace {

ConstantsLedger desk_ledger() { return build_ledger(desk_system()); }

ConstantsLedger fitted_desk_ledger() {
  auto led = desk_ledger();
  FittedConstant m2;
  m2.raw = 2.0;
  m2.value = 3.0;
  m2.safety = 1.5;
  m2.provenance = "fitted";
  FittedConstant m4 = m2;
  m4.raw = 4.0;
  m4.value = 6.0;
  set_fitted_m2_m4(led, m2, m4);
  return led;
}

TwoSidedPath driver(double h, double horizon, std::uint64_t seed) {
  FbmSpec spec;
  spec.hurst = 0.75;
  spec.h = h;
  spec.horizon = horizon;
  spec.seed = seed;
  return sample_fbm_two_sided(spec);
}

std::vector<TwoSidedPath> ensemble(double h, double horizon, std::uint64_t base,
                                   std::size_t n) {
  std::vector<TwoSidedPath> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(driver(h, horizon, mix_seed(base, i)));
  return out;
}

GridPath const_eta(double h, double v) {
  GridPath eta;
  eta.t0 = -1.0;
  eta.h = h;
  eta.dim = 1;
  eta.values.assign(static_cast<std::size_t>(std::lround(1.0 / h)) + 1, v);
  return eta;
}

SystemSpec homogeneous_system(double drift_coef, double diff_coef) {
  SystemSpec s = desk_system();
  PointDelayLinear f;
  f.offset = Eigen::MatrixXd::Zero(1, 1);
  f.columns = {{LinearTerm{1.0, Eigen::MatrixXd::Constant(1, 1, drift_coef)}}};
  s.drift = f;
  PointDelayLinear g;
  g.offset = Eigen::MatrixXd::Zero(1, 1);
  g.columns = {{LinearTerm{1.0, Eigen::MatrixXd::Constant(1, 1, diff_coef)}}};
  s.diffusion = g;
  return s;
}

}  // namespace

TEST_CASE("path factors at zero seminorm and at zero amplitude") {
  auto led = desk_ledger();
  auto z = gh_from_semi(0.0, led, 0.05);
  CHECK(z.f == 1.0);
  CHECK(z.f_first == 1.0);
  CHECK(z.g == 0.0);
  CHECK(z.h == doctest::Approx(std::exp(led.kappa)).epsilon(1e-14));
  CHECK(z.log_h == doctest::Approx(led.kappa).epsilon(1e-14));

  auto nc = gh_from_semi(0.8, led, 0.0);  // C_g = 0: count bound collapses to 1
  CHECK(nc.f == 1.0);
  CHECK(nc.g == doctest::Approx(0.8 * (1.0 + std::exp(led.kappa))).epsilon(1e-13));
  CHECK(nc.h == doctest::Approx(1.8 * std::exp(led.kappa)).epsilon(1e-13));
  CHECK(log_contraction_factor(0.8, led, 0.0) == 0.0);
  CHECK(log_contraction_factor(0.0, led, 0.05) == 0.0);

  CHECK_THROWS_AS(gh_from_semi(-1.0, led, 0.05), std::invalid_argument);
}

TEST_CASE("log factor equals log(1 + C_g M7 G) where that is representable") {
  auto led = desk_ledger();
  for (double x : {1e-4, 0.05, 0.3, 0.9}) {
    for (double cg : {1e-6, 0.01, 0.05}) {
      auto gh = gh_from_semi(x, led, cg);
      if (!std::isfinite(gh.g)) continue;
      const double direct = std::log1p(cg * led.m7 * gh.g);
      if (!std::isfinite(direct)) continue;
      CHECK(log_contraction_factor(x, led, cg) ==
            doctest::Approx(direct).epsilon(1e-12));
    }
  }
  // far beyond double range the log-space value keeps growing smoothly
  const double big = log_contraction_factor(5.0, led, 0.2);
  CHECK(std::isfinite(big));
  CHECK(big > 700.0);  // e^{big} would overflow: only computable in log space
  CHECK(log_contraction_factor(5.0, led, 0.2) < log_contraction_factor(6.0, led, 0.2));
}

TEST_CASE("the closed-form majorant dominates the log factor") {
  auto led = desk_ledger();
  for (double x : {0.0, 1e-6, 1e-2, 0.3, 1.0, 3.0, 10.0, 100.0}) {
    for (double cg : {0.0, 1e-8, 1e-3, 0.05, 0.2, 1.0, 10.0}) {
      CHECK(log_contraction_factor(x, led, cg) <=
            log_factor_majorant(x, led, cg) + 1e-12);
    }
  }
  CHECK(log_factor_majorant(0.0, led, 0.0) == doctest::Approx(led.kappa));
}

TEST_CASE("window factors match the seminorm route") {
  auto led = desk_ledger();
  auto x = driver(1.0 / 128.0, 2.0, 77);
  auto m = x.materialize();
  Window w{0, 128};
  auto a = g_h_factors(m, w, led, 0.05);
  auto b = gh_from_semi(holder_semi_value(m, w, led.nu), led, 0.05);
  CHECK(a.x_semi == b.x_semi);
  CHECK(a.f == b.f);
  CHECK(a.log_h == b.log_h);
}

TEST_CASE("ergodic average: zero at zero amplitude, strictly monotone, finite") {
  auto led = desk_ledger();
  auto ens = ensemble(1.0 / 128.0, 1.0, 2222, 48);
  CHECK(birkhoff_g_hat(ens, led, 0.0).value == 0.0);
  double prev = 0.0;
  for (double cg : {0.01, 0.05, 0.1, 0.2}) {
    auto est = birkhoff_g_hat(ens, led, cg);
    CHECK(std::isfinite(est.value));
    CHECK(est.value > prev);
    CHECK(est.n == 48);
    CHECK(est.ci_half > 0.0);
    prev = est.value;
  }
  CHECK_THROWS_AS(birkhoff_g_hat({}, led, 0.05), std::invalid_argument);
}

TEST_CASE("Monte Carlo and time averages estimate the same functional") {
  auto led = desk_ledger();
  const double cg = 0.02;
  auto mc = birkhoff_g_hat(ensemble(1.0 / 128.0, 1.0, 3333, 64), led, cg);
  auto x = driver(1.0 / 128.0, 64.0, 91);
  auto ta = birkhoff_time_average(x, led, cg, 60);
  CHECK(std::isfinite(ta.value));
  CHECK(ta.n == 60);
  CHECK(std::fabs(mc.value - ta.value) <=
        2.0 * (mc.ci_half + ta.ci_half) + 0.1 * std::fabs(mc.value));
  CHECK_THROWS_AS(birkhoff_time_average(x, led, cg, 0), std::invalid_argument);
}

TEST_CASE("epsilon search certifies a positive amplitude under the margin") {
  auto led = desk_ledger();
  auto ens = ensemble(1.0 / 128.0, 1.0, 4444, 32);
  auto res = epsilon_search(ens, led, 1e-2);
  CHECK(res.margin == doctest::Approx(led.lambda0 * led.r).epsilon(1e-15));
  CHECK(res.eps_hat > 0.0);
  CHECK(res.eps_hat == res.lo);
  CHECK(res.hi / res.lo <= 1.0 + 1e-2 + 1e-12);
  CHECK(res.g_hat_at_eps + res.ci_at_eps < res.margin);
  // the upper end of the bracket fails the margin test: two-sided certificate
  auto at_hi = birkhoff_g_hat(ens, led, res.hi);
  CHECK(at_hi.value + at_hi.ci_half >= res.margin);

  // shrinking the tolerance only sharpens the bracket from below
  auto coarse = epsilon_search(ens, led, 0.5);
  CHECK(coarse.eps_hat <= res.eps_hat * (1.0 + 1e-12));

  // a tiny upper bracket that already qualifies is returned as-is
  auto tiny = epsilon_search(ens, led, 1e-2, 1e-12);
  CHECK(tiny.upper_bracket_hit);
  CHECK(tiny.eps_hat == 1e-12);

  auto strong = desk_system();
  PointDelayLinear f;
  f.offset = Eigen::MatrixXd::Zero(1, 1);
  f.columns = {{LinearTerm{1.0, Eigen::MatrixXd::Constant(1, 1, 0.5)}}};
  strong.drift = f;
  auto bad = build_ledger(strong);
  CHECK_THROWS_AS(epsilon_search(ens, bad, 1e-2), std::invalid_argument);
  CHECK_THROWS_AS(epsilon_search(ens, led, 0.0), std::invalid_argument);
}

TEST_CASE("absorbing sums: trivial offset, pure decay, and divergence detection") {
  auto led = fitted_desk_ledger();
  auto x = driver(1.0 / 64.0, 40.0, 5150);

  // f(0) = g(0) = 0: b == 1, every partial sum is exactly 1
  auto triv = absorbing_radius(x, led, 0.05, 0.0, 0.0, 30);
  REQUIRE(triv.partial.size() == 31);
  for (double s : triv.partial) CHECK(s == 1.0);
  CHECK(!triv.overflowed);

  // C_g = 0: the product collapses and terms decay like e^{-lambda0 k r}
  auto dec = absorbing_radius(x, led, 0.0, 0.0, 0.05, 38);
  CHECK(!dec.diverging);
  CHECK(!dec.overflowed);
  CHECK(dec.tail_log_slope ==
        doctest::Approx(-led.lambda0 * led.r).epsilon(0.25));
  CHECK(dec.partial.back() > 1.0);
  CHECK(std::isfinite(dec.partial.back()));
  // partial sums are nondecreasing
  for (std::size_t k = 1; k < dec.partial.size(); ++k)
    CHECK(dec.partial[k] >= dec.partial[k - 1]);

  // desk amplitude: the per-window log factor (~kappa F) dwarfs lambda0 r, so
  // the series diverges and the log-space diagnostic must say so
  auto div = absorbing_radius(x, led, 0.05, 0.0, 0.05, 30);
  CHECK(div.diverging);
  CHECK(div.tail_log_slope > 0.0);
  for (double lt : div.log_terms) CHECK(std::isfinite(lt));  // log space never overflows

  CHECK_THROWS_AS(absorbing_radius(x, desk_ledger(), 0.05, 0.0, 0.05, 10),
                  std::runtime_error);  // M8 unset
  CHECK_THROWS_AS(absorbing_radius(x, led, 0.05, 0.0, 0.05, 0), std::invalid_argument);
}

TEST_CASE("pullback transport: singleton cloud, contraction, and bookkeeping") {
  const double h = 1.0 / 64.0;
  // depth n consumes 2 n r of the two-sided window (shift + transport back)
  auto x = driver(h, 14.0, 616);
  auto spec = homogeneous_system(0.1, 1e-4);

  auto one = pullback_experiment(spec, {const_eta(h, 1.0)}, x, 6);
  REQUIRE(one.depths.size() == 6);
  CHECK(one.initial_diameter == 0.0);
  for (double d : one.diameter) CHECK(d == 0.0);
  for (char o : one.overflow) CHECK(o == 0);
  REQUIRE(one.deepest_segments.size() == 1);
  CHECK(one.deepest_segments[0].t0 == -1.0);
  CHECK(one.deepest_segments[0].points() == 65);

  std::vector<GridPath> cloud{const_eta(h, 1.0), const_eta(h, -1.0), const_eta(h, 0.25)};
  auto run = pullback_experiment(spec, cloud, x, 6);
  CHECK(run.initial_diameter > 0.0);
  for (std::size_t i = 0; i < run.diameter.size(); ++i) {
    CHECK(run.diameter[i] > 0.0);
    CHECK(run.max_norm[i] > 0.0);
  }
  // small amplitude: the cloud contracts markedly within six delay lengths
  CHECK(run.diameter.back() < 0.1 * run.initial_diameter);

  CHECK_THROWS_AS(pullback_experiment(spec, {}, x, 4), std::invalid_argument);
  CHECK_THROWS_AS(pullback_experiment(spec, cloud, x, 0), std::invalid_argument);
}

TEST_CASE("two-point contraction: exact zero gap, scaling, and input checks") {
  const double h = 1.0 / 64.0;
  auto x = driver(h, 12.0, 11011);
  auto spec = homogeneous_system(0.1, 0.001);

  auto same = singleton_test(spec, const_eta(h, 0.7), const_eta(h, 0.7), x, 5);
  for (double d : same.pullback_dist) CHECK(d == 0.0);
  for (double d : same.forward_dist) CHECK(d == 0.0);

  auto base = singleton_test(spec, const_eta(h, 1.0), const_eta(h, -1.0), x, 5);
  auto scaled = singleton_test(spec, const_eta(h, 3.0), const_eta(h, -3.0), x, 5);
  REQUIRE(base.pullback_dist.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(scaled.pullback_dist[i] ==
          doctest::Approx(3.0 * base.pullback_dist[i]).epsilon(1e-10));
    CHECK(scaled.forward_dist[i] ==
          doctest::Approx(3.0 * base.forward_dist[i]).epsilon(1e-10));
  }
  CHECK(!base.overflowed);

  CHECK_THROWS_AS(
      singleton_test(desk_system(), const_eta(h, 1.0), const_eta(h, 0.0), x, 5),
      std::invalid_argument);  // affine diffusion: differences are not solutions
}

TEST_CASE("log-plus slope: constants give exactly zero, growth shows its rate") {
  CHECK(logplus_slope({5.0, 5.0, 5.0, 5.0}) == 0.0);
  CHECK(logplus_slope({0.2, 0.9, 0.5, 1.0}) == 0.0);  // log^+ clips to zero
  std::vector<double> grow;
  for (int n = 1; n <= 12; ++n) grow.push_back(std::exp(1.5 * n));
  CHECK(logplus_slope(grow) == doctest::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("shifted factor sequences walk the delay windows in both directions") {
  auto led = desk_ledger();
  auto x = driver(1.0 / 64.0, 8.0, 31415);
  const std::size_t steps = 64;
  auto back = shifted_factor_sequence(x, led, 0.05, 5, true, 'X');
  auto fwd = shifted_factor_sequence(x, led, 0.05, 5, false, 'X');
  REQUIRE(back.size() == 5);
  REQUIRE(fwd.size() == 5);
  const auto& raw = x.raw();
  const std::size_t o = x.raw_index_at(0.0);
  for (std::size_t n = 1; n <= 5; ++n) {
    CHECK(back[n - 1] ==
          holder_semi_value(raw, Window{o - n * steps, o - (n - 1) * steps}, led.nu));
    CHECK(fwd[n - 1] ==
          holder_semi_value(raw, Window{o + n * steps, o + (n + 1) * steps}, led.nu));
  }
  auto hseq = shifted_factor_sequence(x, led, 0.05, 5, true, 'H');
  for (std::size_t n = 0; n < 5; ++n)
    CHECK(hseq[n] == gh_from_semi(back[n], led, 0.05).h);
  CHECK_THROWS_AS(shifted_factor_sequence(x, led, 0.05, 5, true, 'Q'),
                  std::invalid_argument);
}

TEST_CASE("bounded-diffusion contraction requires a bounded diffusion and reports blocks") {
  const double h = 1.0 / 64.0;
  SystemSpec s = desk_system();
  SaturatingPoint sat;
  sat.rows = 1;
  sat.cols = 1;
  SatEntry e;
  e.lag = 1.0;
  e.w = Eigen::VectorXd::Constant(1, 10.0);
  e.c = 1.0;
  sat.entries = {e};
  s.diffusion = sat;

  std::vector<GridPath> etas{const_eta(h, 1.0), const_eta(h, -0.5), const_eta(h, 2.0)};
  std::vector<TwoSidedPath> xs;
  for (std::uint64_t i = 0; i < 3; ++i) xs.push_back(driver(h, 14.0, mix_seed(8080, i)));
  auto rep = bounded_g_contraction(s, etas, xs, {1, 2, 3}, 12.0);
  REQUIRE(rep.k0_grid == std::vector<int>{1, 2, 3});
  REQUIRE(rep.median_factor.size() == 3);
  CHECK(rep.overflow_count == 0);
  for (double f : rep.median_factor) {
    CHECK(std::isfinite(f));
    CHECK(f >= 0.0);
  }
  if (rep.chosen_k0 > 0) {
    CHECK(rep.fitted_radius > 0.0);
    CHECK(!rep.block_norms.empty());
  }

  CHECK_THROWS_AS(bounded_g_contraction(desk_system(), etas, xs, {1, 2}, 12.0),
                  std::invalid_argument);  // affine linear diffusion is unbounded
  CHECK_THROWS_AS(bounded_g_contraction(s, etas, xs, {}, 12.0), std::invalid_argument);
}
