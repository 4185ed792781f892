#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "ydl/expm.hpp"
#include "ydl/fbm.hpp"
#include "ydl/holder.hpp"
#include "ydl/solver.hpp"
#include "ydl/system.hpp"

using namespace ydl;

namespace {

GridPath const_eta(double r, double h, std::vector<double> point) {
  GridPath eta;
  eta.t0 = -r;
  eta.h = h;
  eta.dim = static_cast<int>(point.size());
  const std::size_t n = static_cast<std::size_t>(std::lround(r / h)) + 1;
  eta.values.reserve(n * point.size());
  for (std::size_t k = 0; k < n; ++k)
    for (double v : point) eta.values.push_back(v);
  return eta;
}

TwoSidedPath zero_driver(double h, double lo, double hi, int dim = 1) {
  GridPath z;
  z.t0 = lo;
  z.h = h;
  z.dim = dim;
  const std::size_t n = static_cast<std::size_t>(std::lround((hi - lo) / h)) + 1;
  z.values.assign(n * static_cast<std::size_t>(dim), 0.0);
  return wrap_driver(std::move(z));
}

PointDelayLinear zero_functional(int d) {
  PointDelayLinear f;
  f.offset = Eigen::MatrixXd::Zero(d, 1);
  f.columns.resize(1);
  return f;
}

PointDelayLinear lag_functional(int d, double lag, double coef) {
  PointDelayLinear f;
  f.offset = Eigen::MatrixXd::Zero(d, 1);
  f.columns.resize(1);
  f.columns[0].push_back({lag, coef * Eigen::MatrixXd::Identity(d, d)});
  return f;
}

// y' = -y(t-1), y == 1 on [-1, 0]; piecewise polynomial solution with
// y(t) = 1 - t on [0, 1] and y(t) = t^2/2 - 2t + 3/2 on [1, 2], y(2) = -1/2.
SystemSpec delay_oracle_system() {
  SystemSpec s;
  s.A = Eigen::MatrixXd::Zero(1, 1);
  s.drift = lag_functional(1, 1.0, -1.0);
  s.diffusion = zero_functional(1);
  s.r = 1.0;
  s.margin = 1.0;
  return s;
}

double oracle_value(double t) {
  if (t <= 0.0) return 1.0;
  if (t <= 1.0) return 1.0 - t;
  return 0.5 * t * t - 2.0 * t + 1.5;
}

TwoSidedPath fbm_driver(double h, double horizon, std::uint64_t seed) {
  FbmSpec spec;
  spec.hurst = 0.75;
  spec.h = h;
  spec.horizon = horizon;
  spec.seed = seed;
  return sample_fbm_two_sided(spec);
}

}  // namespace

TEST_CASE("Euler is first order on the scalar exponential") {
  SystemSpec s;
  s.A = Eigen::MatrixXd::Constant(1, 1, -1.0);
  s.drift = zero_functional(1);
  s.diffusion = zero_functional(1);
  auto err = [&](double h) {
    auto out = solve_euler(s, const_eta(1.0, h, {1.0}), zero_driver(h, -1.0, 1.0), 1.0,
                           false);
    REQUIRE(out.ok);
    return std::fabs(out.y.values.back() - std::exp(-1.0));
  };
  const double e1 = err(1e-3), e2 = err(5e-4);
  CHECK(e1 / e2 == doctest::Approx(2.0).epsilon(0.2));
  CHECK(e1 < 2e-4);
}

TEST_CASE("Euler converges on the pure-delay oracle") {
  auto s = delay_oracle_system();
  auto run = [&](double h) {
    auto out = solve_euler(s, const_eta(1.0, h, {1.0}), zero_driver(h, -1.0, 2.0), 2.0,
                           false);
    REQUIRE(out.ok);
    double worst = 0.0;
    for (std::size_t k = 0; k < out.y.points(); ++k)
      worst = std::max(worst, std::fabs(out.y.values[k] - oracle_value(out.y.time_at(k))));
    return std::pair{std::fabs(out.y.values.back() + 0.5), worst};
  };
  auto [end1, sup1] = run(1e-3);
  auto [end2, sup2] = run(5e-4);
  CHECK(end1 < 1e-3);
  CHECK(sup1 < 5e-3);
  CHECK(end1 / end2 == doctest::Approx(2.0).epsilon(0.25));
  CHECK(sup2 < sup1);
}

TEST_CASE("method_of_steps integrates the pure-delay oracle to rounding") {
  auto s = delay_oracle_system();
  const double h = 1.0 / 64.0;
  auto out = method_of_steps(s, const_eta(1.0, h, {1.0}), 2.0);
  REQUIRE(out.ok);
  double worst = 0.0;
  for (std::size_t k = 0; k < out.y.points(); ++k)
    worst = std::max(worst, std::fabs(out.y.values[k] - oracle_value(out.y.time_at(k))));
  CHECK(worst < 1e-12);  // RK4 is exact on piecewise quadratics with linear history
  CHECK(out.y.values.back() == doctest::Approx(-0.5).epsilon(1e-13));

  CHECK_THROWS_AS(method_of_steps(desk_system(), const_eta(1.0, h, {1.0}), 2.0),
                  std::invalid_argument);  // diffusion is not identically zero
}

TEST_CASE("variation of constants reproduces the matrix flow when f = g = 0") {
  SystemSpec s;
  s.A = Eigen::MatrixXd(2, 2);
  s.A << -1.0, 2.0, -2.0, -1.0;
  s.drift = zero_functional(2);
  PointDelayLinear g;
  g.offset = Eigen::MatrixXd::Zero(2, 1);
  g.columns.resize(1);
  s.diffusion = g;
  const double h = 1.0 / 128.0;
  auto eta = const_eta(1.0, h, {1.0, -0.5});
  auto x = zero_driver(h, -1.0, 2.0);
  auto voc = solve_voc(s, eta, x, 2.0, false);
  REQUIRE(voc.ok);
  Eigen::Vector2d y0(1.0, -0.5);
  double worst_voc = 0.0;
  for (std::size_t k = voc.r_steps; k < voc.y.points(); ++k) {
    const double t = voc.y.time_at(k);
    Eigen::Vector2d want = expm(Eigen::MatrixXd(s.A * t)) * y0;
    worst_voc = std::max(worst_voc, std::fabs(voc.y.values[2 * k] - want(0)));
    worst_voc = std::max(worst_voc, std::fabs(voc.y.values[2 * k + 1] - want(1)));
  }
  CHECK(worst_voc < 1e-10);

  // Euler on the same problem is only first order; the two schemes are
  // genuinely independent discretizations.
  auto eul = solve_euler(s, eta, x, 2.0, false);
  double worst_eul = 0.0;
  for (std::size_t k = eul.r_steps; k < eul.y.points(); ++k) {
    const double t = eul.y.time_at(k);
    Eigen::Vector2d want = expm(Eigen::MatrixXd(s.A * t)) * y0;
    worst_eul = std::max(worst_eul, std::fabs(eul.y.values[2 * k] - want(0)));
  }
  CHECK(worst_eul > 1e3 * worst_voc);
}

TEST_CASE("restarting from a stored segment continues the trajectory bitwise") {
  auto s = desk_system();
  const double h = 1.0 / 256.0;
  auto x = fbm_driver(h, 4.0, 12345);
  auto full = solve_euler(s, const_eta(1.0, h, {1.0}), x, 3.0);
  REQUIRE(full.ok);

  for (double split : {0.5, 1.0, 2.0}) {
    const std::size_t ks = full.r_steps + static_cast<std::size_t>(std::lround(split / h));
    const std::size_t r_steps = static_cast<std::size_t>(std::lround(1.0 / h));
    GridPath eta2;
    eta2.t0 = -1.0;
    eta2.h = h;
    eta2.dim = 1;
    eta2.values.assign(full.y.values.begin() + static_cast<std::ptrdiff_t>(ks - r_steps),
                       full.y.values.begin() + static_cast<std::ptrdiff_t>(ks + 1));
    auto rest = solve_euler(s, eta2, shift_path(x, split), 3.0 - split);
    REQUIRE(rest.ok);
    // the restarted trajectory must repeat the exact same doubles
    for (std::size_t k = 0; k < rest.y.points(); ++k) {
      CHECK(rest.y.values[k] == full.y.values[ks - r_steps + k]);
    }
  }
}

TEST_CASE("homogeneous linear systems scale with the initial segment") {
  SystemSpec s = desk_system();
  s.drift = lag_functional(1, 1.0, 0.1);
  s.diffusion = lag_functional(1, 1.0, 0.05);  // drop the affine offset
  const double h = 1.0 / 256.0;
  auto x = fbm_driver(h, 2.0, 777);
  auto base = solve_euler(s, const_eta(1.0, h, {1.0}), x, 2.0, false);
  auto scaled = solve_euler(s, const_eta(1.0, h, {3.0}), x, 2.0, false);
  REQUIRE(base.ok);
  REQUIRE(scaled.ok);
  double worst = 0.0, scale = 0.0;
  for (std::size_t k = 0; k < base.y.points(); ++k) {
    worst = std::max(worst, std::fabs(scaled.y.values[k] - 3.0 * base.y.values[k]));
    scale = std::max(scale, std::fabs(base.y.values[k]));
  }
  CHECK(worst <= 1e-12 * 3.0 * scale);
}

TEST_CASE("Euler and variation of constants agree within the rough-path gap") {
  auto s = desk_system();
  const double h = 1.0 / 512.0;
  for (std::uint64_t i = 0; i < 3; ++i) {
    auto x = fbm_driver(h, 2.0, mix_seed(42, i));
    auto eta = const_eta(1.0, h, {1.0});
    auto a = solve_euler(s, eta, x, 2.0, false);
    auto b = solve_voc(s, eta, x, 2.0, false);
    REQUIRE(a.ok);
    REQUIRE(b.ok);
    double gap = 0.0;
    for (std::size_t k = 0; k < a.y.points(); ++k)
      gap = std::max(gap, std::fabs(a.y.values[k] - b.y.values[k]));
    CHECK(gap <= 10.0 * std::pow(h, 2.0 * s.nu - 1.0));
  }
}

TEST_CASE("non-finite states are reported, not thrown") {
  SystemSpec s;
  s.A = Eigen::MatrixXd::Zero(1, 1);
  s.drift = lag_functional(1, 0.0, 1e160);
  s.diffusion = zero_functional(1);
  const double h = 0.25;
  auto out = solve_euler(s, const_eta(1.0, h, {1e160}), zero_driver(h, -1.0, 2.0), 2.0);
  CHECK(!out.ok);
  CHECK(out.overflow_index > 0);
}

TEST_CASE("the initial segment is embedded bitwise and r_steps locates time zero") {
  auto s = desk_system();
  const double h = 1.0 / 128.0;
  GridPath eta;
  eta.t0 = -1.0;
  eta.h = h;
  eta.dim = 1;
  std::mt19937_64 rng(5);
  std::normal_distribution<double> gauss;
  eta.values.resize(129);
  for (auto& v : eta.values) v = gauss(rng);
  auto x = fbm_driver(h, 2.0, 2);
  auto out = solve_euler(s, eta, x, 1.0);
  REQUIRE(out.ok);
  CHECK(out.y.t0 == -1.0);
  CHECK(out.r_steps == 128);
  CHECK(out.y.time_at(out.r_steps) == doctest::Approx(0.0));
  for (std::size_t k = 0; k < eta.values.size(); ++k)
    CHECK(out.y.values[k] == eta.values[k]);
}

TEST_CASE("solver preconditions are enforced") {
  auto s = desk_system();
  const double h = 1.0 / 64.0;
  auto x = fbm_driver(h, 2.0, 3);
  auto eta = const_eta(1.0, h, {1.0});
  CHECK_THROWS_AS(solve_euler(s, eta, x, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(solve_euler(s, eta, x, 3.0), std::invalid_argument);  // driver too short
  auto bad = const_eta(0.5, h, {1.0});
  CHECK_THROWS_AS(solve_euler(s, bad, x, 1.0), std::invalid_argument);
  GridPath shifted = eta;
  shifted.t0 = -0.75;
  CHECK_THROWS_AS(solve_euler(s, shifted, x, 1.0), std::invalid_argument);
  GridPath wrong_dim = eta;
  wrong_dim.dim = 2;
  CHECK_THROWS_AS(solve_euler(s, wrong_dim, x, 1.0), std::invalid_argument);
}

TEST_CASE("mu/h decomposition: no diffusion means no stochastic remainder") {
  const double h = 1.0 / 128.0;
  SystemSpec nog = desk_system();
  nog.diffusion = zero_functional(1);
  auto dec = decompose_mu_h(nog, const_eta(1.0, h, {1.0}), fbm_driver(h, 4.0, 11), 4.0, 2);
  REQUIRE(dec.ok);
  for (double v : dec.h_path.values) CHECK(v == 0.0);

  // same with diffusion present but a frozen (zero) driver
  auto dec2 = decompose_mu_h(desk_system(), const_eta(1.0, h, {1.0}),
                             zero_driver(h, -1.0, 4.0), 4.0, 2);
  REQUIRE(dec2.ok);
  for (double v : dec2.h_path.values) CHECK(v == 0.0);
  CHECK(dec2.k0 == 2);
  CHECK(dec2.mu_intervals.size() == 4);
  CHECK(dec2.h_intervals.size() == 4);

  CHECK_THROWS_AS(decompose_mu_h(desk_system(), const_eta(1.0, h, {1.0}),
                                 zero_driver(h, -1.0, 4.0), 4.0, 1),
                  std::invalid_argument);
}

TEST_CASE("mu + h reconstructs the noisy trajectory exactly") {
  const double h = 1.0 / 256.0;
  auto dec = decompose_mu_h(desk_system(), const_eta(1.0, h, {1.0}),
                            fbm_driver(h, 4.0, 909), 4.0, 2);
  REQUIRE(dec.ok);
  const std::size_t off = dec.y.r_steps;
  for (std::size_t k = 0; k < dec.mu.points(); ++k) {
    const double y = dec.y.y.values[off + k];
    CHECK(dec.mu.values[k] + dec.h_path.values[k] == doctest::Approx(y).epsilon(1e-15));
  }
  // mu coincides with y on the first delay interval by construction
  const std::size_t rs = static_cast<std::size_t>(std::lround(1.0 / h));
  for (std::size_t k = 0; k <= rs; ++k) CHECK(dec.h_path.values[k] == 0.0);
}

TEST_CASE("functional_along samples F(y_t) and respects the Lipschitz constant") {
  const double h = 1.0 / 128.0;
  auto y = fbm_driver(h, 2.0, 31).materialize();  // any rough path will do

  auto f = lag_functional(1, 0.5, 0.1);
  auto fpath = functional_along(FunctionalDescriptor{f}, y, 1.0, 0.0, 1.0);
  REQUIRE(fpath.points() == 129);
  for (std::size_t k = 0; k < fpath.points(); ++k) {
    const double t = fpath.time_at(k);
    const std::size_t src = index_of(y, t - 0.5);
    CHECK(fpath.values[k] == doctest::Approx(0.1 * y.values[src]).epsilon(1e-15));
  }

  SaturatingPoint sat;
  sat.rows = 1;
  sat.cols = 1;
  SatEntry e;
  e.lag = 0.25;
  e.w = Eigen::VectorXd::Constant(1, 2.0);
  e.c = 0.7;
  sat.entries = {e};
  FunctionalDescriptor fd{sat};
  auto spath = functional_along(fd, y, 1.0, 0.0, 1.0);
  for (std::size_t k = 0; k < spath.points(); ++k) {
    const double t = spath.time_at(k);
    const double arg = 2.0 * y.values[index_of(y, t - 0.25)];
    CHECK(spath.values[k] == doctest::Approx(0.7 * std::tanh(arg)).epsilon(1e-14));
  }

  // |F(y_t) - F(y_s)| <= Lip(F) * sup_theta |y(t+theta) - y(s+theta)|
  const double lip = functional_lipschitz(fd);
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<std::size_t> pick(0, spath.points() - 1);
  for (int it = 0; it < 200; ++it) {
    std::size_t a = pick(rng), b = pick(rng);
    if (a == b) continue;
    const double ta = spath.time_at(a), tb = spath.time_at(b);
    double sup_diff = 0.0;
    const std::size_t steps = static_cast<std::size_t>(std::lround(1.0 / h));
    const std::size_t ia = index_of(y, ta), ib = index_of(y, tb);
    for (std::size_t s = 0; s <= steps; ++s)
      sup_diff = std::max(sup_diff, std::fabs(y.values[ia - s] - y.values[ib - s]));
    CHECK(std::fabs(spath.values[a] - spath.values[b]) <= lip * sup_diff + 1e-12);
  }

  CHECK_THROWS_AS(functional_along(fd, y, 1.0, -2.0, 1.0), std::invalid_argument);
}

TEST_CASE("interval_norms agrees with direct window scans") {
  const double h = 1.0 / 64.0;
  auto y = fbm_driver(h, 2.0, 17).materialize();  // on [-2, 2]
  auto diags = interval_norms(y, 0.0, 1.0, 0.55);
  REQUIRE(diags.size() == 2);
  for (std::size_t n = 0; n < diags.size(); ++n) {
    auto w = window_of(y, static_cast<double>(n), static_cast<double>(n + 1));
    auto nm = window_norms(y, w, 0.55);
    CHECK(diags[n].n == static_cast<int>(n));
    CHECK(diags[n].sup == nm.sup);
    CHECK(diags[n].semi == nm.semi);
    CHECK(diags[n].weighted == doctest::Approx(nm.weighted).epsilon(1e-15));
  }
}

TEST_CASE("solver diagnostics match interval_norms of the output") {
  auto s = desk_system();
  const double h = 1.0 / 128.0;
  auto out = solve_euler(s, const_eta(1.0, h, {1.0}), fbm_driver(h, 4.0, 5), 3.0);
  REQUIRE(out.ok);
  auto direct = interval_norms(out.y, 0.0, 1.0, s.beta);
  REQUIRE(out.intervals.size() == direct.size());
  for (std::size_t n = 0; n < direct.size(); ++n) {
    CHECK(out.intervals[n].sup == direct[n].sup);
    CHECK(out.intervals[n].semi == direct[n].semi);
  }
}
