#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "ydl/fbm.hpp"
#include "ydl/young.hpp"

using namespace ydl;

namespace {

GridPath sampled(double t0, double h, std::size_t n, double (*f)(double)) {
  GridPath p;
  p.t0 = t0;
  p.h = h;
  p.dim = 1;
  p.values.resize(n);
  for (std::size_t k = 0; k < n; ++k) p.values[k] = f(t0 + static_cast<double>(k) * h);
  return p;
}

Window full(const GridPath& p) { return Window{0, p.points() - 1}; }

}  // namespace

TEST_CASE("sewing constant: frozen values and domain") {
  CHECK(k_constant(0.55, 0.75) == doctest::Approx(5.3262996735629028).epsilon(1e-12));
  CHECK(k_constant(0.55, 0.70) == doctest::Approx(6.2852135078832452).epsilon(1e-12));
  CHECK(k_constant(0.35, 0.70) == doctest::Approx(29.356788873216475).epsilon(1e-12));
  // direct form 1 / (1 - 2^{1-(beta+nu)})
  for (auto [b, n] : std::vector<std::pair<double, double>>{{0.6, 0.6}, {0.51, 0.51}}) {
    CHECK(k_constant(b, n) ==
          doctest::Approx(1.0 / (1.0 - std::pow(2.0, 1.0 - (b + n)))).epsilon(1e-14));
  }
  CHECK_THROWS_AS(k_constant(0.5, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(k_constant(0.3, 0.7), std::invalid_argument);
  CHECK_THROWS_AS(k_constant(0.0, 1.5), std::invalid_argument);
}

TEST_CASE("left sums of int t d(t^2) converge at first order to 2/3") {
  auto run = [](double h) {
    const std::size_t n = static_cast<std::size_t>(std::lround(1.0 / h));
    GridPath y, x;
    y.h = x.h = h;
    y.dim = x.dim = 1;
    y.values.resize(n + 1);
    x.values.resize(n + 1);
    for (std::size_t k = 0; k <= n; ++k) {
      double t = static_cast<double>(k) * h;
      y.values[k] = t;
      x.values[k] = t * t;
    }
    return integrate_left_scalar(y, x, Window{0, n});
  };
  const double e1 = std::fabs(run(1e-3) - 2.0 / 3.0);
  const double e2 = std::fabs(run(5e-4) - 2.0 / 3.0);
  CHECK(e1 < 1e-3);
  CHECK(e1 > 1e-4);               // genuinely first order, not superconvergent
  CHECK(e1 / e2 == doctest::Approx(2.0).epsilon(0.05));  // halving h halves the error
}

TEST_CASE("left sum of int x dx has the closed form (1 - h)/2") {
  // sum x_k (x_{k+1}-x_k) telescopes to (x_n^2 - x_0^2 - sum (dx)^2)/2; for x = t
  // on [0,1] that is (1 - h)/2 exactly, a sharp probe of the compensated sum.
  for (double h : {1.0 / 1000.0, 1.0 / 4096.0}) {
    const std::size_t n = static_cast<std::size_t>(std::lround(1.0 / h));
    GridPath x;
    x.h = h;
    x.dim = 1;
    x.values.resize(n + 1);
    for (std::size_t k = 0; k <= n; ++k) x.values[k] = static_cast<double>(k) * h;
    CHECK(integrate_left_scalar(x, x, Window{0, n}) ==
          doctest::Approx((1.0 - h) / 2.0).epsilon(1e-14));
  }
}

TEST_CASE("int_0^1 sin d(cos) matches sin^2 integration by parts") {
  const double h = 1e-3;
  auto y = sampled(0.0, h, 1001, [](double t) { return std::sin(t); });
  auto x = sampled(0.0, h, 1001, [](double t) { return std::cos(t); });
  const double want = -0.27267564329357958;  // -(1/2 - sin(2)/4)
  CHECK(integrate_left_scalar(y, x, full(y)) == doctest::Approx(want).epsilon(1e-3));
}

TEST_CASE("prefix path continues the compensated sum exactly") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> gauss;
  const std::size_t n = 513;
  GridPath y, x;
  y.h = x.h = 1.0 / 512.0;
  y.dim = x.dim = 1;
  y.values.resize(n);
  x.values.resize(n);
  double ax = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    y.values[k] = gauss(rng);
    ax += gauss(rng) * 0.1;
    x.values[k] = ax;
  }
  auto prefix = integrate_left_prefix(y, x, full(y));
  REQUIRE(prefix.points() == n);
  CHECK(prefix.values.front() == 0.0);
  CHECK(prefix.values.back() == integrate_left(y, x, full(y))[0]);
  // interior prefix values equal the integral over the sub-window
  for (std::size_t k : {std::size_t{1}, std::size_t{100}, std::size_t{511}}) {
    CHECK(prefix.values[k] ==
          doctest::Approx(integrate_left_scalar(y, x, Window{0, k})).epsilon(1e-14));
  }
  // additivity over a split
  const double a = integrate_left_scalar(y, x, Window{0, 200});
  const double b = integrate_left_scalar(y, x, Window{200, n - 1});
  CHECK(a + b == doctest::Approx(integrate_left_scalar(y, x, full(y))).epsilon(1e-13));
}

TEST_CASE("the integral is linear in the integrand") {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> gauss;
  const std::size_t n = 257;
  GridPath y1, y2, combo, x;
  for (GridPath* p : {&y1, &y2, &combo, &x}) {
    p->h = 1.0 / 256.0;
    p->dim = 1;
    p->values.resize(n);
  }
  double ax = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    y1.values[k] = gauss(rng);
    y2.values[k] = gauss(rng);
    ax += gauss(rng) * 0.1;
    x.values[k] = ax;
    combo.values[k] = 2.5 * y1.values[k] - 0.75 * y2.values[k];
  }
  const double lhs = integrate_left_scalar(combo, x, full(x));
  const double rhs = 2.5 * integrate_left_scalar(y1, x, full(x)) -
                     0.75 * integrate_left_scalar(y2, x, full(x));
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-13));
}

TEST_CASE("matrix integrand rows combine scalar integrals against each driver") {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> gauss;
  const std::size_t n = 129;
  const double h = 1.0 / 128.0;
  GridPath Y, x;                       // Y: 2x2 row-major, x: 2-dim driver
  Y.h = x.h = h;
  Y.dim = 4;
  x.dim = 2;
  Y.values.resize(4 * n);
  x.values.resize(2 * n);
  std::vector<GridPath> yc(4), xc(2);  // scalar components
  for (auto& p : yc) { p.h = h; p.dim = 1; p.values.resize(n); }
  for (auto& p : xc) { p.h = h; p.dim = 1; p.values.resize(n); }
  double a0 = 0.0, a1 = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    for (int c = 0; c < 4; ++c) {
      double v = gauss(rng);
      Y.values[4 * k + static_cast<std::size_t>(c)] = v;
      yc[static_cast<std::size_t>(c)].values[k] = v;
    }
    a0 += gauss(rng) * 0.1;
    a1 += gauss(rng) * 0.1;
    x.values[2 * k] = a0;
    x.values[2 * k + 1] = a1;
    xc[0].values[k] = a0;
    xc[1].values[k] = a1;
  }
  auto got = integrate_left(Y, x, full(x));
  REQUIRE(got.size() == 2);
  const double r0 = integrate_left_scalar(yc[0], xc[0], full(x)) +
                    integrate_left_scalar(yc[1], xc[1], full(x));
  const double r1 = integrate_left_scalar(yc[2], xc[0], full(x)) +
                    integrate_left_scalar(yc[3], xc[1], full(x));
  CHECK(got[0] == doctest::Approx(r0).epsilon(1e-13));
  CHECK(got[1] == doctest::Approx(r1).epsilon(1e-13));
}

TEST_CASE("input validation rejects mismatched grids and dimensions") {
  GridPath y, x;
  y.h = 0.1;
  x.h = 0.1;
  y.dim = 3;
  x.dim = 2;
  y.values.resize(15);
  x.values.resize(10);
  CHECK_THROWS_AS(integrate_left(y, x, Window{0, 4}), std::invalid_argument);
  y.dim = 2;
  y.values.resize(10);
  y.h = 0.2;
  CHECK_THROWS_AS(integrate_left(y, x, Window{0, 4}), std::invalid_argument);
  y.h = 0.1;
  CHECK_THROWS_AS(integrate_left(y, x, Window{0, 7}), std::invalid_argument);
}

TEST_CASE("constant integrands have zero sewing defect") {
  auto x = sampled(0.0, 1.0 / 64.0, 65, [](double t) { return std::cos(3.0 * t); });
  auto y = sampled(0.0, 1.0 / 64.0, 65, [](double) { return 2.0; });
  auto d = young_loeve_check(y, x, full(x), 0.55, 0.7);
  CHECK(d.lhs == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(d.semi_y == 0.0);
  CHECK(d.pass);
}

TEST_CASE("sewing estimate holds on rough sample paths") {
  FbmSpec spec;
  spec.hurst = 0.75;
  spec.h = 1.0 / 1024.0;
  spec.horizon = 1.0;
  const double beta = 0.7, nu = 0.7;
  std::mt19937_64 rng(1234);
  for (std::uint64_t i = 0; i < 10; ++i) {
    spec.seed = mix_seed(100, i);
    auto xp = sample_fbm_two_sided(spec).materialize();
    auto yp = xp;  // integrand = the driver itself
    std::uniform_int_distribution<std::size_t> pick(0, xp.points() - 2);
    for (int k = 0; k < 10; ++k) {
      std::size_t a = pick(rng), b = pick(rng);
      if (a > b) std::swap(a, b);
      b += 1;
      auto d = young_loeve_check(yp, xp, Window{a, b}, beta, nu);
      CHECK(d.pass);
      CHECK(d.lhs <= d.rhs * (1.0 + 1e-9));
    }
  }
}
