#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "ydl/bounds.hpp"

using namespace ydl;

namespace {

GridPath scalar_path(double h, std::vector<double> vals) {
  GridPath p;
  p.h = h;
  p.dim = 1;
  p.values = std::move(vals);
  return p;
}

}  // namespace

TEST_CASE("discrete bound: geometric and additive closed forms") {
  auto geo = gronwall_discrete_bound(1.0, 1.0, {0.5, 0.5, 0.5}, {0.0, 0.0, 0.0});
  REQUIRE(geo.size() == 4);
  CHECK(geo[0] == 1.0);
  CHECK(geo[2] == doctest::Approx(2.25).epsilon(1e-15));
  CHECK(geo[3] == doctest::Approx(3.375).epsilon(1e-15));

  auto add = gronwall_discrete_bound(2.0, 1.0, {0.0, 0.0, 0.0, 0.0}, {1.0, 1.0, 1.0, 1.0});
  for (std::size_t n = 0; n < add.size(); ++n)
    CHECK(add[n] == doctest::Approx(2.0 + static_cast<double>(n)).epsilon(1e-15));
}

TEST_CASE("the extremal recursion attains the bound; slack iterates never exceed it") {
  std::mt19937_64 rng(1000);
  std::uniform_real_distribution<double> coef(0.0, 1.5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + static_cast<std::size_t>(rng() % 30);
    std::vector<double> alphas(n), betas(n);
    for (auto& v : alphas) v = coef(rng);
    for (auto& v : betas) v = coef(rng);
    const double a = coef(rng), u0 = coef(rng);
    auto bound = gronwall_discrete_bound(a, u0, alphas, betas);

    double u = std::max(a, u0);
    bool extremal = (trial % 2 == 0);
    CHECK(u <= bound[0] * (1.0 + 1e-12));
    for (std::size_t k = 0; k < n; ++k) {
      u = (1.0 + alphas[k]) * u + betas[k];
      if (extremal) {
        CHECK(u == doctest::Approx(bound[k + 1]).epsilon(1e-12));
      } else {
        u *= unit(rng);  // any sub-solution of the recursion
      }
      CHECK(u <= bound[k + 1] * (1.0 + 1e-12));
    }
  }
}

TEST_CASE("discrete bound validates its inputs") {
  CHECK_THROWS_AS(gronwall_discrete_bound(-1.0, 0.0, {0.1}, {0.1}), std::invalid_argument);
  CHECK_THROWS_AS(gronwall_discrete_bound(0.0, -1.0, {0.1}, {0.1}), std::invalid_argument);
  CHECK_THROWS_AS(gronwall_discrete_bound(0.0, 0.0, {-0.1}, {0.1}), std::invalid_argument);
  CHECK_THROWS_AS(gronwall_discrete_bound(0.0, 0.0, {0.1}, {-0.1}), std::invalid_argument);
  CHECK_THROWS_AS(gronwall_discrete_bound(0.0, 0.0, {0.1, 0.2}, {0.1}), std::invalid_argument);
}

TEST_CASE("continuous check: the extremal solution u = e^{bt} sits on the bound") {
  const double b = 1.3, h = 1e-3;
  const std::size_t n = 1001;
  std::vector<double> uv(n), av(n, 1.0);
  for (std::size_t k = 0; k < n; ++k) uv[k] = std::exp(b * static_cast<double>(k) * h);
  auto rep = gronwall_continuous_check(scalar_path(h, uv), scalar_path(h, av), b);
  CHECK(rep.hypothesis_ok);
  CHECK(rep.violations == 0);
  REQUIRE(rep.rows.size() == n);
  double worst = 0.0;
  for (const auto& row : rep.rows)
    worst = std::max(worst, std::fabs(row.rhs - row.lhs) / row.rhs);
  CHECK(worst < 1e-6);  // equality case: bound and solution coincide to O(h^2)
}

TEST_CASE("continuous check: strict sub-solutions pass with slack") {
  const double b = 0.8, h = 1.0 / 256.0;
  const std::size_t n = 257;
  std::vector<double> uv(n, 1.0), av(n, 2.0);
  auto rep = gronwall_continuous_check(scalar_path(h, uv), scalar_path(h, av), b);
  CHECK(rep.hypothesis_ok);
  CHECK(rep.violations == 0);
  for (const auto& row : rep.rows) CHECK(row.slack > 0.5);
}

TEST_CASE("continuous check: a violated hypothesis yields no claim") {
  const double b = 1.0, h = 1.0 / 128.0;
  const std::size_t n = 129;
  std::vector<double> uv(n), av(n, 1.0);
  for (std::size_t k = 0; k < n; ++k)
    uv[k] = 10.0 * std::exp(2.0 * static_cast<double>(k) * h);
  auto rep = gronwall_continuous_check(scalar_path(h, uv), scalar_path(h, av), b);
  CHECK(!rep.hypothesis_ok);
  CHECK(rep.rows.empty());
}

TEST_CASE("continuous check validates its inputs") {
  auto u = scalar_path(0.1, {1.0, 1.0, 1.0});
  auto a = scalar_path(0.1, {1.0, 1.0, 1.0});
  CHECK_THROWS_AS(gronwall_continuous_check(u, a, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(gronwall_continuous_check(u, a, 25.0), std::invalid_argument);
  auto short_a = scalar_path(0.1, {1.0, 1.0});
  CHECK_THROWS_AS(gronwall_continuous_check(u, short_a, 1.0), std::invalid_argument);
  auto neg = scalar_path(0.1, {1.0, -1.0, 1.0});
  CHECK_THROWS_AS(gronwall_continuous_check(neg, a, 1.0), std::invalid_argument);
}

TEST_CASE("bound reports merge associatively and render stable CSV") {
  BoundReport a, b;
  BoundRow r1{1, 1.0, 2.0, 1.0, true, 0.1, 7};
  BoundRow r2{2, 3.0, 2.0, -1.0, false, 0.1, 7};
  a.add(r1);
  b.add(r2);
  BoundReport ab = a;
  ab.merge(b);
  CHECK(ab.rows.size() == 2);
  CHECK(ab.violations == 1);
  CHECK(ab.max_rel_violation == doctest::Approx(0.5).epsilon(1e-15));

  auto csv = bound_report_csv(ab);
  CHECK(csv.find("n,lhs,rhs,slack,pass,grid_h,path_seed") == 0);
  CHECK(csv.find("\n1,1,2,1,1,0.1") != std::string::npos);
  CHECK(csv.find("\n2,3,2,-1,0,0.1") != std::string::npos);  // pass renders as 0/1
}
