#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "ydl/bounds.hpp"
#include "ydl/fbm.hpp"
#include "ydl/holder.hpp"
#include "ydl/stopping.hpp"
#include "ydl/system.hpp"

using namespace ydl;

namespace {

ConstantsLedger desk_ledger() { return build_ledger(desk_system()); }

GridPath const_path(std::size_t n, double h, double v) {
  GridPath p;
  p.h = h;
  p.dim = 1;
  p.values.assign(n, v);
  return p;
}

// Exhaustive reference: from each start, the largest endpoint with
// span^{nu-beta} * seminorm <= threshold, scanning every candidate.
std::vector<std::size_t> oracle_times(const GridPath& x, Window w,
                                      const ConstantsLedger& led, double mu,
                                      double bx) {
  std::vector<std::size_t> idx{w.lo};
  std::size_t a = w.lo;
  while (a < w.hi) {
    std::size_t best = a;
    for (std::size_t b = a + 1; b <= w.hi; ++b) {
      const double dt = static_cast<double>(b - a) * x.h;
      const double cond = std::pow(dt, led.nu - bx) * holder_semi_value(x, Window{a, b}, led.nu);
      if (cond <= mu) best = b;
    }
    if (best == a) best = a + 1;  // unresolvable step: advance one grid point
    idx.push_back(best);
    a = best;
  }
  return idx;
}

}  // namespace

TEST_CASE("greedy threshold: frozen desk values and the zero-amplitude limit") {
  auto led = desk_ledger();
  CHECK(greedy_threshold_for(led, 0.05) == doctest::Approx(1.3726433671681847).epsilon(1e-12));
  CHECK(greedy_threshold_for(led, 0.05, true) ==
        doctest::Approx(0.32941560590497472).epsilon(1e-12));
  CHECK(greedy_threshold_for(led, 0.1) ==
        doctest::Approx(1.3726433671681847 / 2.0).epsilon(1e-12));
  CHECK(std::isinf(greedy_threshold_for(led, 0.0)));
  CHECK_THROWS_AS(greedy_threshold_for(led, -0.1), std::invalid_argument);
}

TEST_CASE("constant driver needs a single stopping step") {
  auto led = desk_ledger();
  auto x = const_path(65, 1.0 / 64.0, 3.0);
  auto seq = greedy_stopping_times(x, Window{0, 64}, led, 0.05);
  CHECK(seq.count() == 1);
  CHECK(!seq.collapsed);
  CHECK(seq.indices == std::vector<std::size_t>{0, 64});
  CHECK(seq.cond_at_close[0] == 0.0);
  CHECK(std::isnan(seq.cond_one_more[0]));
  CHECK(nn_bound(x, Window{0, 64}, led, 0.05) == doctest::Approx(1.0));
}

TEST_CASE("vanishing amplitude collapses the sequence to one step") {
  auto led = desk_ledger();
  FbmSpec spec;
  spec.h = 1.0 / 256.0;
  spec.horizon = 1.0;
  spec.seed = 99;
  auto x = sample_fbm_two_sided(spec).materialize();
  Window w{0, 256};
  auto seq = greedy_stopping_times(x, w, led, 1e-12);
  CHECK(seq.count() == 1);
  CHECK(nn_bound(x, w, led, 0.0) == 1.0);
}

TEST_CASE("greedy scan matches the exhaustive oracle on rough paths") {
  auto led = desk_ledger();
  FbmSpec spec;
  spec.h = 1.0 / 64.0;
  spec.horizon = 1.0;
  for (std::uint64_t i = 0; i < 6; ++i) {
    spec.seed = mix_seed(2000, i);
    auto x = sample_fbm_two_sided(spec).materialize();
    Window w{0, 64};
    for (double cg : {0.05, 0.5, 2.0}) {
      for (bool first : {false, true}) {
        auto seq = greedy_stopping_times(x, w, led, cg, first);
        auto want = oracle_times(x, w, led, greedy_threshold_for(led, cg, first),
                                 first ? led.beta0 : led.beta);
        CHECK(seq.indices == want);
      }
    }
  }
}

TEST_CASE("closing values certify maximality step by step") {
  // Linear driver: the condition value over a span L is exactly c * L^(1-beta),
  // so every stopping step is resolvable and lands at a predictable width.
  auto led = desk_ledger();
  const double h = 1.0 / 128.0;
  GridPath x{0.0, h, 1, {}};
  x.values.resize(129);
  for (std::size_t k = 0; k <= 128; ++k) x.values[k] = 0.3 * static_cast<double>(k) * h;
  auto seq = greedy_stopping_times(x, Window{0, 128}, led, 1.0);
  CHECK(!seq.collapsed);
  REQUIRE(seq.count() >= 2);  // amplitude chosen so the interval actually splits
  for (std::size_t i = 0; i < seq.count(); ++i) {
    CHECK(seq.cond_at_close[i] <= seq.threshold);
    if (i + 1 < seq.count()) {
      CHECK(seq.cond_one_more[i] > seq.threshold);  // one more step would violate
    } else {
      CHECK(std::isnan(seq.cond_one_more[i]));  // capped at the right edge
    }
  }
}

TEST_CASE("a jump the grid cannot resolve flags the sequence as collapsed") {
  auto led = desk_ledger();
  auto x = const_path(17, 1.0 / 16.0, 0.0);
  x.values[8] = 100.0;  // single huge spike
  auto seq = greedy_stopping_times(x, Window{0, 16}, led, 0.05);
  CHECK(seq.collapsed);
}

TEST_CASE("counting bound dominates the measured counts on an ensemble") {
  auto led = desk_ledger();
  FbmSpec spec;
  spec.h = 1.0 / 256.0;
  spec.horizon = 2.0;
  for (std::uint64_t i = 0; i < 8; ++i) {
    spec.seed = mix_seed(321, i);
    auto x = sample_fbm_two_sided(spec).materialize();
    for (std::size_t n = 0; n < 2; ++n) {
      Window w{n * 256, (n + 1) * 256};
      for (double cg : {0.05, 0.3}) {
        auto seq = greedy_stopping_times(x, w, led, cg);
        const double bound = nn_bound(x, w, led, cg);
        // At the larger amplitude a single grid step can already exceed the
        // threshold (collapsed scan); the count bound holds regardless, since a
        // collapsed step consumes at least one threshold's worth of oscillation.
        CHECK(static_cast<double>(seq.count()) <= std::ceil(bound));
      }
    }
  }
}

TEST_CASE("interval recurrence: frozen value and monotonicity") {
  auto led = desk_ledger();
  // e^{4 L_f r + kappa N} (prev + q) - q with q = 0, prev = 1, N = 1: e^{10.8}
  CHECK(recurrence_bound_ykk(1.0, 1.0, led, 0.0, 0.0, 0.05) ==
        doctest::Approx(49020.801136381718).epsilon(1e-12));
  // q = 4 r f0 + g0/C_g shifts both sides
  const double q = 4.0 * 1.0 * 0.25 + 0.05 / 0.05;
  CHECK(recurrence_bound_ykk(1.0, 1.0, led, 0.25, 0.05, 0.05) ==
        doctest::Approx(std::exp(10.8) * (1.0 + q) - q).epsilon(1e-12));

  const double base = recurrence_bound_ykk(1.0, 2.0, led, 0.1, 0.1, 0.05);
  CHECK(recurrence_bound_ykk(1.5, 2.0, led, 0.1, 0.1, 0.05) > base);
  CHECK(recurrence_bound_ykk(1.0, 3.0, led, 0.1, 0.1, 0.05) > base);
  CHECK(recurrence_bound_ykk(1.0, 2.0, led, 0.2, 0.1, 0.05) > base);
  CHECK(recurrence_bound_ykk(1.0, 2.0, led, 0.1, 0.2, 0.05) > base);

  CHECK_THROWS_AS(recurrence_bound_ykk(1.0, 1.0, led, 0.0, 0.05, 0.0),
                  std::invalid_argument);
  // C_g = 0 with g0 = 0 is legitimate (the quotient term drops)
  CHECK(recurrence_bound_ykk(1.0, 1.0, led, 0.0, 0.0, 0.0) ==
        doctest::Approx(49020.801136381718).epsilon(1e-12));
}
