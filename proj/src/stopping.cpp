#include "ydl/stopping.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "ydl/holder.hpp"
#include "ydl/kernels.hpp"

namespace ydl {

namespace {

// Window samples as coordinate planes (indices relative to w.lo), mirroring the
// layout the Hölder kernels expect.
struct PlaneView {
  std::vector<double> storage;           // transposed copy when dim > 1
  std::vector<const double*> ptrs;
  const double* const* planes = nullptr;
};

PlaneView make_planes(const GridPath& x, Window w) {
  PlaneView v;
  const auto d = static_cast<std::size_t>(x.dim);
  const std::size_t n = w.count();
  if (d == 1) {
    v.ptrs = {x.values.data() + w.lo};
  } else {
    v.storage.resize(d * n);
    for (std::size_t c = 0; c < d; ++c)
      for (std::size_t k = 0; k < n; ++k)
        v.storage[c * n + k] = x.values[(w.lo + k) * d + c];
    v.ptrs.resize(d);
    for (std::size_t c = 0; c < d; ++c) v.ptrs[c] = v.storage.data() + c * n;
  }
  v.planes = v.ptrs.data();
  return v;
}

std::vector<double> make_w2r(double h, double nu, std::size_t L) {
  std::vector<double> w2r(L);
  for (std::size_t lag = 1; lag <= L; ++lag) {
    const double w = std::pow(static_cast<double>(lag) * h, -nu);
    w2r[L - lag] = w * w;
  }
  return w2r;
}

}  // namespace

double greedy_threshold_for(const ConstantsLedger& led, double c_g,
                            bool first_interval) {
  if (c_g < 0.0) throw std::invalid_argument("stopping: C_g must be nonnegative");
  if (c_g == 0.0) return std::numeric_limits<double>::infinity();
  const double k = first_interval ? led.k0_big : led.k_big;
  const double b = first_interval ? led.beta0 : led.beta;
  return 1.0 / (2.0 * (k + 1.0) * c_g * std::pow(led.r, b));
}

StoppingSequence greedy_stopping_times(const GridPath& x, Window w,
                                       const ConstantsLedger& led, double c_g,
                                       bool first_interval) {
  if (w.hi <= w.lo || w.hi >= x.points())
    throw std::invalid_argument("stopping: invalid window");
  const double nu = led.nu;
  const double bx = first_interval ? led.beta0 : led.beta;
  const double mu = greedy_threshold_for(led, c_g, first_interval);
  const double h = x.h;
  const std::size_t last = w.count() - 1;  // relative index of the right edge
  const std::size_t L = last;

  const PlaneView pv = make_planes(x, w);
  const std::vector<double> w2r = make_w2r(h, nu, L);
  const auto& ops = kernels::active();
  const double nan = std::numeric_limits<double>::quiet_NaN();

  StoppingSequence seq;
  seq.interval = w;
  seq.threshold = mu;
  seq.indices.push_back(w.lo);

  std::size_t a = 0;
  while (a < last) {
    // The condition value is nondecreasing in the candidate endpoint (both the
    // span factor and the seminorm grow), so a single forward sweep finds the
    // maximal admissible endpoint.
    double best_sq = 0.0;
    std::size_t b = a;
    double closing = 0.0;
    double overshoot = nan;
    while (b < last) {
      const std::size_t cand = b + 1;
      const double col = ops.col_max_sq(pv.planes, x.dim, a, cand, w2r.data(), L);
      const double cand_sq = col > best_sq ? col : best_sq;
      const double dt = static_cast<double>(cand - a) * h;
      const double cond = std::pow(dt, nu - bx) * std::sqrt(cand_sq);
      if (cond <= mu) {
        b = cand;
        best_sq = cand_sq;
        closing = cond;
      } else {
        overshoot = cond;
        break;
      }
    }
    if (b == a) {
      // Even one grid step violates the threshold: the grid cannot resolve the
      // continuum construction here. Advance one step (storing the violating
      // value as the closing value) and flag the sequence.
      seq.collapsed = true;
      b = a + 1;
      closing = overshoot;
      overshoot = nan;
    }
    seq.indices.push_back(w.lo + b);
    seq.cond_at_close.push_back(closing);
    seq.cond_one_more.push_back(b < last ? overshoot : nan);
    a = b;
  }
  return seq;
}

double nn_bound(const GridPath& x, Window w, const ConstantsLedger& led, double c_g,
                bool first_interval) {
  if (c_g < 0.0) throw std::invalid_argument("stopping: C_g must be nonnegative");
  const double bx = first_interval ? led.beta0 : led.beta;
  const double k = first_interval ? led.k0_big : led.k_big;
  if (c_g == 0.0) return 1.0;
  const double semi = holder_semi_value(x, w, led.nu);
  const double e = 1.0 / (led.nu - bx);
  const double bracket = 2.0 * (k + 1.0) * c_g * std::pow(led.r, led.nu);
  return 1.0 + std::pow(bracket, e) * std::pow(semi, e);
}

}  // namespace ydl
