#include "ydl/holder.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "ydl/kernels.hpp"

namespace ydl {

namespace {

// Scratch buffers reused across calls; the norm scans are pure functions of their
// inputs, so thread_local reuse keeps them allocation-free and thread-safe.
struct Scratch {
  std::vector<double> w2r;
  std::vector<double> planes;
  std::vector<const double*> ptrs;
};
thread_local Scratch tls;

// Reversed squared-weight table for lag weights (lag*h)^{-beta}, lag in [1, L].
const double* build_w2r(std::size_t L, double h, double beta) {
  tls.w2r.resize(L);
  for (std::size_t lag = 1; lag <= L; ++lag) {
    const double w = std::pow(static_cast<double>(lag) * h, -beta);
    tls.w2r[L - lag] = w * w;
  }
  return tls.w2r.data();
}

// Structure-of-arrays view of the window; dim == 1 paths are used in place.
const double* const* build_planes(const GridPath& y, Window w) {
  const auto d = static_cast<std::size_t>(y.dim);
  tls.ptrs.resize(d);
  if (y.dim == 1) {
    tls.ptrs[0] = y.values.data() + w.lo;
  } else {
    const std::size_t n = w.count();
    tls.planes.resize(n * d);
    for (std::size_t c = 0; c < d; ++c) {
      double* plane = tls.planes.data() + c * n;
      for (std::size_t k = 0; k < n; ++k) plane[k] = y.values[(w.lo + k) * d + c];
      tls.ptrs[c] = plane;
    }
  }
  return tls.ptrs.data();
}

void check_window(const GridPath& y, Window w) {
  if (w.hi < w.lo || w.hi >= y.points())
    throw std::invalid_argument("holder: window out of range");
}

double semi_value_impl(const GridPath& y, Window w, double beta) {
  const std::size_t n = w.count();
  if (n < 2) return 0.0;
  const std::size_t L = n - 1;
  const double* w2r = build_w2r(L, y.h, beta);
  const double* const* planes = build_planes(y, w);
  const double best_sq =
      kernels::pair_max_sq(kernels::active(), planes, y.dim, 0, L, w2r, L);
  return std::sqrt(best_sq);
}

// Seminorm over the uniform sub-lattice {w.lo + k*stride} (trailing remainder
// points dropped, so lag weights stay tabulated). Lower bound on the full scan.
double semi_value_strided(const GridPath& y, Window w, double beta, std::size_t stride,
                          double* out_s, double* out_t) {
  const std::size_t n = (w.hi - w.lo) / stride + 1;
  if (n < 2) return 0.0;
  GridPath sub;
  sub.t0 = y.time_at(w.lo);
  sub.h = y.h * static_cast<double>(stride);
  sub.dim = y.dim;
  const auto d = static_cast<std::size_t>(y.dim);
  sub.values.resize(n * d);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t c = 0; c < d; ++c)
      sub.values[k * d + c] = y.values[(w.lo + k * stride) * d + c];
  if (out_s && out_t) {
    HolderEstimate e = holder_seminorm(sub, Window{0, n - 1}, beta);
    *out_s = e.arg_s;
    *out_t = e.arg_t;
    return e.value;
  }
  return semi_value_impl(sub, Window{0, n - 1}, beta);
}

}  // namespace

double holder_semi_value(const GridPath& y, Window w, double beta) {
  check_window(y, w);
  return semi_value_impl(y, w, beta);
}

HolderEstimate holder_seminorm(const GridPath& y, Window w, double beta) {
  check_window(y, w);
  HolderEstimate est;
  const std::size_t n = w.count();
  if (n < 2) return est;
  est.value = semi_value_impl(y, w, beta);
  if (est.value == 0.0) {
    est.arg_s = y.time_at(w.lo);
    est.arg_t = y.time_at(w.lo + 1);
    return est;
  }
  // Locate an attaining pair with a scalar argmax rescan; it performs the same
  // roundings as the kernels, so its maximum matches est.value bitwise.
  const std::size_t L = n - 1;
  const double* w2r = build_w2r(L, y.h, beta);
  const auto d = static_cast<std::size_t>(y.dim);
  double best_sq = 0.0;
  std::size_t bi = w.lo, bj = w.lo + 1;
  for (std::size_t j = 1; j <= L; ++j) {
    const double* wb = w2r + (L - j);
    for (std::size_t i = 0; i < j; ++i) {
      double acc = 0.0;
      for (std::size_t c = 0; c < d; ++c) {
        const double t = y.values[(w.lo + j) * d + c] - y.values[(w.lo + i) * d + c];
        acc += t * t;
      }
      const double v = acc * wb[i];
      if (v > best_sq) {
        best_sq = v;
        bi = w.lo + i;
        bj = w.lo + j;
      }
    }
  }
  est.arg_s = y.time_at(bi);
  est.arg_t = y.time_at(bj);
  const double coarse = semi_value_strided(y, w, beta, 2, nullptr, nullptr);
  est.dyadic_slack = (est.value - coarse) / est.value;
  return est;
}

HolderEstimate holder_seminorm_decimated(const GridPath& y, Window w, double beta,
                                         std::size_t stride) {
  check_window(y, w);
  if (stride == 0) throw std::invalid_argument("holder: zero stride");
  HolderEstimate est;
  double s = 0.0, t = 0.0;
  est.value = semi_value_strided(y, w, beta, stride, &s, &t);
  est.arg_s = s;
  est.arg_t = t;
  est.dyadic_slack = 0.0;  // not meaningful for an already-decimated scan
  return est;
}

double sup_norm(const GridPath& y, Window w) {
  check_window(y, w);
  const double* const* planes = build_planes(y, w);
  const std::size_t n = w.count();
  return std::sqrt(kernels::active().sup_sq(planes, y.dim, 0, n - 1));
}

double beta_norm(const GridPath& y, Window w, double beta, bool weighted) {
  const WindowNorms nrm = window_norms(y, w, beta);
  if (!weighted) return nrm.sup + nrm.semi;
  return nrm.weighted;
}

WindowNorms window_norms(const GridPath& y, Window w, double beta) {
  check_window(y, w);
  WindowNorms out;
  const std::size_t n = w.count();
  const double* const* planes = build_planes(y, w);
  out.sup = std::sqrt(kernels::active().sup_sq(planes, y.dim, 0, n - 1));
  if (n >= 2) {
    const std::size_t L = n - 1;
    const double* w2r = build_w2r(L, y.h, beta);
    out.semi = std::sqrt(kernels::pair_max_sq(kernels::active(), planes, y.dim, 0, L, w2r, L));
  }
  out.weighted = out.sup + std::pow(w.span(y), beta) * out.semi;
  return out;
}

GridPath path_difference(const GridPath& a, const GridPath& b) {
  if (a.dim != b.dim || a.values.size() != b.values.size())
    throw std::invalid_argument("paths: shape mismatch in difference");
  if (std::fabs(a.h - b.h) > 1e-12 * a.h || std::fabs(a.t0 - b.t0) > 1e-9 * std::fmax(1.0, std::fabs(a.t0)))
    throw std::invalid_argument("paths: grid mismatch in difference");
  GridPath out = a;
  for (std::size_t k = 0; k < out.values.size(); ++k) out.values[k] = a.values[k] - b.values[k];
  return out;
}

}  // namespace ydl
