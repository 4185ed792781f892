#include "ydl/grid.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace ydl {

namespace {

[[noreturn]] void fail(const std::string& what) { throw std::invalid_argument(what); }

}  // namespace

std::size_t index_of(const GridPath& p, double t) {
  if (p.h <= 0.0) fail("grid: nonpositive step");
  const double rel = (t - p.t0) / p.h;
  const double rounded = std::nearbyint(rel);
  if (std::fabs(rel - rounded) > 1e-9 * std::fmax(1.0, std::fabs(rel)))
    fail("grid: time " + std::to_string(t) + " is not a grid point (h=" + std::to_string(p.h) + ")");
  if (rounded < -0.5) fail("grid: time " + std::to_string(t) + " precedes the sampled range");
  const auto k = static_cast<std::size_t>(rounded + 0.5);
  if (k >= p.points()) fail("grid: time " + std::to_string(t) + " beyond the sampled range");
  return k;
}

Window window_of(const GridPath& p, double a, double b) {
  if (b < a) fail("grid: window end precedes start");
  Window w{index_of(p, a), index_of(p, b)};
  return w;
}

std::size_t steps_of(double len, double h) {
  if (h <= 0.0) fail("grid: nonpositive step");
  if (len < 0.0) fail("grid: negative duration");
  const double rel = len / h;
  const double rounded = std::nearbyint(rel);
  if (std::fabs(rel - rounded) > 1e-9 * std::fmax(1.0, rel))
    fail("grid: duration " + std::to_string(len) + " is not a multiple of h=" + std::to_string(h));
  return static_cast<std::size_t>(rounded + 0.5);
}

HistorySegment segment_view(const GridPath& p, double t, double r) {
  HistorySegment seg;
  seg.path = &p;
  seg.end_index = index_of(p, t);
  seg.steps = steps_of(r, p.h);
  if (seg.steps > seg.end_index)
    fail("grid: segment [t-r, t] starts before the sampled range");
  return seg;
}

GridPath materialize(const HistorySegment& seg) {
  GridPath out;
  out.dim = seg.path->dim;
  out.h = seg.path->h;
  out.t0 = -static_cast<double>(seg.steps) * seg.path->h;
  const std::size_t first = seg.end_index - seg.steps;
  const auto d = static_cast<std::size_t>(out.dim);
  out.values.assign(seg.path->values.begin() + static_cast<std::ptrdiff_t>(first * d),
                    seg.path->values.begin() + static_cast<std::ptrdiff_t>((seg.end_index + 1) * d));
  return out;
}

}  // namespace ydl
