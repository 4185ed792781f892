#pragma once

#include <cstddef>
#include <vector>

namespace ydl {

/// Uniformly sampled R^d-valued path. values[k*dim + c] is coordinate c of the
/// sample at time t0 + k*h. Samples are immutable once a path is handed to the
/// analysis routines; everything downstream works on const references or views.
struct GridPath {
  double t0 = 0.0;
  double h = 1.0;
  int dim = 1;
  std::vector<double> values;

  std::size_t points() const { return dim > 0 ? values.size() / static_cast<std::size_t>(dim) : 0; }
  double time_at(std::size_t k) const { return t0 + static_cast<double>(k) * h; }
  double t_end() const { return points() == 0 ? t0 : time_at(points() - 1); }
  const double* point(std::size_t k) const { return values.data() + k * static_cast<std::size_t>(dim); }
  double* point(std::size_t k) { return values.data() + k * static_cast<std::size_t>(dim); }
};

/// Closed index range [lo, hi] into a GridPath (a grid-aligned time window).
struct Window {
  std::size_t lo = 0;
  std::size_t hi = 0;
  std::size_t count() const { return hi - lo + 1; }
  double span(const GridPath& p) const { return static_cast<double>(hi - lo) * p.h; }
};

/// Index of time t on the grid of p. Throws std::invalid_argument if t is not a
/// grid point (within 1e-9 * h) or lies outside the sampled range.
std::size_t index_of(const GridPath& p, double t);

/// Window for the time interval [a, b]; both endpoints must be grid points.
Window window_of(const GridPath& p, double a, double b);

/// Number of grid steps represented by duration `len` (must be a near-exact
/// multiple of h; throws otherwise). Used for delays and interval lengths.
std::size_t steps_of(double len, double h);

/// View of one delay segment y_t = { y(t+s) : s in [-r, 0] }.
struct HistorySegment {
  const GridPath* path = nullptr;
  std::size_t end_index = 0;  ///< grid index of time t
  std::size_t steps = 0;      ///< r/h

  int dim() const { return path->dim; }
  /// Sample at s = -lag_steps * h; lag_steps must lie in [0, steps].
  const double* at_lag(std::size_t lag_steps) const { return path->point(end_index - lag_steps); }
};

/// Segment view of p over [t - r, t]. Throws if t or t - r falls off the grid.
HistorySegment segment_view(const GridPath& p, double t, double r);

/// Copy of the segment as a standalone path on [-r, 0].
GridPath materialize(const HistorySegment& seg);

}  // namespace ydl
