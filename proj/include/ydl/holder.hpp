#pragma once

#include <cstddef>

#include "ydl/grid.hpp"

namespace ydl {

/// Result of a discrete Hölder-seminorm scan:
///   value = max over grid pairs s < t in the window of |y(t) - y(s)| / (t - s)^beta,
/// together with an attaining pair and the relative slack against the estimate on
/// the next-coarser dyadic subgrid (stride 2). slack in [0, 1]; large slack flags a
/// window whose roughness is not resolved by the grid.
struct HolderEstimate {
  double value = 0.0;
  double arg_s = 0.0;
  double arg_t = 0.0;
  double dyadic_slack = 0.0;
};

/// Exact O(n^2) pair scan (the canonical estimator; all certified bounds use it).
HolderEstimate holder_seminorm(const GridPath& y, Window w, double beta);

/// Seminorm value only (no attaining pair / slack); the hot path used in bound
/// verification loops.
double holder_semi_value(const GridPath& y, Window w, double beta);

/// Stride-decimated scan over the sub-lattice {lo, lo+stride, ...} U {hi}.
/// Lower bound on the full scan; intended for profiling only, never for bounds.
HolderEstimate holder_seminorm_decimated(const GridPath& y, Window w, double beta,
                                         std::size_t stride);

/// sup over window of the Euclidean norm |y(t)|.
double sup_norm(const GridPath& y, Window w);

/// Weighted Hölder norm ||y||_{beta,[a,b]} = sup + (b-a)^beta * seminorm when
/// weighted, or the unweighted variant sup + seminorm.
double beta_norm(const GridPath& y, Window w, double beta, bool weighted = true);

/// sup, seminorm and weighted norm of one window in a single pass.
struct WindowNorms {
  double sup = 0.0;
  double semi = 0.0;
  double weighted = 0.0;
};
WindowNorms window_norms(const GridPath& y, Window w, double beta);

/// Pointwise difference a - b of two paths on identical grids (same t0, h, dim).
GridPath path_difference(const GridPath& a, const GridPath& b);

}  // namespace ydl
