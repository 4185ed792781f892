#pragma once

#include <vector>

#include "ydl/grid.hpp"

namespace ydl {

/// Sewing constant K = 1 / (1 - 2^{1-(beta+nu)}) of the Young–Loève estimate.
/// Requires beta + nu > 1 (throws otherwise).
double k_constant(double beta, double nu);

/// Left-point Riemann–Stieltjes sum over window w:
///   sum_{k=lo}^{hi-1} Y(t_k) (x(t_{k+1}) - x(t_k)).
/// Y is matrix-valued with integrand.dim = d*m (row-major d x m per sample) and
/// the driver is m-dimensional; returns the d-vector value. Terms are accumulated
/// in ascending index order with Neumaier compensation, per component, so runs
/// are reproducible and cumulative continuation is exact.
std::vector<double> integrate_left(const GridPath& integrand, const GridPath& driver, Window w);

/// Convenience for d = m = 1.
double integrate_left_scalar(const GridPath& integrand, const GridPath& driver, Window w);

/// Cumulative integral path I(t_k) over the window (I at w.lo is 0, dim d).
GridPath integrate_left_prefix(const GridPath& integrand, const GridPath& driver, Window w);

/// Defect check of the Young–Loève estimate on one window [s, t]:
///   lhs = | I(s,t) - Y(s) (x(t) - x(s)) |
///   rhs = K (t-s)^{beta+nu} |x|_{nu,[s,t]} |Y|_{beta,[s,t]}
/// with discrete grid seminorms (matrix integrands measured in Frobenius norm,
/// which dominates the operator norm). pass = lhs <= rhs * (1 + tol).
struct YoungDefect {
  double lhs = 0.0;
  double rhs = 0.0;
  double semi_x = 0.0;
  double semi_y = 0.0;
  bool pass = false;
};
YoungDefect young_loeve_check(const GridPath& integrand, const GridPath& driver,
                              Window w, double beta, double nu, double tol = 1e-9);

}  // namespace ydl
