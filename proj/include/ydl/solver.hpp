#pragma once

#include <cstddef>
#include <vector>

#include "ydl/fbm.hpp"
#include "ydl/grid.hpp"
#include "ydl/system.hpp"

namespace ydl {

/// Norms of the solution over one delay interval [n r, (n+1) r].
struct IntervalDiag {
  int n = 0;
  double sup = 0.0;       ///< sup norm over the interval
  double semi = 0.0;      ///< discrete Hölder seminorm, exponent beta
  double weighted = 0.0;  ///< sup + r^beta * semi
};

struct SolveOutput {
  GridPath y;                       ///< on [-r, T]; samples [-r,0] are eta bitwise
  std::size_t r_steps = 0;          ///< index of time 0 in y
  bool ok = true;                   ///< false when the state left the finite range
  std::size_t overflow_index = 0;   ///< first non-finite sample index (when !ok)
  std::vector<IntervalDiag> intervals;  ///< per full delay interval (beta norms)

  double t_end() const { return y.t_end(); }
};

/// Wraps a plain grid path (which must contain time 0) as a driver view, so the
/// solvers can consume deterministic test drivers alongside sampled noise.
TwoSidedPath wrap_driver(GridPath p);

/// Left-point Euler for dy = [A y + f(y_t)] dt + g(y_t) dx:
///   y_{k+1} = y_k + [A y_k + f(y_{t_k})] h + g(y_{t_k}) (x(t_{k+1}) - x(t_k)).
/// eta must cover [-r, 0] on the driver grid; delay lookups hit exact grid
/// indices, so restarted solves repeat identical floating-point steps and the
/// cocycle identity holds bitwise. On non-finite state the solver halts and
/// reports the first bad index (ok = false), keeping diagnostics of the
/// completed intervals.
SolveOutput solve_euler(const SystemSpec& spec, const GridPath& eta,
                        const TwoSidedPath& x, double T,
                        bool with_diagnostics = true);

/// Variation-of-constants stepping with the left-endpoint (Euler) state frozen
/// inside the integrands over each step:
///   y_{k+1} = Phi(h) [ y_k + f(y_{t_k}) h + g(y_{t_k}) (x(t_{k+1}) - x(t_k)) ],
/// Phi = matrix exponential of A h, computed once per solve. With f = g = 0 the
/// flow Phi(t) y_0 is reproduced to rounding; otherwise this is an independent
/// first-order discretization used to cross-validate solve_euler.
SolveOutput solve_voc(const SystemSpec& spec, const GridPath& eta,
                      const TwoSidedPath& x, double T,
                      bool with_diagnostics = true);

/// Reference-quality integrator for the deterministic equation (g must be
/// identically zero): classical 4-stage Runge–Kutta, interval by interval,
/// with the delayed term read from the already-computed trajectory. Half-step
/// stage lookups land midway between grid nodes and use cubic Hermite
/// interpolation (derivatives are the stored right-hand sides; finite
/// differences inside the initial segment).
SolveOutput method_of_steps(const SystemSpec& spec, const GridPath& eta, double T,
                            bool with_diagnostics = true);

/// Splits y into mu + h: mu follows the deterministic dynamics with mu = y on
/// [0, r] (same Euler stepping, diffusion dropped), h := y - mu. Both parts are
/// returned on [0, T] with per-interval beta-norms for contraction analysis in
/// blocks of k0 delay intervals.
struct MuHDecomposition {
  SolveOutput y;    ///< the full (noisy) solve
  GridPath mu;      ///< deterministic part on [0, T]
  GridPath h_path;  ///< y - mu on [0, T]
  std::vector<IntervalDiag> mu_intervals;
  std::vector<IntervalDiag> h_intervals;
  int k0 = 2;
  bool ok = true;
};
MuHDecomposition decompose_mu_h(const SystemSpec& spec, const GridPath& eta,
                                const TwoSidedPath& x, double T, int k0);

/// The path t -> F(y_t) sampled on [a, b] (flattened row-major when F is
/// matrix-valued); requires [a - r, b] inside y's domain. Used to check the
/// Lipschitz transport of sup and Hölder norms through the functionals.
GridPath functional_along(const FunctionalDescriptor& f, const GridPath& y,
                          double r, double a, double b);

/// Per-interval norms: entry n describes [start_time + n*len,
/// start_time + (n+1)*len], exponent beta; full intervals only.
std::vector<IntervalDiag> interval_norms(const GridPath& y, double start_time,
                                         double len, double beta);

}  // namespace ydl
