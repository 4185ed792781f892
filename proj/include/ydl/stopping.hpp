#pragma once

#include <cstddef>
#include <vector>

#include "ydl/grid.hpp"
#include "ydl/ledger.hpp"

namespace ydl {

/// Greedy stopping times on one delay interval: starting from the left edge,
/// each time advances to the largest grid point t with
///   (t - t_i)^(nu-beta) * |||x|||_{nu,[t_i,t]} <= threshold,
/// capped at the right edge. The per-interval closing values (and the value one
/// step further, which must violate the threshold unless the interval is final)
/// are stored so maximality is assertable from the sequence alone.
struct StoppingSequence {
  Window interval;                    ///< the delay interval scanned
  std::vector<std::size_t> indices;   ///< grid indices t_0 < ... < t_N (t_0 = lo)
  std::vector<double> cond_at_close;  ///< condition value at each t_{i+1}
  std::vector<double> cond_one_more;  ///< value one grid step past t_{i+1.}; NaN for the final interval
  double threshold = 0.0;             ///< mu actually used
  /// True when some step could not satisfy the threshold even for a single grid
  /// step (the grid is too coarse to resolve the continuum construction; the
  /// scan still advances one step so it terminates).
  bool collapsed = false;

  std::size_t count() const { return indices.size() - 1; }  ///< N_n
};

/// first_interval = true switches to the beta0/K0 exponents (the solution is
/// only beta0-Hölder on the first interval). c_g is passed explicitly so
/// diffusion-size sweeps reuse one ledger.
StoppingSequence greedy_stopping_times(const GridPath& x, Window w,
                                       const ConstantsLedger& led, double c_g,
                                       bool first_interval = false);

/// Counting bound  1 + [2 (K+1) C_g r^nu]^{1/(nu-beta)} |||x|||^{1/(nu-beta)}
/// evaluated with the discrete seminorm over w (beta0/K0 variant when
/// first_interval).
double nn_bound(const GridPath& x, Window w, const ConstantsLedger& led, double c_g,
                bool first_interval = false);

/// The threshold used by the greedy scan for this diffusion size.
double greedy_threshold_for(const ConstantsLedger& led, double c_g,
                            bool first_interval = false);

}  // namespace ydl
