#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "ydl/grid.hpp"
#include "ydl/stats.hpp"

namespace ydl {

/// Parameters of a two-sided fractional Brownian motion draw on [-T, T].
/// The Young-integration pipeline requires hurst in (1/2, 1).
struct FbmSpec {
  double hurst = 0.75;
  double h = 1.0 / 4096.0;
  double horizon = 1.0;  ///< T; samples cover [-T, T]
  int dim = 1;
  std::uint64_t seed = 0;

  void validate() const;  ///< throws std::invalid_argument naming the offending field
};

/// Two-sided driver path. Stores one shared sample array (the single circulant
/// draw, cumulatively summed); the pin "value at time 0 is exactly 0" and the
/// shift map (theta_s x)(t) = x(t+s) - x(s) are handled lazily by keeping an
/// origin index into the shared storage. Because shifted paths alias the same
/// samples, solver increments and Hölder scans of shifted drivers perform
/// exactly the same floating-point work as on the base path — the cocycle and
/// shift-flow identities then hold bitwise, not just approximately.
class TwoSidedPath {
 public:
  TwoSidedPath() = default;
  TwoSidedPath(std::shared_ptr<const GridPath> raw, std::size_t origin,
               std::size_t lo, std::size_t hi);

  double h() const { return raw_->h; }
  int dim() const { return raw_->dim; }
  bool empty() const { return raw_ == nullptr; }

  /// Visible symmetric window endpoints (shrinks under shifts).
  double t_min() const;
  double t_max() const;
  std::size_t points() const { return hi_ - lo_ + 1; }

  /// Pinned sample: value of coordinate c at the k-th visible grid point.
  double value(std::size_t k, int c) const;
  /// Pinned sample at time t (must be a visible grid point).
  double value_at(double t, int c) const;

  /// Standalone pinned copy of the visible window (t0 = t_min()).
  GridPath materialize() const;

  /// Shared-storage access used by the solver, the Hölder scans (differences
  /// cancel the pin) and the path cache.
  const GridPath& raw() const { return *raw_; }
  const std::shared_ptr<const GridPath>& raw_ptr() const { return raw_; }
  std::size_t origin() const { return origin_; }
  std::size_t lo() const { return lo_; }
  std::size_t hi() const { return hi_; }
  /// Raw index of (visible) time t; throws when off-grid or outside storage.
  std::size_t raw_index_at(double t) const;

 private:
  std::shared_ptr<const GridPath> raw_;
  std::size_t origin_ = 0;
  std::size_t lo_ = 0;
  std::size_t hi_ = 0;
};

/// Exact fractional Brownian motion over the full two-sided increment lattice:
/// one circulant-embedding (Davies–Harte) draw per coordinate, cumulatively
/// summed and re-pinned so the sample at time 0 is 0. Deterministic per seed.
TwoSidedPath sample_fbm_two_sided(const FbmSpec& spec);

/// theta_s x as a view on the same storage; s must be grid-aligned. The visible
/// window shrinks symmetrically by |s| per the metric-dynamical-system shift.
TwoSidedPath shift_path(const TwoSidedPath& x, double s);

/// Monte Carlo estimate of the driver moment
///   Gamma(beta) = ( E ||Z||_{beta,[-r,r]}^{1/(nu-beta)} )^{nu-beta}
/// with a batch-means confidence half-width.
MeanCI gamma_moment(const std::vector<TwoSidedPath>& ensemble, double beta,
                    double nu, double r);

/// 64-bit seed mixing (splitmix64 finalizer rounds); path i of an ensemble uses
/// mix_seed(base_seed, i), coordinates use a further namespaced mix.
std::uint64_t mix_seed(std::uint64_t base, std::uint64_t index);

/// Internals exposed for direct unit testing.
namespace fbm_detail {
/// Autocovariance gamma(k), k = 0..count-1, of fGn increments at step h.
std::vector<double> fgn_autocov(double hurst, double h, std::size_t count);
/// One fGn coordinate draw of length n (step h), Davies–Harte.
std::vector<double> sample_fgn(double hurst, double h, std::size_t n, std::uint64_t seed);
}  // namespace fbm_detail

}  // namespace ydl
