#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ydl/fbm.hpp"
#include "ydl/ledger.hpp"
#include "ydl/solver.hpp"

namespace ydl {

/// Path functionals entering the contraction products. With X the driver's
/// nu-seminorm on a window of span r:
///   F = 1 + [2 (K+1) C_g r^nu]^{1/(nu-beta)} X^{1/(nu-beta)}   (count bound)
///   G = X (1 + e^{kappa F})
///   H = (1 + X) e^{kappa F}
/// kappa F reaches the thousands at moderate amplitudes, so g and h overflow
/// to +inf while remaining meaningful on a log scale; log_h carries the exact
/// value, and log_contraction_factor below does the same for log(1 + C_g M7 G).
struct GHFactors {
  double f = 0.0;
  double g = 0.0;
  double h = 0.0;
  double log_h = 0.0;  ///< kappa F + log(1 + X), never overflows
  double x_semi = 0.0;
  /// First-interval variant of F (exponents beta0, K0).
  double f_first = 0.0;
};

GHFactors gh_from_semi(double x_semi, const ConstantsLedger& led, double c_g);
GHFactors g_h_factors(const GridPath& x, Window w, const ConstantsLedger& led,
                      double c_g);

/// log(1 + C_g M7 G) evaluated from the window seminorm. Computed as
/// log(1 + e^t + e^{t+s}) with t = log(C_g M7 X), s = kappa F (exact
/// rearrangement of G = X(1 + e^{kappa F})), so it stays finite where the
/// direct product overflows.
double log_contraction_factor(double x_semi, const ConstantsLedger& led, double c_g);

/// Closed-form majorant of the above:
///   kappa + 2 C_g M7 X + kappa [4 (K+1) C_g r^nu]^{1/(nu-beta)} X^{1/(nu-beta)}.
double log_factor_majorant(double x_semi, const ConstantsLedger& led, double c_g);

struct ErgodicEstimate {
  std::string quantity;
  double value = 0.0;
  double ci_half = 0.0;  ///< 95% half-width (batch means)
  std::size_t n = 0;
  int batches = 0;
};

/// Ghat = E log(1 + C_g M7 G(x,[0,r])) by Monte Carlo over independent paths,
/// each evaluated on its window [0, r]. Exactly monotone in c_g path-by-path.
ErgodicEstimate birkhoff_g_hat(const std::vector<TwoSidedPath>& ensemble,
                               const ConstantsLedger& led, double c_g);

/// Same quantity as a single-path time average over the windows
/// [k r, (k+1) r], k = 0..n_windows-1.
ErgodicEstimate birkhoff_time_average(const TwoSidedPath& x, const ConstantsLedger& led,
                                      double c_g, int n_windows);

struct EpsilonResult {
  double eps_hat = 0.0;    ///< certified lower end of the final bracket
  double lo = 0.0;         ///< qualifies: Ghat(lo) + CI < lambda0 * r
  double hi = 0.0;         ///< fails the margin test (or equals the upper bracket)
  double g_hat_at_eps = 0.0;
  double ci_at_eps = 0.0;
  double margin = 0.0;     ///< lambda0 * r
  bool upper_bracket_hit = false;  ///< the whole bracket qualified
};

/// Largest noise amplitude whose smallness certificate closes:
/// Ghat(c_g) + CI < lambda0 * r. Tries the upper bracket first; otherwise
/// descends geometrically to find any qualifying amplitude, then bisects in
/// log space until hi/lo <= 1 + min(tol, 1). The certified amplitude can sit
/// many decades below the bracket, so a linear bisection would collapse to 0;
/// the log bisection also keeps hi <= 2 eps_hat, giving the two-sided
/// certificate Ghat(eps) + CI < margin <= Ghat(2 eps) + CI. The same ensemble
/// seminorms are reused at every trial (common random numbers), making the
/// estimate exactly monotone in c_g. Rejects lambda0 <= 0.
EpsilonResult epsilon_search(const std::vector<TwoSidedPath>& ensemble,
                             const ConstantsLedger& led, double tol,
                             double upper_bracket = 1.0);

struct AbsorbingSums {
  std::vector<double> partial;  ///< S_k, k = 0..k_max; S_0 = 1; +inf past overflow
  /// Base summand e^{-lambda0 k r} H_k prod_{i<=k} (1 + C_g M7 G_i), k >= 1,
  /// before the M8 (f0 v g0) prefactor (so the decay diagnostic works even
  /// when f0 = g0 = 0). May be +inf in the divergent regime.
  std::vector<double> terms;
  /// log of each base summand, accumulated in log space: finite even where
  /// terms overflow, so divergence is diagnosed from real numbers.
  std::vector<double> log_terms;
  double tail_log_slope = 0.0;  ///< OLS slope of log_terms over the tail half
  bool diverging = false;       ///< terms grow along the tail
  bool overflowed = false;      ///< some partial sum left double range
};

/// Partial sums of the pullback absorbing radius
///   S_k = 1 + M8 (f0 v g0) sum_{j=1}^{k} e^{-lambda0 j r} H(theta_{-jr} x)
///                               prod_{i=1}^{j} (1 + C_g M7 G(theta_{-ir} x))
/// evaluated on the stored two-sided driver. Requires a fitted ledger and
/// driver history down to -k_max * r.
AbsorbingSums absorbing_radius(const TwoSidedPath& x, const ConstantsLedger& led,
                               double c_g, double f0, double g0, int k_max);

struct PullbackRun {
  std::vector<int> depths;
  std::vector<double> diameter;  ///< cloud diameter at time 0 in the weighted beta norm
  std::vector<double> max_norm;  ///< largest segment norm in the cloud
  std::vector<char> overflow;    ///< any member overflowed at this depth
  double initial_diameter = 0.0;
  /// Terminal segments (on [-r, 0]) at the deepest level, one per initial datum.
  std::vector<GridPath> deepest_segments;
};

/// Starts a cloud of initial segments at time -n r and transports it to time 0
/// with the same driver for every depth n = 1..n_max (driver windows shifted,
/// increments shared).
PullbackRun pullback_experiment(const SystemSpec& spec,
                                const std::vector<GridPath>& initial_segments,
                                const TwoSidedPath& x, int n_max);

struct SingletonReport {
  std::vector<double> pullback_dist;  ///< depth n -> segment distance at time 0
  std::vector<double> forward_dist;   ///< time n r -> segment distance, fixed driver
  double pullback_slope = 0.0;        ///< OLS slope of log distance vs depth
  double forward_slope = 0.0;
  bool overflowed = false;
};

/// Two-point contraction experiment. Requires a homogeneous linear diffusion
/// (difference of solutions is again a solution); rejects anything else.
SingletonReport singleton_test(const SystemSpec& spec, const GridPath& eta1,
                               const GridPath& eta2, const TwoSidedPath& x,
                               int n_max);

/// OLS slope of n -> log^+ vals[n-1] (n = 1-based). Stationary sequences give
/// slopes near 0; exponential growth shows up directly.
double logplus_slope(const std::vector<double>& vals);

/// Factor sequence along shifted windows: which selects 'H', 'G' or 'X' (the
/// raw seminorm). backward = true evaluates the factor on the window
/// [-n r, -(n-1) r], else on [n r, (n+1) r], for n = 1..n_max.
std::vector<double> shifted_factor_sequence(const TwoSidedPath& x,
                                            const ConstantsLedger& led, double c_g,
                                            int n_max, bool backward, char which);

struct ContractionReport {
  std::vector<int> k0_grid;
  std::vector<double> median_factor;  ///< per candidate block length
  int chosen_k0 = -1;                 ///< first candidate with median factor < 1
  double fitted_radius = 0.0;         ///< safety-scaled max tail block norm
  double max_norm = 0.0;
  std::size_t overflow_count = 0;
  std::vector<std::vector<double>> block_norms;  ///< per path, chosen-k0 blocks
};

/// Bounded-diffusion regime: solves an ensemble, measures the median
/// contraction factor ||y||_{beta,Delta_{k0}} / ||y||_{beta,Delta_0} over a
/// grid of block lengths, and fits an absorbing radius from the tail blocks.
/// Requires a diffusion with finite sup bound.
ContractionReport bounded_g_contraction(const SystemSpec& spec,
                                        const std::vector<GridPath>& etas,
                                        const std::vector<TwoSidedPath>& xs,
                                        const std::vector<int>& k0_grid, double T,
                                        double safety = 1.5);

}  // namespace ydl
