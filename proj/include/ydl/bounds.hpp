#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ydl/fbm.hpp"
#include "ydl/ledger.hpp"
#include "ydl/solver.hpp"
#include "ydl/stopping.hpp"

namespace ydl {

struct BoundRow {
  int n = 0;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;  ///< rhs - lhs
  bool pass = true;
  double grid_h = 0.0;
  std::uint64_t path_seed = 0;
};

/// Rows of verified inequalities plus a merged summary. Merging is associative,
/// so per-path reports combine in any order.
struct BoundReport {
  std::vector<BoundRow> rows;
  std::size_t violations = 0;
  double max_rel_violation = 0.0;  ///< max over failing rows of (lhs-rhs)/|rhs|
  bool overflowed = false;         ///< solver left the finite range somewhere
  bool hypothesis_ok = true;       ///< the checked statement's hypothesis held
  int first_holding_n = -1;        ///< first index from which a shape estimate holds

  void add(BoundRow row);
  void merge(const BoundReport& other);
};

/// CSV with header "n,lhs,rhs,slack,pass,grid_h,path_seed", 17 significant
/// digits, '.' decimal point.
std::string bound_report_csv(const BoundReport& rep);

/// One step of the interval recurrence:
///   rhs = e^{4 L_f r + kappa N} [prev + (4 r f0 + g0/C_g)] - (4 r f0 + g0/C_g).
/// Monotone increasing in prev_norm, n_count, f0 and g0. Rejects c_g = 0 with
/// g0 > 0 (the quotient is undefined); c_g = 0 with g0 = 0 drops the term.
double recurrence_bound_ykk(double prev_norm, double n_count,
                            const ConstantsLedger& led, double f0, double g0,
                            double c_g);

/// Everything the per-interval estimates consume, measured once per trajectory:
/// driver seminorms, solution interval norms, greedy counts and their bounds.
/// Entry 0 of nn/nn_rhs uses the first-interval exponents (beta0, K0); entries
/// n >= 1 use (beta, K).
struct PathIntervalData {
  std::uint64_t path_seed = 0;
  double grid_h = 0.0;
  bool ok = true;          ///< solver stayed finite
  bool collapsed = false;  ///< some greedy scan could not resolve the threshold
  std::vector<double> x_semi;        ///< |||x|||_{nu, Delta_n}
  std::vector<IntervalDiag> y_int;   ///< solution norms per Delta_n (exponent beta)
  std::vector<double> nn;            ///< measured greedy counts N_n
  std::vector<double> nn_rhs;        ///< counting bounds for N_n
  double y_sup_0r = 0.0;    ///< ||y||_{inf,[0,r]}
  double eta_beta0 = 0.0;   ///< ||eta||_{beta0,[-r,0]} (weighted)
  double y_beta0_0r = 0.0;  ///< ||y||_{beta0,[0,r]} (weighted)
  double y_beta_0r = 0.0;   ///< ||y||_{beta,[0,r]} (weighted) = y_int[0].weighted
};

/// Measures a solved trajectory against its driver. The solve may carry empty
/// diagnostics (they are recomputed here with the ledger exponents).
PathIntervalData analyze_path(const SolveOutput& y, const TwoSidedPath& x,
                              const ConstantsLedger& led,
                              std::uint64_t path_seed = 0);

/// Interval recurrence check, one row per n >= 1 with the measured previous
/// norm and greedy count. When the ledger carries fitted constants, the
/// exponentially-weighted closure estimate is evaluated as well and
/// first_holding_n reports the first index from which it holds.
BoundReport verify_trajectory_recurrence(const PathIntervalData& data,
                                         const ConstantsLedger& led);
BoundReport verify_trajectory_recurrence(const SolveOutput& y, const TwoSidedPath& x,
                                         const ConstantsLedger& led, double c_g,
                                         double f0, double g0);

/// First-interval rows: n=0 the beta0 recurrence, n=1 the greedy count against
/// its counting bound (pass iff count <= ceil(bound)), n=2 the beta-norm shape
/// with the fitted constant D (rhs infinite when D is not fitted yet).
BoundReport first_interval_bounds(const PathIntervalData& data,
                                  const ConstantsLedger& led);
BoundReport first_interval_bounds(const SolveOutput& y, const TwoSidedPath& x,
                                  const ConstantsLedger& led, double c_g,
                                  double f0, double g0);

enum class IntervalBoundMode { supnorm, holder };

/// Checks the exponentially-weighted interval bound (sup-norm or Hölder form)
/// using the ledger's fitted constants; requires lambda0 > 0 and a fitted
/// ledger. One row per n >= 1.
BoundReport interval_norm_bounds(const PathIntervalData& data,
                                 const ConstantsLedger& led, IntervalBoundMode mode);

/// Minimal constant that makes the interval bound hold for this path (the
/// empirical M2/M4 for one trajectory); 0 when every row is slack at M = 0.
double interval_bound_min_constant(const PathIntervalData& data,
                                   const ConstantsLedger& led,
                                   IntervalBoundMode mode);

/// Calibrates M2/M4 (interval bounds) over an ensemble, installing them in
/// the ledger with the given safety factor and fingerprint. Fit these on a
/// calibration split and verify on held-out paths: the bound shapes are
/// stable across paths, so the fit generalizes.
void calibrate_ledger(ConstantsLedger& led, const std::vector<PathIntervalData>& data,
                      double safety, std::uint64_t ensemble_seed);

/// Calibrates D and M9 (first-interval shape) over an ensemble. The shape's
/// denominator contains e^{kappa N_0}, which spans hundreds of orders of
/// magnitude across paths (the counting bound is a ~1/(nu-beta) power of the
/// driver seminorm), so this constant only covers the ensemble it was fitted
/// on; fit it on the full ensemble you intend to check.
void calibrate_first_interval(ConstantsLedger& led,
                              const std::vector<PathIntervalData>& data, double safety,
                              std::uint64_t ensemble_seed);

/// Discrete Gronwall majorant: bound[n] for n = 0..alphas.size(), where
///   bound[n] = max{a, u0} prod_{k<n} (1+alpha_k)
///            + sum_{k<n} beta_k prod_{j=k+1}^{n-1} (1+alpha_j).
/// All inputs must be nonnegative; alphas and betas must have equal length.
std::vector<double> gronwall_discrete_bound(double a, double u0,
                                            const std::vector<double>& alphas,
                                            const std::vector<double>& betas);

/// Continuous Gronwall verdict on a grid: if u <= a + beta * int u (trapezoid)
/// holds, checks u(t) <= a(t) + int_{t0}^t a(s) beta e^{beta (t-s)} ds at every
/// grid point. When the hypothesis fails, hypothesis_ok is false and no claim
/// is made (rows empty).
BoundReport gronwall_continuous_check(const GridPath& u, const GridPath& a,
                                      double beta_const);

}  // namespace ydl
