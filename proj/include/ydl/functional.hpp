#pragma once

#include <Eigen/Dense>
#include <variant>
#include <vector>

#include "ydl/grid.hpp"

namespace ydl {

/// One affine lag term: contributes B * eta(-lag) to a column.
struct LinearTerm {
  double lag = 0.0;
  Eigen::MatrixXd B;  ///< d x d
};

/// Affine point-delay functional C([-r,0], R^d) -> R^{d x m}:
///   column l = offset.col(l) + sum_j B_{j,l} * eta(-lag_{j,l}).
/// Lipschitz constant (Euclidean/Frobenius output norm, sup-norm argument):
///   sqrt( sum_l ( sum_j ||B_{j,l}||_2 )^2 ).
struct PointDelayLinear {
  Eigen::MatrixXd offset;                        ///< d x m
  std::vector<std::vector<LinearTerm>> columns;  ///< size m
};

/// Bounded saturating functional; entry (i, l) = c * tanh(<w, eta(-lag)>),
/// entries listed row-major (index i*m + l). Uniform bound sqrt(sum c^2),
/// Lipschitz constant sqrt(sum (c ||w||)^2).
struct SatEntry {
  double lag = 0.0;
  Eigen::VectorXd w;  ///< length d
  double c = 0.0;
};
struct SaturatingPoint {
  int rows = 1;
  int cols = 1;
  std::vector<SatEntry> entries;  ///< rows*cols of them
};

using FunctionalDescriptor = std::variant<PointDelayLinear, SaturatingPoint>;

int functional_rows(const FunctionalDescriptor& f);
int functional_cols(const FunctionalDescriptor& f);
double functional_lipschitz(const FunctionalDescriptor& f);
Eigen::MatrixXd functional_value_at_zero(const FunctionalDescriptor& f);
/// sup_eta ||F(eta)||; +infinity when any linear term is nonzero.
double functional_sup_bound(const FunctionalDescriptor& f);
bool functional_is_zero(const FunctionalDescriptor& f);
/// Linear with zero offset (degree-1 homogeneous).
bool functional_is_linear_homogeneous(const FunctionalDescriptor& f);
/// All lags, for grid-alignment validation.
std::vector<double> functional_lags(const FunctionalDescriptor& f);

/// Evaluate on a history segment. Lags must be nonnegative multiples of the grid
/// step with lag <= r (throws otherwise).
Eigen::MatrixXd functional_eval(const FunctionalDescriptor& f, const HistorySegment& seg);

/// Precompiled evaluation plan for the solver hot loop: lags resolved to grid
/// steps once, matrices flattened, no allocation per step.
class FunctionalPlan {
 public:
  FunctionalPlan() = default;
  /// Throws std::invalid_argument if a lag is off-grid, negative or > r.
  FunctionalPlan(const FunctionalDescriptor& f, double h, double r, int state_dim);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t max_lag_steps() const { return max_lag_steps_; }

  /// out (rows*cols, row-major) from the trajectory samples traj[k*d + c]; the
  /// segment ends at sample index k (k >= r/h must hold, callers guarantee it).
  void eval(const double* traj, std::size_t k, double* out) const;

 private:
  struct LinPlan {
    std::size_t lag_steps;
    int col;
    std::vector<double> B;  // d x d row-major
  };
  struct SatPlan {
    std::size_t lag_steps;
    int slot;  // row*cols + col
    double c;
    std::vector<double> w;
  };
  int rows_ = 0, cols_ = 0, d_ = 0;
  bool linear_ = true;
  std::vector<double> offset_;
  std::vector<LinPlan> lin_;
  std::vector<SatPlan> sat_;
  std::size_t max_lag_steps_ = 0;
};

}  // namespace ydl
