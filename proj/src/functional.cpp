#include "ydl/functional.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace ydl {

namespace {

const PointDelayLinear* as_linear(const FunctionalDescriptor& f) {
  return std::get_if<PointDelayLinear>(&f);
}
const SaturatingPoint* as_sat(const FunctionalDescriptor& f) {
  return std::get_if<SaturatingPoint>(&f);
}

void check_linear_shape(const PointDelayLinear& p) {
  const int d = static_cast<int>(p.offset.rows());
  const int m = static_cast<int>(p.offset.cols());
  if (d < 1 || m < 1) throw std::invalid_argument("functional offset must be nonempty");
  if (static_cast<int>(p.columns.size()) != m)
    throw std::invalid_argument("functional column count mismatch with offset");
  for (const auto& col : p.columns)
    for (const auto& term : col) {
      if (term.B.rows() != d || term.B.cols() != d)
        throw std::invalid_argument("lag-term matrix must be d x d");
      if (!(term.lag >= 0.0)) throw std::invalid_argument("lag must be nonnegative");
    }
}

void check_sat_shape(const SaturatingPoint& s) {
  if (s.rows < 1 || s.cols < 1)
    throw std::invalid_argument("saturating functional shape must be positive");
  if (static_cast<int>(s.entries.size()) != s.rows * s.cols)
    throw std::invalid_argument("saturating functional needs rows*cols entries");
  for (const auto& e : s.entries) {
    if (e.w.size() < 1) throw std::invalid_argument("saturating weight vector is empty");
    if (!(e.lag >= 0.0)) throw std::invalid_argument("lag must be nonnegative");
  }
}

}  // namespace

int functional_rows(const FunctionalDescriptor& f) {
  if (const auto* p = as_linear(f)) return static_cast<int>(p->offset.rows());
  return as_sat(f)->rows;
}

int functional_cols(const FunctionalDescriptor& f) {
  if (const auto* p = as_linear(f)) return static_cast<int>(p->offset.cols());
  return as_sat(f)->cols;
}

double functional_lipschitz(const FunctionalDescriptor& f) {
  if (const auto* p = as_linear(f)) {
    check_linear_shape(*p);
    double acc = 0.0;
    for (const auto& col : p->columns) {
      double s = 0.0;
      for (const auto& term : col) s += term.B.operatorNorm();
      acc += s * s;
    }
    return std::sqrt(acc);
  }
  const auto* s = as_sat(f);
  check_sat_shape(*s);
  double acc = 0.0;
  for (const auto& e : s->entries) {
    const double t = e.c * e.w.norm();
    acc += t * t;
  }
  return std::sqrt(acc);
}

Eigen::MatrixXd functional_value_at_zero(const FunctionalDescriptor& f) {
  if (const auto* p = as_linear(f)) {
    check_linear_shape(*p);
    return p->offset;
  }
  const auto* s = as_sat(f);
  check_sat_shape(*s);
  return Eigen::MatrixXd::Zero(s->rows, s->cols);
}

double functional_sup_bound(const FunctionalDescriptor& f) {
  if (const auto* p = as_linear(f)) {
    check_linear_shape(*p);
    for (const auto& col : p->columns)
      for (const auto& term : col)
        if (term.B.cwiseAbs().maxCoeff() > 0.0)
          return std::numeric_limits<double>::infinity();
    return p->offset.norm();
  }
  const auto* s = as_sat(f);
  check_sat_shape(*s);
  double acc = 0.0;
  for (const auto& e : s->entries) acc += e.c * e.c;
  return std::sqrt(acc);
}

bool functional_is_zero(const FunctionalDescriptor& f) {
  if (const auto* p = as_linear(f)) {
    if (p->offset.cwiseAbs().maxCoeff() > 0.0) return false;
    for (const auto& col : p->columns)
      for (const auto& term : col)
        if (term.B.cwiseAbs().maxCoeff() > 0.0) return false;
    return true;
  }
  const auto* s = as_sat(f);
  for (const auto& e : s->entries)
    if (e.c != 0.0 && e.w.cwiseAbs().maxCoeff() > 0.0) return false;
  return true;
}

bool functional_is_linear_homogeneous(const FunctionalDescriptor& f) {
  const auto* p = as_linear(f);
  if (!p) return false;
  return p->offset.cwiseAbs().maxCoeff() == 0.0;
}

std::vector<double> functional_lags(const FunctionalDescriptor& f) {
  std::vector<double> lags;
  if (const auto* p = as_linear(f)) {
    for (const auto& col : p->columns)
      for (const auto& term : col) lags.push_back(term.lag);
  } else {
    for (const auto& e : as_sat(f)->entries) lags.push_back(e.lag);
  }
  return lags;
}

Eigen::MatrixXd functional_eval(const FunctionalDescriptor& f, const HistorySegment& seg) {
  const double h = seg.path->h;
  const double r = static_cast<double>(seg.steps) * h;
  FunctionalPlan plan(f, h, r, seg.dim());
  Eigen::MatrixXd out(plan.rows(), plan.cols());
  // Row-major scratch, then transpose-copy into the column-major result.
  std::vector<double> buf(static_cast<std::size_t>(plan.rows()) * plan.cols());
  plan.eval(seg.path->values.data(), seg.end_index, buf.data());
  for (int i = 0; i < plan.rows(); ++i)
    for (int j = 0; j < plan.cols(); ++j)
      out(i, j) = buf[static_cast<std::size_t>(i) * plan.cols() + j];
  return out;
}

FunctionalPlan::FunctionalPlan(const FunctionalDescriptor& f, double h, double r,
                               int state_dim)
    : d_(state_dim) {
  if (functional_rows(f) != state_dim)
    throw std::invalid_argument("functional row count must equal the state dimension");
  rows_ = functional_rows(f);
  cols_ = functional_cols(f);
  offset_.assign(static_cast<std::size_t>(rows_) * cols_, 0.0);

  auto lag_to_steps = [&](double lag) -> std::size_t {
    if (lag < 0.0 || lag > r + 1e-9 * std::max(1.0, r))
      throw std::invalid_argument("lag must lie in [0, r]");
    const double q = lag / h;
    const auto steps = static_cast<std::size_t>(std::llround(q));
    if (std::abs(q - static_cast<double>(steps)) > 1e-9 * std::max(1.0, q))
      throw std::invalid_argument("lag must be a multiple of the grid step");
    return steps;
  };

  if (const auto* p = as_linear(f)) {
    check_linear_shape(*p);
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < cols_; ++j)
        offset_[static_cast<std::size_t>(i) * cols_ + j] = p->offset(i, j);
    for (int col = 0; col < cols_; ++col)
      for (const auto& term : p->columns[static_cast<std::size_t>(col)]) {
        LinPlan lp;
        lp.lag_steps = lag_to_steps(term.lag);
        lp.col = col;
        lp.B.resize(static_cast<std::size_t>(d_) * d_);
        for (int i = 0; i < d_; ++i)
          for (int j = 0; j < d_; ++j)
            lp.B[static_cast<std::size_t>(i) * d_ + j] = term.B(i, j);
        max_lag_steps_ = std::max(max_lag_steps_, lp.lag_steps);
        lin_.push_back(std::move(lp));
      }
  } else {
    const auto* s = as_sat(f);
    check_sat_shape(*s);
    linear_ = false;
    for (int i = 0; i < s->rows; ++i)
      for (int j = 0; j < s->cols; ++j) {
        const auto& e = s->entries[static_cast<std::size_t>(i) * s->cols + j];
        if (e.w.size() != d_)
          throw std::invalid_argument("saturating weight length must equal state dim");
        SatPlan sp;
        sp.lag_steps = lag_to_steps(e.lag);
        sp.slot = i * cols_ + j;
        sp.c = e.c;
        sp.w.assign(e.w.data(), e.w.data() + e.w.size());
        max_lag_steps_ = std::max(max_lag_steps_, sp.lag_steps);
        sat_.push_back(std::move(sp));
      }
  }
}

void FunctionalPlan::eval(const double* traj, std::size_t k, double* out) const {
  const std::size_t cells = static_cast<std::size_t>(rows_) * cols_;
  for (std::size_t i = 0; i < cells; ++i) out[i] = offset_[i];
  if (linear_) {
    for (const auto& lp : lin_) {
      const double* y = traj + (k - lp.lag_steps) * static_cast<std::size_t>(d_);
      for (int i = 0; i < d_; ++i) {
        double acc = 0.0;
        const double* row = lp.B.data() + static_cast<std::size_t>(i) * d_;
        for (int j = 0; j < d_; ++j) acc += row[j] * y[j];
        out[static_cast<std::size_t>(i) * cols_ + lp.col] += acc;
      }
    }
  } else {
    for (const auto& sp : sat_) {
      const double* y = traj + (k - sp.lag_steps) * static_cast<std::size_t>(d_);
      double acc = 0.0;
      for (int j = 0; j < d_; ++j) acc += sp.w[static_cast<std::size_t>(j)] * y[j];
      out[sp.slot] = sp.c * std::tanh(acc);
    }
  }
}

}  // namespace ydl
