#include "ydl/young.hpp"

#include <cmath>
#include <stdexcept>

#include "ydl/holder.hpp"

namespace ydl {

namespace {

struct Neumaier {
  double s = 0.0;
  double c = 0.0;
  void add(double x) {
    const double t = s + x;
    if (std::fabs(s) >= std::fabs(x))
      c += (s - t) + x;
    else
      c += (x - t) + s;
    s = t;
  }
  double get() const { return s + c; }
};

void check_pair(const GridPath& y, const GridPath& x, Window w) {
  if (x.dim < 1 || y.dim < 1 || y.dim % x.dim != 0)
    throw std::invalid_argument("young: integrand dim must be a multiple of driver dim");
  if (std::fabs(y.h - x.h) > 1e-12 * x.h)
    throw std::invalid_argument("young: integrand and driver grids differ");
  if (std::fabs(y.t0 - x.t0) > 1e-9 * std::fmax(1.0, std::fabs(x.t0)))
    throw std::invalid_argument("young: integrand and driver grids are misaligned");
  if (w.hi < w.lo || w.hi >= y.points() || w.hi >= x.points())
    throw std::invalid_argument("young: window out of range");
}

}  // namespace

double k_constant(double beta, double nu) {
  if (!(beta > 0.0 && beta <= 1.0 && nu > 0.0 && nu <= 1.0))
    throw std::invalid_argument("young: exponents must lie in (0, 1]");
  const double theta = beta + nu;
  if (!(theta > 1.0))
    throw std::invalid_argument("young: Young regime requires beta + nu > 1");
  const double denom = -std::expm1((1.0 - theta) * std::log(2.0));  // 1 - 2^{1-theta}
  return 1.0 / denom;
}

std::vector<double> integrate_left(const GridPath& integrand, const GridPath& driver, Window w) {
  check_pair(integrand, driver, w);
  const int m = driver.dim;
  const int d = integrand.dim / m;
  std::vector<Neumaier> acc(static_cast<std::size_t>(d));
  const auto md = static_cast<std::size_t>(m);
  const auto ymd = static_cast<std::size_t>(integrand.dim);
  for (std::size_t k = w.lo; k < w.hi; ++k) {
    const double* yk = integrand.values.data() + k * ymd;
    const double* xk = driver.values.data() + k * md;
    const double* xk1 = driver.values.data() + (k + 1) * md;
    for (int row = 0; row < d; ++row) {
      double term = 0.0;
      const double* yrow = yk + static_cast<std::size_t>(row) * md;
      for (std::size_t col = 0; col < md; ++col) term += yrow[col] * (xk1[col] - xk[col]);
      acc[static_cast<std::size_t>(row)].add(term);
    }
  }
  std::vector<double> out(static_cast<std::size_t>(d));
  for (int row = 0; row < d; ++row) out[static_cast<std::size_t>(row)] = acc[static_cast<std::size_t>(row)].get();
  return out;
}

double integrate_left_scalar(const GridPath& integrand, const GridPath& driver, Window w) {
  if (integrand.dim != 1 || driver.dim != 1)
    throw std::invalid_argument("young: scalar form requires 1-dimensional paths");
  return integrate_left(integrand, driver, w)[0];
}

GridPath integrate_left_prefix(const GridPath& integrand, const GridPath& driver, Window w) {
  check_pair(integrand, driver, w);
  const int m = driver.dim;
  const int d = integrand.dim / m;
  GridPath out;
  out.t0 = integrand.time_at(w.lo);
  out.h = integrand.h;
  out.dim = d;
  const auto dd = static_cast<std::size_t>(d);
  out.values.assign(w.count() * dd, 0.0);
  std::vector<Neumaier> acc(dd);
  const auto md = static_cast<std::size_t>(m);
  const auto ymd = static_cast<std::size_t>(integrand.dim);
  for (std::size_t k = w.lo; k < w.hi; ++k) {
    const double* yk = integrand.values.data() + k * ymd;
    const double* xk = driver.values.data() + k * md;
    const double* xk1 = driver.values.data() + (k + 1) * md;
    for (std::size_t row = 0; row < dd; ++row) {
      double term = 0.0;
      const double* yrow = yk + row * md;
      for (std::size_t col = 0; col < md; ++col) term += yrow[col] * (xk1[col] - xk[col]);
      acc[row].add(term);
      out.values[(k + 1 - w.lo) * dd + row] = acc[row].get();
    }
  }
  return out;
}

YoungDefect young_loeve_check(const GridPath& integrand, const GridPath& driver,
                              Window w, double beta, double nu, double tol) {
  check_pair(integrand, driver, w);
  YoungDefect out;
  const int m = driver.dim;
  const int d = integrand.dim / m;
  const std::vector<double> integral = integrate_left(integrand, driver, w);
  const auto md = static_cast<std::size_t>(m);
  const double* ys = integrand.values.data() + w.lo * static_cast<std::size_t>(integrand.dim);
  const double* xs = driver.values.data() + w.lo * md;
  const double* xt = driver.values.data() + w.hi * md;
  double lhs_sq = 0.0;
  for (int row = 0; row < d; ++row) {
    double germ = 0.0;
    const double* yrow = ys + static_cast<std::size_t>(row) * md;
    for (std::size_t col = 0; col < md; ++col) germ += yrow[col] * (xt[col] - xs[col]);
    const double diff = integral[static_cast<std::size_t>(row)] - germ;
    lhs_sq += diff * diff;
  }
  out.lhs = std::sqrt(lhs_sq);
  out.semi_x = holder_semi_value(driver, w, nu);
  out.semi_y = holder_semi_value(integrand, w, beta);
  const double span = w.span(driver);
  out.rhs = k_constant(beta, nu) * std::pow(span, beta + nu) * out.semi_x * out.semi_y;
  out.pass = out.lhs <= out.rhs * (1.0 + tol);
  return out;
}

}  // namespace ydl
