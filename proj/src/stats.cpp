#include "ydl/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ydl {

double mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_sd(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

MeanCI batch_means(const std::vector<double>& v, std::size_t batches, double z) {
  MeanCI out;
  out.n = v.size();
  if (v.empty()) return out;
  out.value = mean(v);
  if (batches < 2) batches = 2;
  if (batches > v.size()) batches = v.size();
  out.batches = batches;
  if (batches < 2) return out;
  std::vector<double> bm(batches, 0.0);
  const std::size_t base = v.size() / batches;
  const std::size_t rem = v.size() % batches;
  std::size_t pos = 0;
  for (std::size_t b = 0; b < batches; ++b) {
    const std::size_t len = base + (b < rem ? 1 : 0);
    double s = 0.0;
    for (std::size_t k = 0; k < len; ++k) s += v[pos + k];
    bm[b] = s / static_cast<double>(len);
    pos += len;
  }
  out.ci_half = z * sample_sd(bm) / std::sqrt(static_cast<double>(batches));
  return out;
}

double ols_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("ols_slope: length mismatch");
  const std::size_t n = x.size();
  if (n < 2) return 0.0;
  const double mx = mean(x), my = mean(y);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    sxy += (x[k] - mx) * (y[k] - my);
  }
  if (sxx == 0.0) return 0.0;
  return sxy / sxx;
}

double ks_statistic(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_statistic: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

double quantile(std::vector<double> v, double p) {
  if (v.empty()) throw std::invalid_argument("quantile: empty sample");
  std::sort(v.begin(), v.end());
  if (p <= 0.0) return v.front();
  if (p >= 1.0) return v.back();
  const double pos = p * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  const double frac = pos - static_cast<double>(lo);
  if (lo + 1 >= v.size()) return v.back();
  return v[lo] + frac * (v[lo + 1] - v[lo]);
}

}  // namespace ydl
