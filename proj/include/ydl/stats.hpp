#pragma once

#include <cstddef>
#include <vector>

namespace ydl {

/// Sample mean.
double mean(const std::vector<double>& v);

/// Unbiased sample standard deviation (0 for fewer than two samples).
double sample_sd(const std::vector<double>& v);

/// Mean with a batch-means confidence half-width: the series is split into
/// `batches` contiguous batches, the half-width is z * sd(batch means)/sqrt(B).
/// Appropriate for both i.i.d. ensembles and correlated window sequences.
struct MeanCI {
  double value = 0.0;
  double ci_half = 0.0;
  std::size_t n = 0;
  std::size_t batches = 0;
};
MeanCI batch_means(const std::vector<double>& v, std::size_t batches = 20, double z = 1.96);

/// Ordinary least-squares slope of y against x (0 when degenerate).
double ols_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Two-sample Kolmogorov–Smirnov statistic sup |F_a - F_b|.
double ks_statistic(std::vector<double> a, std::vector<double> b);

/// p-quantile (linear interpolation between order statistics), p in [0, 1].
double quantile(std::vector<double> v, double p);

}  // namespace ydl
