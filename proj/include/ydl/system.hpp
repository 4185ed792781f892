#pragma once

#include <Eigen/Dense>

#include "ydl/functional.hpp"

namespace ydl {

/// The delay system  dy = [A y + f(y_t)] dt + g(y_t) dx(t),  y_0 = eta,
/// together with the exponent book-keeping used by the estimates:
///   1 - nu < beta0 < beta < nu   (and nu below the driver regularity).
struct SystemSpec {
  Eigen::MatrixXd A;               ///< d x d, must be Hurwitz for the decay constants
  FunctionalDescriptor drift;      ///< d x 1
  FunctionalDescriptor diffusion;  ///< d x m
  double r = 1.0;                  ///< delay length
  double beta0 = 0.35;             ///< first-interval exponent
  double beta = 0.55;              ///< solution exponent
  double nu = 0.7;                 ///< driver exponent (below its Hurst index)
  double margin = 0.95;            ///< fraction of the spectral gap kept as decay rate

  int dim() const { return static_cast<int>(A.rows()); }
  int noise_dim() const { return functional_cols(diffusion); }

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

/// Desk default: scalar system A = -1, f = 0.1 * y(t - r), g = 0.05 * y(t - r) + 0.05,
/// r = 1, beta0 = 0.35, beta = 0.55, nu = 0.7, margin = 1 (A is normal).
SystemSpec desk_system();

}  // namespace ydl
