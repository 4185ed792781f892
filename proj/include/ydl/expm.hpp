#pragma once

#include <Eigen/Dense>

namespace ydl {

/// Matrix exponential (Pade scaling-and-squaring).
Eigen::MatrixXd expm(const Eigen::MatrixXd& A);

/// Spectral (2-)norm.
double operator_norm(const Eigen::MatrixXd& M);

/// Largest real part among the eigenvalues.
double spectral_abscissa(const Eigen::MatrixXd& A);

struct DecayConstants {
  double c_a = 1.0;    ///< prefactor
  double lambda = 0.0; ///< decay rate, lambda = margin * |spectral abscissa|
};

/// Constants with ||e^{At}|| <= c_a * e^{-lambda t} for all t >= 0 on a dense
/// grid. The grid is extended until a triangular-splitting tail bound (using
/// the (1-margin) gap) certifies that no later maximum exists. Requires A
/// Hurwitz and margin in (0, 1]; margin = 1 additionally requires A normal
/// (otherwise there is no gap left for the tail certificate).
/// horizon_factor sets the initial probe horizon in units of 1/lambda.
DecayConstants decay_constants(const Eigen::MatrixXd& A, double margin,
                               double horizon_factor = 4.0);

}  // namespace ydl
