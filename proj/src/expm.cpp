#include "ydl/expm.hpp"

#include <cmath>
#include <stdexcept>

#include <unsupported/Eigen/MatrixFunctions>

namespace ydl {

Eigen::MatrixXd expm(const Eigen::MatrixXd& A) {
  if (A.rows() != A.cols() || A.rows() < 1)
    throw std::invalid_argument("expm needs a nonempty square matrix");
  return A.exp();
}

double operator_norm(const Eigen::MatrixXd& M) {
  if (M.size() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
  return svd.singularValues()(0);
}

double spectral_abscissa(const Eigen::MatrixXd& A) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(A, /*computeEigenvectors=*/false);
  return es.eigenvalues().real().maxCoeff();
}

namespace {

// e^{-g t} * sum_{k<d} (c t)^k / k!  — upper bound for ||e^{At}|| e^{lambda t}
// beyond any grid point, from the complex Schur splitting A = Q (D + N) Q^*.
double tail_bound(double g, double c, int d, double t) {
  double sum = 1.0, term = 1.0;
  for (int k = 1; k < d; ++k) {
    term *= c * t / static_cast<double>(k);
    sum += term;
  }
  return std::exp(-g * t) * sum;
}

// True once the tail bound is nonincreasing for every t' >= t. Writing
// S(x) = sum_{k<d} x^k/k!, x = c t, the derivative condition reduces to
// (c - g) S(x) <= c x^{d-1}/(d-1)!, and the ratio S(x) (d-1)! / x^{d-1}
// is decreasing in x, so the condition is monotone-stable.
bool tail_decreasing_forever(double g, double c, int d, double t) {
  if (c <= g) return true;
  const double x = c * t;
  if (x <= 0.0) return false;
  double ratio = 0.0, term = 1.0;  // term = (d-1)! / ((d-1-j)! x^j), j from 0
  for (int j = 0; j < d; ++j) {
    ratio += term;
    term *= static_cast<double>(d - 1 - j) / x;
  }
  return ratio <= c / (c - g);
}

}  // namespace

DecayConstants decay_constants(const Eigen::MatrixXd& A, double margin,
                               double horizon_factor) {
  if (A.rows() != A.cols() || A.rows() < 1)
    throw std::invalid_argument("decay_constants needs a square matrix");
  if (!(margin > 0.0 && margin <= 1.0))
    throw std::invalid_argument("margin must lie in (0, 1]");
  if (!(horizon_factor > 0.0))
    throw std::invalid_argument("horizon_factor must be positive");

  const int d = static_cast<int>(A.rows());
  const double alpha = spectral_abscissa(A);
  if (!(alpha < 0.0))
    throw std::invalid_argument(
        "decay_constants requires a Hurwitz matrix (spectral abscissa < 0)");
  const double lambda = margin * (-alpha);
  const double g = (1.0 - margin) * (-alpha);  // gap used by the tail bound

  // Complex Schur split A = Q (D + N) Q^*: D normal, N strictly upper, N^d = 0.
  Eigen::ComplexSchur<Eigen::MatrixXd> schur(A);
  Eigen::MatrixXcd T = schur.matrixT();
  T.diagonal().setZero();
  const double c = T.norm();
  const bool near_normal = c <= 1e-10 * (1.0 + A.norm());

  if (margin == 1.0 && !near_normal)
    throw std::invalid_argument(
        "margin = 1 leaves no certification gap; it requires a normal matrix");

  if (near_normal && margin == 1.0) {
    // ||e^{At}|| = e^{alpha t} exactly, so the product is identically 1.
    return {1.0, lambda};
  }

  const double scale = std::max({operator_norm(A), lambda, 1.0});
  const double dt = 0.02 / scale;
  const Eigen::MatrixXd step = expm(A * dt);

  double sup = 1.0;  // t = 0
  Eigen::MatrixXd P = Eigen::MatrixXd::Identity(d, d);
  const double t_min = horizon_factor / lambda;
  const std::size_t max_steps = 20000000;
  for (std::size_t k = 1; k <= max_steps; ++k) {
    if (k % 512 == 0)
      P = expm(A * (dt * static_cast<double>(k)));  // kill multiplicative drift
    else
      P = step * P;
    const double t = dt * static_cast<double>(k);
    const double s = operator_norm(P) * std::exp(lambda * t);
    if (s > sup) sup = s;
    if (t >= t_min && tail_decreasing_forever(g, c, d, t) &&
        tail_bound(g, c, d, t) <= sup)
      return {sup, lambda};
  }
  throw std::runtime_error(
      "decay_constants: tail certificate did not close; the margin gap is too small");
}

}  // namespace ydl
