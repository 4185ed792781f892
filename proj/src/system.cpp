#include "ydl/system.hpp"

#include <stdexcept>

namespace ydl {

void SystemSpec::validate() const {
  if (A.rows() < 1 || A.rows() != A.cols())
    throw std::invalid_argument("system.A must be a nonempty square matrix");
  if (functional_rows(drift) != dim())
    throw std::invalid_argument("system.drift rows must equal the state dimension");
  if (functional_cols(drift) != 1)
    throw std::invalid_argument("system.drift must have a single column");
  if (functional_rows(diffusion) != dim())
    throw std::invalid_argument("system.diffusion rows must equal the state dimension");
  if (functional_cols(diffusion) < 1)
    throw std::invalid_argument("system.diffusion needs at least one column");
  if (!(r > 0.0)) throw std::invalid_argument("system.r must be positive");
  if (!(nu > 0.0 && nu < 1.0)) throw std::invalid_argument("system.nu must lie in (0,1)");
  if (!(beta > 0.0 && beta < nu))
    throw std::invalid_argument("system.beta must lie in (0, nu)");
  if (!(beta0 > 1.0 - nu && beta0 < beta))
    throw std::invalid_argument("system.beta0 must lie in (1-nu, beta)");
  if (!(beta + nu > 1.0))
    throw std::invalid_argument("system exponents must satisfy beta + nu > 1");
  if (!(margin > 0.0 && margin <= 1.0))
    throw std::invalid_argument("system.margin must lie in (0, 1]");
  for (double lag : functional_lags(drift))
    if (!(lag >= 0.0 && lag <= r))
      throw std::invalid_argument("system.drift lag must lie in [0, r]");
  for (double lag : functional_lags(diffusion))
    if (!(lag >= 0.0 && lag <= r))
      throw std::invalid_argument("system.diffusion lag must lie in [0, r]");
}

SystemSpec desk_system() {
  SystemSpec s;
  s.A = Eigen::MatrixXd::Constant(1, 1, -1.0);
  PointDelayLinear f;
  f.offset = Eigen::MatrixXd::Zero(1, 1);
  f.columns.resize(1);
  f.columns[0].push_back({1.0, Eigen::MatrixXd::Constant(1, 1, 0.1)});
  s.drift = f;
  PointDelayLinear g;
  g.offset = Eigen::MatrixXd::Constant(1, 1, 0.05);
  g.columns.resize(1);
  g.columns[0].push_back({1.0, Eigen::MatrixXd::Constant(1, 1, 0.05)});
  s.diffusion = g;
  s.r = 1.0;
  s.beta0 = 0.35;
  s.beta = 0.55;
  s.nu = 0.7;
  s.margin = 1.0;
  return s;
}

}  // namespace ydl
