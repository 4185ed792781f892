#include "ydl/solver.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>
#include <variant>

#include "ydl/expm.hpp"
#include "ydl/holder.hpp"

namespace ydl {

namespace {

struct Layout {
  int d = 1, m = 1;
  double h = 0.0;
  std::size_t r_steps = 0, n_steps = 0;
};

Layout check_alignment(const SystemSpec& spec, const GridPath& eta,
                       const TwoSidedPath* x, double T) {
  spec.validate();
  Layout L;
  L.d = spec.dim();
  L.m = spec.noise_dim();
  L.h = eta.h;
  if (eta.dim != L.d)
    throw std::invalid_argument("solver: eta dimension must match the system");
  if (!(T > 0.0)) throw std::invalid_argument("solver: horizon must be positive");
  L.r_steps = steps_of(spec.r, L.h);
  L.n_steps = steps_of(T, L.h);
  if (eta.points() != L.r_steps + 1)
    throw std::invalid_argument("solver: eta must cover exactly [-r, 0]");
  if (std::fabs(eta.t0 + spec.r) > 1e-9 * std::fmax(1.0, spec.r))
    throw std::invalid_argument("solver: eta must start at -r");
  if (x) {
    if (x->dim() != L.m)
      throw std::invalid_argument("solver: driver dimension must match g's columns");
    if (std::fabs(x->h() - L.h) > 1e-12 * L.h)
      throw std::invalid_argument("solver: driver and eta grids differ");
    const std::size_t start = x->raw_index_at(0.0);
    if (start + L.n_steps > x->hi())
      throw std::invalid_argument("solver: driver does not cover [0, T]");
  }
  return L;
}

GridPath seeded_output(const SystemSpec& spec, const GridPath& eta, const Layout& L) {
  GridPath y;
  y.t0 = -spec.r;
  y.h = L.h;
  y.dim = L.d;
  y.values.assign((L.r_steps + L.n_steps + 1) * static_cast<std::size_t>(L.d), 0.0);
  std::memcpy(y.values.data(), eta.values.data(),
              eta.values.size() * sizeof(double));
  return y;
}

bool row_finite(const double* p, int d) {
  for (int i = 0; i < d; ++i)
    if (!std::isfinite(p[i])) return false;
  return true;
}

enum class Scheme { euler, voc };

SolveOutput solve_common(const SystemSpec& spec, const GridPath& eta,
                         const TwoSidedPath& x, double T, Scheme scheme,
                         bool with_diagnostics) {
  const Layout L = check_alignment(spec, eta, &x, T);
  const int d = L.d, m = L.m;

  SolveOutput out;
  out.y = seeded_output(spec, eta, L);
  out.r_steps = L.r_steps;

  FunctionalPlan fplan(spec.drift, L.h, spec.r, d);
  FunctionalPlan gplan(spec.diffusion, L.h, spec.r, d);

  std::vector<double> a(static_cast<std::size_t>(d) * d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a[static_cast<std::size_t>(i) * d + j] = spec.A(i, j);

  std::vector<double> phi;
  if (scheme == Scheme::voc) {
    const Eigen::MatrixXd P = expm(spec.A * L.h);  // one exponential per step size
    phi.resize(static_cast<std::size_t>(d) * d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) phi[static_cast<std::size_t>(i) * d + j] = P(i, j);
  }

  const double* xraw = x.raw().values.data();
  const std::size_t xs = x.raw_index_at(0.0);

  double* yv = out.y.values.data();
  std::vector<double> fbuf(static_cast<std::size_t>(d));
  std::vector<double> gbuf(static_cast<std::size_t>(d) * m);
  std::vector<double> dx(static_cast<std::size_t>(m));
  std::vector<double> tmp(static_cast<std::size_t>(d));

  for (std::size_t k = 0; k < L.n_steps; ++k) {
    const std::size_t gk = L.r_steps + k;
    const double* yk = yv + gk * static_cast<std::size_t>(d);
    double* yn = yv + (gk + 1) * static_cast<std::size_t>(d);
    fplan.eval(yv, gk, fbuf.data());
    gplan.eval(yv, gk, gbuf.data());
    for (int c = 0; c < m; ++c)
      dx[static_cast<std::size_t>(c)] = xraw[(xs + k + 1) * m + c] - xraw[(xs + k) * m + c];

    if (scheme == Scheme::euler) {
      for (int i = 0; i < d; ++i) {
        double drift = fbuf[static_cast<std::size_t>(i)];
        for (int j = 0; j < d; ++j) drift += a[static_cast<std::size_t>(i) * d + j] * yk[j];
        double noise = 0.0;
        for (int c = 0; c < m; ++c)
          noise += gbuf[static_cast<std::size_t>(i) * m + c] * dx[static_cast<std::size_t>(c)];
        yn[i] = yk[i] + L.h * drift + noise;
      }
    } else {
      for (int i = 0; i < d; ++i) {
        double noise = 0.0;
        for (int c = 0; c < m; ++c)
          noise += gbuf[static_cast<std::size_t>(i) * m + c] * dx[static_cast<std::size_t>(c)];
        tmp[static_cast<std::size_t>(i)] =
            yk[i] + L.h * fbuf[static_cast<std::size_t>(i)] + noise;
      }
      for (int i = 0; i < d; ++i) {
        double acc = 0.0;
        for (int j = 0; j < d; ++j)
          acc += phi[static_cast<std::size_t>(i) * d + j] * tmp[static_cast<std::size_t>(j)];
        yn[i] = acc;
      }
    }

    if (!row_finite(yn, d)) {
      out.ok = false;
      out.overflow_index = gk + 1;
      // Leave the remaining samples at zero; diagnostics cover what completed.
      break;
    }
  }

  if (with_diagnostics) {
    const std::size_t good_points = out.ok ? out.y.points() : out.overflow_index;
    const std::size_t full = good_points > L.r_steps
                                 ? (good_points - 1 - L.r_steps) / L.r_steps
                                 : 0;
    GridPath head = out.y;  // cheap enough at desk scale; truncated on overflow
    head.values.resize((L.r_steps * (full + 1) + 1) * static_cast<std::size_t>(d));
    out.intervals = interval_norms(head, 0.0, spec.r, spec.beta);
  }
  return out;
}

// Generic descriptor evaluation against an arbitrary lag getter (the
// method-of-steps stages need Hermite values between nodes, so the fast
// node-indexed plan does not apply).
template <typename Getter>
Eigen::VectorXd eval_drift_with(const FunctionalDescriptor& f, int d, Getter&& get) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(d);
  if (const auto* p = std::get_if<PointDelayLinear>(&f)) {
    out = p->offset.col(0);
    for (const auto& term : p->columns[0]) out += term.B * get(term.lag);
  } else {
    const auto* s = std::get_if<SaturatingPoint>(&f);
    for (int i = 0; i < s->rows; ++i) {
      const auto& e = s->entries[static_cast<std::size_t>(i)];
      out(i) = e.c * std::tanh(e.w.dot(get(e.lag)));
    }
  }
  return out;
}

}  // namespace

TwoSidedPath wrap_driver(GridPath p) {
  const std::size_t origin = index_of(p, 0.0);
  const std::size_t hi = p.points() - 1;
  auto shared = std::make_shared<const GridPath>(std::move(p));
  return TwoSidedPath(shared, origin, 0, hi);
}

SolveOutput solve_euler(const SystemSpec& spec, const GridPath& eta,
                        const TwoSidedPath& x, double T, bool with_diagnostics) {
  return solve_common(spec, eta, x, T, Scheme::euler, with_diagnostics);
}

SolveOutput solve_voc(const SystemSpec& spec, const GridPath& eta,
                      const TwoSidedPath& x, double T, bool with_diagnostics) {
  return solve_common(spec, eta, x, T, Scheme::voc, with_diagnostics);
}

SolveOutput method_of_steps(const SystemSpec& spec, const GridPath& eta, double T,
                            bool with_diagnostics) {
  if (!functional_is_zero(spec.diffusion))
    throw std::invalid_argument("method_of_steps requires identically zero diffusion");
  const Layout L = check_alignment(spec, eta, nullptr, T);
  const int d = L.d;
  const double h = L.h;

  // Validate drift lags and pin them to grid steps.
  FunctionalPlan drift_steps(spec.drift, h, spec.r, d);
  (void)drift_steps;
  auto lag_steps = [&](double lag) {
    return static_cast<std::size_t>(std::llround(lag / h));
  };

  SolveOutput out;
  out.y = seeded_output(spec, eta, L);
  out.r_steps = L.r_steps;
  double* yv = out.y.values.data();
  const std::size_t total = L.r_steps + L.n_steps;

  auto node = [&](std::size_t j) {
    return Eigen::Map<const Eigen::VectorXd>(yv + j * static_cast<std::size_t>(d), d);
  };

  // Stored derivatives: right-hand sides once past 0, finite differences of eta
  // before it (fourth order when the segment has at least five samples). The
  // derivative jumps at time 0 (eta need not satisfy the equation), so the last
  // history interval [-h, 0] keeps the left-sided value separately.
  std::vector<Eigen::VectorXd> deriv(total + 1, Eigen::VectorXd::Zero(d));
  Eigen::VectorXd deriv0_left = Eigen::VectorXd::Zero(d);
  {
    const std::size_t n = L.r_steps;  // eta samples: 0..n
    auto fd = [&](std::size_t k) -> Eigen::VectorXd {
      if (n + 1 >= 5) {
        if (k >= 2 && k + 2 <= n)
          return (node(k - 2) - 8.0 * node(k - 1) + 8.0 * node(k + 1) - node(k + 2)) /
                 (12.0 * h);
        if (k == 0)
          return (-25.0 * node(0) + 48.0 * node(1) - 36.0 * node(2) +
                  16.0 * node(3) - 3.0 * node(4)) /
                 (12.0 * h);
        if (k == 1)
          return (-3.0 * node(0) - 10.0 * node(1) + 18.0 * node(2) -
                  6.0 * node(3) + node(4)) /
                 (12.0 * h);
        // k in {n-1, n}: one-sided backward, fourth order
        if (k == n)
          return (25.0 * node(n) - 48.0 * node(n - 1) + 36.0 * node(n - 2) -
                  16.0 * node(n - 3) + 3.0 * node(n - 4)) /
                 (12.0 * h);
        return (3.0 * node(n) + 10.0 * node(n - 1) - 18.0 * node(n - 2) +
                6.0 * node(n - 3) - node(n - 4)) /
               (12.0 * h);
      }
      if (k == 0) return (node(1) - node(0)) / h;
      if (k == n) return (node(n) - node(n - 1)) / h;
      return (node(k + 1) - node(k - 1)) / (2.0 * h);
    };
    for (std::size_t k = 0; k < n; ++k) deriv[k] = fd(k);
    deriv0_left = fd(n);
    // deriv[n] (time 0) is replaced by the true right-hand side below.
  }

  // Delayed value at j + theta - lag, theta in {0, 1/2, 1} step units; the
  // current stage state covers lag 0.
  enum class Phase { node0, half, node1 };
  auto delayed = [&](std::size_t j, Phase ph, const Eigen::VectorXd& state,
                     double lag) -> Eigen::VectorXd {
    const std::size_t ls = lag_steps(lag);
    if (ls == 0) return state;
    switch (ph) {
      case Phase::node0:
        return node(j - ls);
      case Phase::node1:
        return node(j + 1 - ls);
      case Phase::half: {
        const std::size_t a = j - ls;
        const Eigen::VectorXd& right =
            (a + 1 == L.r_steps) ? deriv0_left : deriv[a + 1];
        return 0.5 * (node(a) + node(a + 1)) + (h / 8.0) * (deriv[a] - right);
      }
    }
    return state;  // unreachable
  };

  auto rhs = [&](std::size_t j, Phase ph, const Eigen::VectorXd& state) {
    Eigen::VectorXd v = spec.A * state;
    v += eval_drift_with(spec.drift, d,
                         [&](double lag) { return delayed(j, ph, state, lag); });
    return v;
  };

  for (std::size_t j = L.r_steps; j < total; ++j) {
    const Eigen::VectorXd yj = node(j);
    const Eigen::VectorXd s1 = rhs(j, Phase::node0, yj);
    deriv[j] = s1;
    const Eigen::VectorXd s2 = rhs(j, Phase::half, yj + 0.5 * h * s1);
    const Eigen::VectorXd s3 = rhs(j, Phase::half, yj + 0.5 * h * s2);
    const Eigen::VectorXd s4 = rhs(j, Phase::node1, yj + h * s3);
    const Eigen::VectorXd next = yj + (h / 6.0) * (s1 + 2.0 * s2 + 2.0 * s3 + s4);
    for (int i = 0; i < d; ++i) yv[(j + 1) * static_cast<std::size_t>(d) + i] = next(i);
    if (!row_finite(yv + (j + 1) * static_cast<std::size_t>(d), d)) {
      out.ok = false;
      out.overflow_index = j + 1;
      break;
    }
  }
  if (out.ok && total > L.r_steps)
    deriv[total] = rhs(total, Phase::node0, node(total));

  if (with_diagnostics && out.ok)
    out.intervals = interval_norms(out.y, 0.0, spec.r, spec.beta);
  return out;
}

MuHDecomposition decompose_mu_h(const SystemSpec& spec, const GridPath& eta,
                                const TwoSidedPath& x, double T, int k0) {
  if (k0 < 2) throw std::invalid_argument("decompose_mu_h: k0 must be at least 2");
  MuHDecomposition dec;
  dec.k0 = k0;
  dec.y = solve_euler(spec, eta, x, T, /*with_diagnostics=*/true);
  const std::size_t r_steps = dec.y.r_steps;
  const std::size_t n_steps = dec.y.y.points() - 1 - r_steps;
  if (n_steps < r_steps)
    throw std::invalid_argument("decompose_mu_h: horizon must cover at least one delay interval");
  if (!dec.y.ok) {
    dec.ok = false;
    return dec;
  }
  const int d = spec.dim();
  const double h = dec.y.y.h;

  dec.mu.t0 = 0.0;
  dec.mu.h = h;
  dec.mu.dim = d;
  dec.mu.values.assign((n_steps + 1) * static_cast<std::size_t>(d), 0.0);
  // mu == y on [0, r] ...
  std::memcpy(dec.mu.values.data(),
              dec.y.y.values.data() + r_steps * static_cast<std::size_t>(d),
              (r_steps + 1) * static_cast<std::size_t>(d) * sizeof(double));
  // ... then the same Euler step with the diffusion dropped, so with g == 0 or
  // a frozen driver the subtraction cancels bitwise.
  FunctionalPlan fplan(spec.drift, h, spec.r, d);
  std::vector<double> a(static_cast<std::size_t>(d) * d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a[static_cast<std::size_t>(i) * d + j] = spec.A(i, j);
  std::vector<double> fbuf(static_cast<std::size_t>(d));
  double* mv = dec.mu.values.data();
  for (std::size_t k = r_steps; k < n_steps; ++k) {
    const double* mk = mv + k * static_cast<std::size_t>(d);
    double* mn = mv + (k + 1) * static_cast<std::size_t>(d);
    fplan.eval(mv, k, fbuf.data());
    for (int i = 0; i < d; ++i) {
      double drift = fbuf[static_cast<std::size_t>(i)];
      for (int j = 0; j < d; ++j) drift += a[static_cast<std::size_t>(i) * d + j] * mk[j];
      mn[i] = mk[i] + h * drift;
    }
    if (!row_finite(mn, d)) {
      dec.ok = false;
      return dec;
    }
  }

  dec.h_path.t0 = 0.0;
  dec.h_path.h = h;
  dec.h_path.dim = d;
  dec.h_path.values.resize(dec.mu.values.size());
  const double* ys = dec.y.y.values.data() + r_steps * static_cast<std::size_t>(d);
  for (std::size_t i = 0; i < dec.h_path.values.size(); ++i)
    dec.h_path.values[i] = ys[i] - dec.mu.values[i];

  dec.mu_intervals = interval_norms(dec.mu, 0.0, spec.r, spec.beta);
  dec.h_intervals = interval_norms(dec.h_path, 0.0, spec.r, spec.beta);
  return dec;
}

GridPath functional_along(const FunctionalDescriptor& f, const GridPath& y,
                          double r, double a, double b) {
  const std::size_t ia = index_of(y, a);
  const std::size_t ib = index_of(y, b);
  if (ib < ia) throw std::invalid_argument("functional_along: empty time range");
  const std::size_t r_steps = steps_of(r, y.h);
  if (ia < r_steps)
    throw std::invalid_argument("functional_along: history must reach back to a - r");
  FunctionalPlan plan(f, y.h, r, y.dim);
  GridPath out;
  out.t0 = y.time_at(ia);
  out.h = y.h;
  out.dim = plan.rows() * plan.cols();
  out.values.resize((ib - ia + 1) * static_cast<std::size_t>(out.dim));
  for (std::size_t k = ia; k <= ib; ++k)
    plan.eval(y.values.data(), k,
              out.values.data() + (k - ia) * static_cast<std::size_t>(out.dim));
  return out;
}

std::vector<IntervalDiag> interval_norms(const GridPath& y, double start_time,
                                         double len, double beta) {
  std::vector<IntervalDiag> out;
  const std::size_t len_steps = steps_of(len, y.h);
  if (len_steps == 0) throw std::invalid_argument("interval_norms: empty interval");
  const std::size_t start = index_of(y, start_time);
  for (int n = 0;; ++n) {
    const std::size_t lo = start + static_cast<std::size_t>(n) * len_steps;
    const std::size_t hi = lo + len_steps;
    if (hi >= y.points()) break;
    const WindowNorms w = window_norms(y, Window{lo, hi}, beta);
    out.push_back({n, w.sup, w.semi, w.weighted});
  }
  return out;
}

}  // namespace ydl
