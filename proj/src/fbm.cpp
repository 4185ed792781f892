#include "ydl/fbm.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <cstring>
#include <map>
#include <mutex>
#include <random>
#include <stdexcept>

#include "ydl/holder.hpp"

namespace ydl {

namespace {

// FFTW's planner is not thread-safe; plan creation/destruction is serialized.
// FFTW_ESTIMATE keeps plan selection (and hence rounding behaviour) a pure
// function of the transform size, so draws are reproducible.
std::mutex& fftw_mutex() {
  static std::mutex m;
  return m;
}

void fft_forward(std::vector<std::complex<double>>& data) {
  const auto n = static_cast<int>(data.size());
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(fftw_mutex());
    plan = fftw_plan_dft_1d(n, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(fftw_mutex());
    fftw_destroy_plan(plan);
  }
}

std::uint64_t splitmix_round(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Gaussian stream: Box–Muller over explicit 53-bit uniforms. Hand-rolled so the
// draw sequence is pinned by this code, not by the standard library's
// unspecified normal_distribution algorithm.
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : rng_(seed) {}
  double next() {
    if (have_) {
      have_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform01();  // in (0, 1]
    const double u2 = uniform01();
    const double rad = std::sqrt(-2.0 * std::log(u1));
    const double ang = 2.0 * M_PI * u2;
    spare_ = rad * std::sin(ang);
    have_ = true;
    return rad * std::cos(ang);
  }

 private:
  double uniform01() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
  std::mt19937_64 rng_;
  double spare_ = 0.0;
  bool have_ = false;
};

std::size_t next_pow2(std::size_t n) {
  std::size_t m = 1;
  while (m < n) m <<= 1;
  return m;
}

// Circulant eigenvalues for unit-step fGn, cached per (hurst, M); the step-h
// autocovariance is h^{2H} times the unit one, so the cache is seed- and
// step-independent.
const std::vector<double>& circulant_eigs(double hurst, std::size_t M) {
  static std::mutex mu;
  static std::map<std::pair<std::uint64_t, std::size_t>, std::vector<double>> cache;
  std::uint64_t hbits;
  std::memcpy(&hbits, &hurst, sizeof hbits);
  const auto key = std::make_pair(hbits, M);
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;

  const std::size_t half = M / 2;
  std::vector<double> gamma = fbm_detail::fgn_autocov(hurst, 1.0, half + 1);
  std::vector<std::complex<double>> c(M);
  for (std::size_t j = 0; j <= half; ++j) c[j] = gamma[j];
  for (std::size_t j = 1; j < half; ++j) c[M - j] = gamma[j];
  fft_forward(c);
  std::vector<double> eig(M);
  double maxe = 0.0, mine = 0.0;
  for (std::size_t j = 0; j < M; ++j) {
    eig[j] = c[j].real();
    maxe = std::fmax(maxe, eig[j]);
    mine = std::fmin(mine, eig[j]);
  }
  if (mine < -1e-8 * maxe)
    throw std::runtime_error(
        "fbm: circulant embedding is not nonnegative definite; a larger "
        "embedding length is required (cannot silently truncate)");
  for (double& e : eig)
    if (e < 0.0) e = 0.0;
  return cache.emplace(key, std::move(eig)).first->second;
}

}  // namespace

namespace fbm_detail {

std::vector<double> fgn_autocov(double hurst, double h, std::size_t count) {
  std::vector<double> g(count);
  const double two_h = 2.0 * hurst;
  const double scale = 0.5 * std::pow(h, two_h);
  for (std::size_t k = 0; k < count; ++k) {
    const double kk = static_cast<double>(k);
    const double up = std::pow(kk + 1.0, two_h);
    const double mid = (k == 0) ? 0.0 : 2.0 * std::pow(kk, two_h);
    const double dn = (k == 0) ? std::pow(1.0, two_h) : std::pow(kk - 1.0, two_h);
    g[k] = scale * (up - mid + dn);
  }
  return g;
}

std::vector<double> sample_fgn(double hurst, double h, std::size_t n, std::uint64_t seed) {
  if (n == 0) return {};
  const std::size_t M = next_pow2(2 * n);
  const std::vector<double>& eig = circulant_eigs(hurst, M);
  const double step_scale = std::pow(h, 2.0 * hurst);
  const auto Md = static_cast<double>(M);

  GaussianStream gauss(seed);
  std::vector<std::complex<double>> a(M);
  const std::size_t half = M / 2;
  a[0] = std::sqrt(step_scale * eig[0] / Md) * gauss.next();
  a[half] = std::sqrt(step_scale * eig[half] / Md) * gauss.next();
  for (std::size_t j = 1; j < half; ++j) {
    const double s = std::sqrt(step_scale * eig[j] / (2.0 * Md));
    const double u = gauss.next();
    const double v = gauss.next();
    a[j] = std::complex<double>(s * u, s * v);
    a[M - j] = std::conj(a[j]);
  }
  fft_forward(a);
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = a[k].real();
  return out;
}

}  // namespace fbm_detail

void FbmSpec::validate() const {
  if (!(hurst > 0.5 && hurst < 1.0))
    throw std::invalid_argument("noise.hurst: must lie in (1/2, 1)");
  if (!(h > 0.0)) throw std::invalid_argument("noise.grid_h: must be positive");
  if (!(horizon > 0.0)) throw std::invalid_argument("noise.horizon: must be positive");
  steps_of(horizon, h);  // throws if misaligned
  if (dim < 1) throw std::invalid_argument("noise.dim: must be at least 1");
}

TwoSidedPath::TwoSidedPath(std::shared_ptr<const GridPath> raw, std::size_t origin,
                           std::size_t lo, std::size_t hi)
    : raw_(std::move(raw)), origin_(origin), lo_(lo), hi_(hi) {
  if (!raw_ || hi_ >= raw_->points() || lo_ > origin_ || origin_ > hi_)
    throw std::invalid_argument("fbm: inconsistent path view");
}

double TwoSidedPath::t_min() const {
  return -static_cast<double>(origin_ - lo_) * raw_->h;
}

double TwoSidedPath::t_max() const {
  return static_cast<double>(hi_ - origin_) * raw_->h;
}

double TwoSidedPath::value(std::size_t k, int c) const {
  const auto d = static_cast<std::size_t>(raw_->dim);
  return raw_->values[(lo_ + k) * d + static_cast<std::size_t>(c)] -
         raw_->values[origin_ * d + static_cast<std::size_t>(c)];
}

std::size_t TwoSidedPath::raw_index_at(double t) const {
  const double rel = t / raw_->h;
  const double rounded = std::nearbyint(rel);
  if (std::fabs(rel - rounded) > 1e-9 * std::fmax(1.0, std::fabs(rel)))
    throw std::invalid_argument("fbm: time is not a grid point");
  const auto off = static_cast<std::ptrdiff_t>(rounded);
  const auto idx = static_cast<std::ptrdiff_t>(origin_) + off;
  if (idx < 0 || idx >= static_cast<std::ptrdiff_t>(raw_->points()))
    throw std::invalid_argument("fbm: time outside stored range");
  return static_cast<std::size_t>(idx);
}

double TwoSidedPath::value_at(double t, int c) const {
  const std::size_t idx = raw_index_at(t);
  if (idx < lo_ || idx > hi_)
    throw std::invalid_argument("fbm: time outside the visible window");
  return value(idx - lo_, c);
}

GridPath TwoSidedPath::materialize() const {
  GridPath out;
  out.t0 = t_min();
  out.h = raw_->h;
  out.dim = raw_->dim;
  const std::size_t n = points();
  const auto d = static_cast<std::size_t>(out.dim);
  out.values.resize(n * d);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t c = 0; c < d; ++c)
      out.values[k * d + c] = value(k, static_cast<int>(c));
  return out;
}

TwoSidedPath sample_fbm_two_sided(const FbmSpec& spec) {
  spec.validate();
  const std::size_t half_steps = steps_of(spec.horizon, spec.h);
  const std::size_t n_inc = 2 * half_steps;
  const auto d = static_cast<std::size_t>(spec.dim);

  auto raw = std::make_shared<GridPath>();
  raw->t0 = -spec.horizon;
  raw->h = spec.h;
  raw->dim = spec.dim;
  raw->values.assign((n_inc + 1) * d, 0.0);

  for (std::size_t c = 0; c < d; ++c) {
    const std::uint64_t coord_seed = mix_seed(spec.seed, 0x636F6F7264ULL + c);
    const std::vector<double> inc = fbm_detail::sample_fgn(spec.hurst, spec.h, n_inc, coord_seed);
    double run = 0.0;
    for (std::size_t k = 0; k < n_inc; ++k) {
      run += inc[k];
      raw->values[(k + 1) * d + c] = run;
    }
  }
  return TwoSidedPath(std::move(raw), half_steps, 0, n_inc);
}

TwoSidedPath shift_path(const TwoSidedPath& x, double s) {
  if (x.empty()) throw std::invalid_argument("fbm: shift of empty path");
  const double h = x.h();
  const double rel = s / h;
  const double rounded = std::nearbyint(rel);
  if (std::fabs(rel - rounded) > 1e-9 * std::fmax(1.0, std::fabs(rel)))
    throw std::invalid_argument("fbm: shift is not grid-aligned");
  const auto off = static_cast<std::ptrdiff_t>(rounded);

  const auto origin = static_cast<std::ptrdiff_t>(x.origin());
  const auto lo = static_cast<std::ptrdiff_t>(x.lo());
  const auto hi = static_cast<std::ptrdiff_t>(x.hi());
  const std::ptrdiff_t new_origin = origin + off;
  // Symmetric window intersected with the surviving grid.
  const std::ptrdiff_t half = std::min(new_origin - lo, hi - new_origin);
  if (half < 0 || new_origin < lo || new_origin > hi)
    throw std::invalid_argument("fbm: shift exceeds the stored horizon");
  return TwoSidedPath(x.raw_ptr(), static_cast<std::size_t>(new_origin),
                      static_cast<std::size_t>(new_origin - half),
                      static_cast<std::size_t>(new_origin + half));
}

MeanCI gamma_moment(const std::vector<TwoSidedPath>& ensemble, double beta,
                    double nu, double r) {
  if (!(nu > beta)) throw std::invalid_argument("gamma_moment: requires nu > beta");
  std::vector<double> powered;
  powered.reserve(ensemble.size());
  const double expo = 1.0 / (nu - beta);
  for (const TwoSidedPath& x : ensemble) {
    const std::size_t steps = steps_of(r, x.h());
    if (x.origin() < x.lo() + steps || x.origin() + steps > x.hi())
      throw std::invalid_argument("gamma_moment: window [-r, r] not covered");
    // Seminorm of raw storage equals the pinned path's (differences cancel).
    const Window w{x.origin() - steps, x.origin() + steps};
    const double semi = holder_semi_value(x.raw(), w, beta);
    powered.push_back(std::pow(semi, expo));
  }
  MeanCI inner = batch_means(powered);
  MeanCI out;
  out.n = inner.n;
  out.batches = inner.batches;
  out.value = std::pow(inner.value, nu - beta);
  // Delta-method half-width through the outer power transform.
  if (inner.value > 0.0)
    out.ci_half = std::fabs((nu - beta) * std::pow(inner.value, nu - beta - 1.0)) * inner.ci_half;
  return out;
}

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t index) {
  std::uint64_t s = base + 0x9E3779B97F4A7C15ULL * (index + 1);
  return splitmix_round(splitmix_round(s));
}

}  // namespace ydl
