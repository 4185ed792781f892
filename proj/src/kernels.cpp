#include "ydl/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>
#include <stdexcept>
#include <string>

namespace ydl::kernels {

#if defined(YDL_HAVE_AVX2)
const Ops& avx2_ops();  // defined in kernels_avx2.cpp
#endif

namespace {

double col_max_sq_scalar(const double* const* planes, int dim, std::size_t lo,
                         std::size_t j, const double* w2r, std::size_t L) {
  const double* wb = w2r + (L - j);
  double best = 0.0;
  if (dim == 1) {
    const double* p = planes[0];
    const double pj = p[j];
    for (std::size_t i = lo; i < j; ++i) {
      const double t = pj - p[i];
      const double v = (t * t) * wb[i];
      if (v > best) best = v;
    }
  } else {
    for (std::size_t i = lo; i < j; ++i) {
      double acc = 0.0;
      for (int c = 0; c < dim; ++c) {
        const double t = planes[c][j] - planes[c][i];
        acc += t * t;
      }
      const double v = acc * wb[i];
      if (v > best) best = v;
    }
  }
  return best;
}

double sup_sq_scalar(const double* const* planes, int dim, std::size_t lo, std::size_t hi) {
  double best = 0.0;
  if (dim == 1) {
    const double* p = planes[0];
    for (std::size_t k = lo; k <= hi; ++k) {
      const double v = p[k] * p[k];
      if (v > best) best = v;
    }
  } else {
    for (std::size_t k = lo; k <= hi; ++k) {
      double acc = 0.0;
      for (int c = 0; c < dim; ++c) acc += planes[c][k] * planes[c][k];
      if (acc > best) best = acc;
    }
  }
  return best;
}

const Ops kScalarOps{&col_max_sq_scalar, &sup_sq_scalar, "scalar"};

std::atomic<const Ops*> g_active{nullptr};

const Ops* select_default() {
#if defined(YDL_HAVE_AVX2)
  if (cpu_has_avx2()) {
    if (const char* env = std::getenv("YDL_KERNELS")) {
      if (std::strcmp(env, "scalar") == 0) return &kScalarOps;
    }
    return &avx2_ops();
  }
#endif
  return &kScalarOps;
}

}  // namespace

const Ops& scalar_ops() { return kScalarOps; }

bool have_avx2_build() {
#if defined(YDL_HAVE_AVX2)
  return true;
#else
  return false;
#endif
}

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2") != 0;
#else
  return false;
#endif
}

const Ops& active() {
  const Ops* ops = g_active.load(std::memory_order_acquire);
  if (!ops) {
    ops = select_default();
    g_active.store(ops, std::memory_order_release);
  }
  return *ops;
}

void force_backend(const char* name) {
  const std::string s = name ? name : "";
  if (s == "scalar") {
    g_active.store(&kScalarOps, std::memory_order_release);
  } else if (s == "avx2") {
#if defined(YDL_HAVE_AVX2)
    if (!cpu_has_avx2()) throw std::invalid_argument("kernels: CPU lacks AVX2");
    g_active.store(&avx2_ops(), std::memory_order_release);
#else
    throw std::invalid_argument("kernels: AVX2 backend not built");
#endif
  } else if (s == "auto") {
    g_active.store(select_default(), std::memory_order_release);
  } else {
    throw std::invalid_argument("kernels: unknown backend '" + s + "'");
  }
}

double pair_max_sq(const Ops& ops, const double* const* planes, int dim,
                   std::size_t lo, std::size_t hi, const double* w2r, std::size_t L) {
  double best = 0.0;
  for (std::size_t j = lo + 1; j <= hi; ++j) {
    const double v = ops.col_max_sq(planes, dim, lo, j, w2r, L);
    if (v > best) best = v;
  }
  return best;
}

}  // namespace ydl::kernels
