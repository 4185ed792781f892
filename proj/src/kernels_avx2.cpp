#include <immintrin.h>

#include "ydl/kernels.hpp"

// AVX2 variants of the pair-scan kernels. Per pair they perform exactly the same
// IEEE operations as the scalar reference (sub, mul, mul / add chain in the same
// order, no FMA — this TU is built with -mavx2 only, so the compiler cannot fuse),
// hence results are bitwise identical and the dispatch is a pure speed choice.

namespace ydl::kernels {

namespace {

inline double hmax(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  __m128d m = _mm_max_pd(lo, hi);
  __m128d s = _mm_unpackhi_pd(m, m);
  m = _mm_max_sd(m, s);
  return _mm_cvtsd_f64(m);
}

double col_max_sq_avx2(const double* const* planes, int dim, std::size_t lo,
                       std::size_t j, const double* w2r, std::size_t L) {
  const double* wb = w2r + (L - j);
  double best = 0.0;
  std::size_t i = lo;
  if (dim == 1) {
    const double* p = planes[0];
    const double pj = p[j];
    if (j >= lo + 4) {
      const __m256d vj = _mm256_set1_pd(pj);
      __m256d vbest = _mm256_setzero_pd();
      for (; i + 4 <= j; i += 4) {
        const __m256d vi = _mm256_loadu_pd(p + i);
        const __m256d t = _mm256_sub_pd(vj, vi);
        const __m256d w = _mm256_loadu_pd(wb + i);
        vbest = _mm256_max_pd(vbest, _mm256_mul_pd(_mm256_mul_pd(t, t), w));
      }
      best = hmax(vbest);
    }
    for (; i < j; ++i) {
      const double t = pj - p[i];
      const double v = (t * t) * wb[i];
      if (v > best) best = v;
    }
  } else {
    if (j >= lo + 4) {
      __m256d vbest = _mm256_setzero_pd();
      for (; i + 4 <= j; i += 4) {
        __m256d acc = _mm256_setzero_pd();
        for (int c = 0; c < dim; ++c) {
          const __m256d vj = _mm256_set1_pd(planes[c][j]);
          const __m256d vi = _mm256_loadu_pd(planes[c] + i);
          const __m256d t = _mm256_sub_pd(vj, vi);
          acc = _mm256_add_pd(acc, _mm256_mul_pd(t, t));
        }
        const __m256d w = _mm256_loadu_pd(wb + i);
        vbest = _mm256_max_pd(vbest, _mm256_mul_pd(acc, w));
      }
      best = hmax(vbest);
    }
    for (; i < j; ++i) {
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

double sup_sq_avx2(const double* const* planes, int dim, std::size_t lo, std::size_t hi) {
  double best = 0.0;
  std::size_t k = lo;
  if (dim == 1) {
    const double* p = planes[0];
    if (hi >= lo + 3) {
      __m256d vbest = _mm256_setzero_pd();
      for (; k + 4 <= hi + 1; k += 4) {
        const __m256d v = _mm256_loadu_pd(p + k);
        vbest = _mm256_max_pd(vbest, _mm256_mul_pd(v, v));
      }
      best = hmax(vbest);
    }
    for (; k <= hi; ++k) {
      const double v = p[k] * p[k];
      if (v > best) best = v;
    }
  } else {
    if (hi >= lo + 3) {
      __m256d vbest = _mm256_setzero_pd();
      for (; k + 4 <= hi + 1; k += 4) {
        __m256d acc = _mm256_setzero_pd();
        for (int c = 0; c < dim; ++c) {
          const __m256d v = _mm256_loadu_pd(planes[c] + k);
          acc = _mm256_add_pd(acc, _mm256_mul_pd(v, v));
        }
        vbest = _mm256_max_pd(vbest, acc);
      }
      best = hmax(vbest);
    }
    for (; k <= hi; ++k) {
      double acc = 0.0;
      for (int c = 0; c < dim; ++c) acc += planes[c][k] * planes[c][k];
      if (acc > best) best = acc;
    }
  }
  return best;
}

const Ops kAvx2Ops{&col_max_sq_avx2, &sup_sq_avx2, "avx2"};

}  // namespace

const Ops& avx2_ops() { return kAvx2Ops; }

}  // namespace ydl::kernels
