#pragma once

#include <cstddef>

namespace ydl::kernels {

/// Low-level pair-scan kernels behind the Hölder-norm machinery. Paths are passed
/// as structure-of-arrays planes (one contiguous double array per coordinate) so a
/// single kernel covers every dimension. Both backends perform the identical
/// sequence of IEEE operations per pair (sub, mul, mul, max; no FMA), so scalar
/// and AVX2 results agree bitwise and runs are reproducible across machines.
struct Ops {
  /// max over i in [lo, j) of  w2r[L - j + i] * sum_c (planes[c][j] - planes[c][i])^2.
  /// w2r is the reversed table of squared reciprocal lag weights,
  /// w2r[L - lag] = ((lag*h)^{-beta})^2 for lag in [1, L] (L entries); storing it
  /// reversed makes the weight loads contiguous and ascending alongside i.
  double (*col_max_sq)(const double* const* planes, int dim, std::size_t lo,
                       std::size_t j, const double* w2r, std::size_t L);
  /// max over k in [lo, hi] of sum_c planes[c][k]^2.
  double (*sup_sq)(const double* const* planes, int dim, std::size_t lo, std::size_t hi);
  const char* name;
};

/// Kernel set selected at runtime: AVX2 when the CPU supports it (or when forced),
/// scalar otherwise. Selection can be overridden by force_backend() or the
/// YDL_KERNELS environment variable ("scalar" | "avx2" | "auto").
const Ops& active();
const Ops& scalar_ops();
bool have_avx2_build();
bool cpu_has_avx2();
/// name: "scalar", "avx2" or "auto". Throws std::invalid_argument on unknown names
/// or when avx2 is requested but unavailable.
void force_backend(const char* name);

/// max over pairs lo <= i < j <= hi of w2r-weighted squared increments
/// (loops col_max_sq over columns; the building block for Hölder seminorms).
double pair_max_sq(const Ops& ops, const double* const* planes, int dim,
                   std::size_t lo, std::size_t hi, const double* w2r, std::size_t L);

}  // namespace ydl::kernels
