#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ydl/fbm.hpp"

namespace ydl {

/// FNV-1a-64 running hash.
std::uint64_t fnv1a64(const void* data, std::size_t n,
                      std::uint64_t seed = 14695981039346656037ull);
std::uint64_t fnv1a64_file(const std::string& path);
std::string fnv1a64_hex(std::uint64_t h);

/// Cache file name for one realization: derived from the sampling parameters
/// and the per-path seed, so distinct parameters never collide.
std::string cache_file_name(const FbmSpec& spec);

/// Binary path format, bit-exact round trip:
///   magic "YDP1"; little-endian 64-bit fields hurst, h, T (doubles),
///   m, point count (unsigned); row-major float64 samples; trailing
///   FNV-1a-64 checksum of all preceding bytes.
/// The samples are the raw two-sided storage on [-T, T] (origin at T/h).
void write_path_cache(const std::string& file, const TwoSidedPath& x, double hurst);

/// Empty optional when the file is missing, truncated, checksum-corrupted or
/// parameter-inconsistent; a human-readable reason lands in *warning (missing
/// files produce no warning).
std::optional<TwoSidedPath> read_path_cache(const std::string& file,
                                            std::string* warning);

/// Cache-through sampler: returns the cached realization when the checksum
/// verifies, otherwise samples fresh and (re)writes the file. Warnings about
/// corrupt entries are appended to *warnings when non-null. Sampling and
/// caching commute bit-exactly, so cache hit/miss never changes results.
TwoSidedPath cached_fbm(const FbmSpec& spec, const std::string& cache_dir,
                        bool use_cache, std::vector<std::string>* warnings);

}  // namespace ydl
