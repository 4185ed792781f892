#include "ydl/cache.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <stdexcept>

#include "ydl/grid.hpp"

static_assert(std::endian::native == std::endian::little,
              "the YDP1 cache codec assumes a little-endian host");

namespace ydl {

namespace {

constexpr char kMagic[4] = {'Y', 'D', 'P', '1'};

void put_u64(std::string& buf, std::uint64_t v) {
  char raw[8];
  std::memcpy(raw, &v, 8);
  buf.append(raw, 8);
}

void put_f64(std::string& buf, double v) {
  char raw[8];
  std::memcpy(raw, &v, 8);
  buf.append(raw, 8);
}

std::uint64_t take_u64(const char* p) {
  std::uint64_t v;
  std::memcpy(&v, p, 8);
  return v;
}

double take_f64(const char* p) {
  double v;
  std::memcpy(&v, p, 8);
  return v;
}

}  // namespace

std::uint64_t fnv1a64(const void* data, std::size_t n, std::uint64_t seed) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

std::uint64_t fnv1a64_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return 0;
  std::uint64_t h = 14695981039346656037ull;
  char buf[65536];
  while (in) {
    in.read(buf, sizeof(buf));
    std::streamsize got = in.gcount();
    if (got > 0) h = fnv1a64(buf, static_cast<std::size_t>(got), h);
  }
  return h;
}

std::string fnv1a64_hex(std::uint64_t h) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string cache_file_name(const FbmSpec& spec) {
  double params[4] = {spec.hurst, spec.h, spec.horizon, static_cast<double>(spec.dim)};
  std::uint64_t ph = fnv1a64(params, sizeof(params));
  char buf[80];
  std::snprintf(buf, sizeof(buf), "fbm-%020llu-%016llx.ydp1",
                static_cast<unsigned long long>(spec.seed),
                static_cast<unsigned long long>(ph));
  return buf;
}

void write_path_cache(const std::string& file, const TwoSidedPath& x, double hurst) {
  const GridPath& raw = x.raw();
  if (x.origin() - x.lo() != x.hi() - x.origin() || x.lo() != 0 ||
      x.hi() != raw.points() - 1)
    throw std::invalid_argument(
        "write_path_cache: only unshifted full-window paths can be cached");
  std::string buf;
  buf.reserve(4 + 5 * 8 + raw.values.size() * 8 + 8);
  buf.append(kMagic, 4);
  put_f64(buf, hurst);
  put_f64(buf, raw.h);
  put_f64(buf, x.t_max());
  put_u64(buf, static_cast<std::uint64_t>(raw.dim));
  put_u64(buf, raw.points());
  buf.append(reinterpret_cast<const char*>(raw.values.data()), raw.values.size() * 8);
  put_u64(buf, fnv1a64(buf.data(), buf.size()));

  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw std::runtime_error("write_path_cache: cannot write " + file);
}

std::optional<TwoSidedPath> read_path_cache(const std::string& file,
                                            std::string* warning) {
  std::ifstream in(file, std::ios::binary);
  if (!in) return std::nullopt;  // a miss, not a corruption
  std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  auto corrupt = [&](const char* why) -> std::optional<TwoSidedPath> {
    if (warning) *warning = file + ": " + why + "; regenerating";
    return std::nullopt;
  };
  if (buf.size() < 4 + 5 * 8 + 8) return corrupt("truncated header");
  if (std::memcmp(buf.data(), kMagic, 4) != 0) return corrupt("bad magic");

  const char* p = buf.data() + 4;
  double hurst = take_f64(p);
  double h = take_f64(p + 8);
  double horizon = take_f64(p + 16);
  std::uint64_t dim = take_u64(p + 24);
  std::uint64_t count = take_u64(p + 32);
  (void)hurst;
  std::size_t expect = 4 + 5 * 8 + static_cast<std::size_t>(dim) * count * 8 + 8;
  if (dim == 0 || count < 2 || buf.size() != expect) return corrupt("size mismatch");

  std::uint64_t stored = take_u64(buf.data() + buf.size() - 8);
  std::uint64_t fresh = fnv1a64(buf.data(), buf.size() - 8);
  if (stored != fresh) return corrupt("checksum mismatch");

  GridPath raw;
  raw.t0 = -horizon;
  raw.h = h;
  raw.dim = static_cast<int>(dim);
  raw.values.resize(static_cast<std::size_t>(dim) * count);
  std::memcpy(raw.values.data(), buf.data() + 4 + 5 * 8, raw.values.size() * 8);

  std::size_t origin = steps_of(horizon, h);
  if (origin >= count) return corrupt("origin outside sample range");
  return TwoSidedPath(std::make_shared<GridPath>(std::move(raw)), origin, 0, count - 1);
}

TwoSidedPath cached_fbm(const FbmSpec& spec, const std::string& cache_dir,
                        bool use_cache, std::vector<std::string>* warnings) {
  if (!use_cache) return sample_fbm_two_sided(spec);
  std::filesystem::create_directories(cache_dir);
  std::string file = (std::filesystem::path(cache_dir) / cache_file_name(spec)).string();
  std::string warning;
  if (auto cached = read_path_cache(file, &warning)) return *std::move(cached);
  if (!warning.empty() && warnings) warnings->push_back(warning);
  TwoSidedPath x = sample_fbm_two_sided(spec);
  write_path_cache(file, x, spec.hurst);
  return x;
}

}  // namespace ydl
