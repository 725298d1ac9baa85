// Pairwise soft-IoU accumulation kernel.
//
// For every pair (i < j) of maps this accumulates sum(min) over all pixels;
// sum(max) follows from max(a, b) = a + b - min(a, b) and per-map totals.
// Pixels are processed in fixed-size chunks. Inside a chunk, pixel p feeds
// double lane p % kLanes, the lanes are combined by a fixed tree, and chunk
// partials are added to the pair totals in chunk order. The floating-point
// association per pair therefore depends neither on how pairs are split
// across workers nor on whether the vector or scalar path runs.

#include <algorithm>
#include <thread>
#include <vector>

#include "cscore/engine.hpp"
#include "cscore/errors.hpp"

#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
#include <immintrin.h>
#define CSCORE_HAVE_AVX2_PATH 1
#endif

namespace cscore::detail {
namespace {

constexpr std::size_t kChunk = 1024;
constexpr std::size_t kLanes = 32;

double combine_lanes(double (&lane)[kLanes]) {
  for (std::size_t width = kLanes / 2; width > 0; width /= 2) {
    for (std::size_t l = 0; l < width; ++l) lane[l] += lane[l + width];
  }
  return lane[0];
}

double chunk_min_sum_scalar(const float* a, const float* b, std::size_t len) {
  double lane[kLanes] = {};
  for (std::size_t p = 0; p < len; ++p) {
    const float x = a[p];
    const float y = b[p];
    lane[p % kLanes] += static_cast<double>(x < y ? x : y);
  }
  return combine_lanes(lane);
}

#ifdef CSCORE_HAVE_AVX2_PATH
__attribute__((target("avx2"))) double chunk_min_sum_avx2(const float* a, const float* b,
                                                          std::size_t len) {
  __m256d acc[8];
  for (auto& v : acc) v = _mm256_setzero_pd();
  std::size_t p = 0;
  for (; p + kLanes <= len; p += kLanes) {
    for (std::size_t u = 0; u < 4; ++u) {
      const __m256 m = _mm256_min_ps(_mm256_loadu_ps(a + p + 8 * u), _mm256_loadu_ps(b + p + 8 * u));
      acc[2 * u] = _mm256_add_pd(acc[2 * u], _mm256_cvtps_pd(_mm256_castps256_ps128(m)));
      acc[2 * u + 1] = _mm256_add_pd(acc[2 * u + 1], _mm256_cvtps_pd(_mm256_extractf128_ps(m, 1)));
    }
  }
  alignas(32) double lane[kLanes];
  for (std::size_t v = 0; v < 8; ++v) _mm256_store_pd(lane + 4 * v, acc[v]);
  for (std::size_t l = 0; p < len; ++p, ++l) {
    const float x = a[p];
    const float y = b[p];
    lane[l] += static_cast<double>(x < y ? x : y);
  }
  return combine_lanes(lane);
}

bool cpu_has_avx2() {
  static const bool has = __builtin_cpu_supports("avx2");
  return has;
}
#endif

using ChunkFn = double (*)(const float*, const float*, std::size_t);

ChunkFn select_kernel(KernelPath path) {
#ifdef CSCORE_HAVE_AVX2_PATH
  if (path == KernelPath::Auto && cpu_has_avx2()) return chunk_min_sum_avx2;
#endif
  (void)path;
  return chunk_min_sum_scalar;
}

// Per-map pixel totals with the same chunk and lane pattern (min(a, a) = a).
std::vector<double> map_totals(ChunkFn chunk_min_sum, std::span<const float> maps,
                               std::size_t count, std::size_t pixels) {
  std::vector<double> totals(count, 0.0);
  for (std::size_t i = 0; i < count; ++i) {
    const float* m = maps.data() + i * pixels;
    for (std::size_t off = 0; off < pixels; off += kChunk) {
      totals[i] += chunk_min_sum(m + off, m + off, std::min(kChunk, pixels - off));
    }
  }
  return totals;
}

// First pair index of row i in the row-major enumeration of (i < j).
std::size_t row_start(std::size_t i, std::size_t n) { return i * (2 * n - i - 1) / 2; }

void run_range(ChunkFn chunk_min_sum, std::span<const float> maps, std::size_t n, std::size_t pixels,
               std::size_t begin, std::size_t end, std::vector<double>& min_sum) {
  if (begin >= end) return;
  std::size_t i0 = 0;
  while (i0 + 1 < n && row_start(i0 + 1, n) <= begin) ++i0;
  const std::size_t j0 = i0 + 1 + (begin - row_start(i0, n));

  for (std::size_t off = 0; off < pixels; off += kChunk) {
    const std::size_t len = std::min(kChunk, pixels - off);
    std::size_t i = i0;
    std::size_t j = j0;
    for (std::size_t k = begin; k < end; ++k) {
      min_sum[k] += chunk_min_sum(maps.data() + i * pixels + off, maps.data() + j * pixels + off, len);
      if (++j == n) {
        ++i;
        j = i + 1;
      }
    }
  }
}

}  // namespace

PairSums pair_sums(std::span<const float> maps, std::size_t count, std::size_t pixels,
                   unsigned workers, KernelPath path) {
  if (maps.size() != count * pixels) {
    throw ValidationError("pair_sums: buffer size does not match count x pixels");
  }
  const std::size_t pairs = count < 2 ? 0 : count * (count - 1) / 2;
  PairSums out{std::vector<double>(pairs, 0.0), std::vector<double>(pairs, 0.0)};
  if (pairs == 0) return out;

  const ChunkFn kernel = select_kernel(path);
  const std::size_t w = std::clamp<std::size_t>(workers, 1, pairs);
  if (w == 1) {
    run_range(kernel, maps, count, pixels, 0, pairs, out.min_sum);
  } else {
    std::vector<std::jthread> threads;
    threads.reserve(w);
    for (std::size_t t = 0; t < w; ++t) {
      const std::size_t begin = pairs * t / w;
      const std::size_t end = pairs * (t + 1) / w;
      threads.emplace_back(
          [&, begin, end] { run_range(kernel, maps, count, pixels, begin, end, out.min_sum); });
    }
  }

  const std::vector<double> totals = map_totals(kernel, maps, count, pixels);
  std::size_t k = 0;
  for (std::size_t i = 0; i < count; ++i) {
    for (std::size_t j = i + 1; j < count; ++j, ++k) {
      out.max_sum[k] = std::max((totals[i] + totals[j]) - out.min_sum[k], out.min_sum[k]);
    }
  }
  return out;
}

}  // namespace cscore::detail
