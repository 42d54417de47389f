#include <immintrin.h>

#include <algorithm>
#include <array>
#include <numeric>

#include "framebench/kernels.hpp"

namespace framebench::kernels::avx2 {

CodeHistogram count_codes(std::span<const std::uint8_t> codes) {
  CodeHistogram h{};
  const std::size_t n = codes.size();
  std::size_t i = 0;
  const __m256i c0 = _mm256_set1_epi8(0), c1 = _mm256_set1_epi8(1),
                c2 = _mm256_set1_epi8(2), c3 = _mm256_set1_epi8(3),
                c4 = _mm256_set1_epi8(4);
  for (; i + 32 <= n; i += 32) {
    const __m256i v = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(codes.data() + i));
    auto pop = [&](__m256i c) {
      return static_cast<std::uint64_t>(__builtin_popcount(
          static_cast<unsigned>(_mm256_movemask_epi8(_mm256_cmpeq_epi8(v, c)))));
    };
    h[0] += pop(c0);
    h[1] += pop(c1);
    h[2] += pop(c2);
    h[3] += pop(c3);
    h[4] += pop(c4);
  }
  for (; i < n; ++i) {
    if (codes[i] < h.size()) ++h[codes[i]];
  }
  return h;
}

namespace {

double hsum(__m256d v) {
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, v);
  return (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
}

}  // namespace

double sum(std::span<const double> values) {
  const std::size_t n = values.size();
  __m256d acc0 = _mm256_setzero_pd(), acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(values.data() + i));
    acc1 = _mm256_add_pd(acc1, _mm256_loadu_pd(values.data() + i + 4));
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += values[i];
  return s;
}

double sum_squared_deviation(std::span<const double> values, double center) {
  const std::size_t n = values.size();
  const __m256d c = _mm256_set1_pd(center);
  __m256d acc0 = _mm256_setzero_pd(), acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(values.data() + i), c);
    const __m256d d1 = _mm256_sub_pd(_mm256_loadu_pd(values.data() + i + 4), c);
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(d0, d0));
    acc1 = _mm256_add_pd(acc1, _mm256_mul_pd(d1, d1));
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) {
    const double d = values[i] - center;
    s += d * d;
  }
  return s;
}

// Eight permutations are evaluated per step: lane j of row i holds
// b[perm_j(i)], so the dot products for all eight come out of one pass of
// broadcast-multiply-accumulate over the rows.
std::uint64_t count_extreme_permutations(std::span<const std::int32_t> a,
                                         std::span<const std::int32_t> b,
                                         std::int64_t threshold) {
  const int n = static_cast<int>(a.size());
  const std::int64_t sa = std::accumulate(a.begin(), a.end(), std::int64_t{0});
  const std::int64_t sb = std::accumulate(b.begin(), b.end(), std::int64_t{0});
  // |n*dot - sa*sb| stays far inside int32 for n <= kMaxPermutationN and
  // doubled ranks <= 2n, so the comparison is done in 32-bit lanes.
  const __m256i vn = _mm256_set1_epi32(n);
  const __m256i vcenter = _mm256_set1_epi32(static_cast<std::int32_t>(sa * sb));
  const __m256i vthresh = _mm256_set1_epi32(static_cast<std::int32_t>(threshold - 1));

  __m256i va[kMaxPermutationN];
  for (int i = 0; i < n; ++i) va[i] = _mm256_set1_epi32(a[i]);

  alignas(32) std::int32_t rows[kMaxPermutationN][8];
  std::array<int, kMaxPermutationN> perm{};
  std::iota(perm.begin(), perm.begin() + n, 0);

  std::uint64_t count = 0;
  bool more = true;
  while (more) {
    int lanes = 0;
    for (; lanes < 8 && more; ++lanes) {
      for (int i = 0; i < n; ++i) rows[i][lanes] = b[perm[i]];
      more = std::next_permutation(perm.begin(), perm.begin() + n);
    }
    for (int j = lanes; j < 8; ++j) {
      for (int i = 0; i < n; ++i) rows[i][j] = 0;
    }
    __m256i dot = _mm256_setzero_si256();
    for (int i = 0; i < n; ++i) {
      const __m256i r = _mm256_load_si256(reinterpret_cast<const __m256i*>(rows[i]));
      dot = _mm256_add_epi32(dot, _mm256_mullo_epi32(va[i], r));
    }
    const __m256i dev = _mm256_abs_epi32(_mm256_sub_epi32(_mm256_mullo_epi32(vn, dot), vcenter));
    const unsigned mask = static_cast<unsigned>(
        _mm256_movemask_ps(_mm256_castsi256_ps(_mm256_cmpgt_epi32(dev, vthresh))));
    count += static_cast<std::uint64_t>(__builtin_popcount(mask & ((1u << lanes) - 1u)));
  }
  return count;
}

}  // namespace framebench::kernels::avx2
