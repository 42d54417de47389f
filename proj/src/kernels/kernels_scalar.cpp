#include <algorithm>
#include <numeric>
#include <vector>

#include "framebench/kernels.hpp"

namespace framebench::kernels::scalar {

CodeHistogram count_codes(std::span<const std::uint8_t> codes) {
  CodeHistogram h{};
  for (std::uint8_t c : codes) {
    if (c < h.size()) ++h[c];
  }
  return h;
}

double sum(std::span<const double> values) {
  double s = 0.0;
  for (double v : values) s += v;
  return s;
}

double sum_squared_deviation(std::span<const double> values, double center) {
  double s = 0.0;
  for (double v : values) {
    const double d = v - center;
    s += d * d;
  }
  return s;
}

std::uint64_t count_extreme_permutations(std::span<const std::int32_t> a,
                                         std::span<const std::int32_t> b,
                                         std::int64_t threshold) {
  const auto n = static_cast<std::int64_t>(a.size());
  const std::int64_t sa = std::accumulate(a.begin(), a.end(), std::int64_t{0});
  const std::int64_t sb = std::accumulate(b.begin(), b.end(), std::int64_t{0});
  const std::int64_t center = sa * sb;

  std::vector<int> perm(a.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::uint64_t count = 0;
  do {
    std::int64_t dot = 0;
    for (std::size_t i = 0; i < a.size(); ++i) dot += std::int64_t{a[i]} * b[perm[i]];
    std::int64_t dev = n * dot - center;
    if (dev < 0) dev = -dev;
    if (dev >= threshold) ++count;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return count;
}

}  // namespace framebench::kernels::scalar
