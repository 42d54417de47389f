#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>

#include "framebench/error.hpp"
#include "framebench/kernels.hpp"
#include "framebench/metrics.hpp"

namespace framebench {

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> idx(values.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) { return values[x] < values[y]; });
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && values[idx[j + 1]] == values[idx[i]]) ++j;
    const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = r;
    i = j + 1;
  }
  return ranks;
}

std::string significance_stars(double p) noexcept {
  if (p < 0.001) return "***";
  if (p < 0.01) return "**";
  if (p < 0.05) return "*";
  return "";
}

double spearman_t_pvalue(double rho, std::size_t n) {
  if (n < 3) throw Error(ErrorKind::Invalid, "spearman: needs at least three items");
  const double r2 = rho * rho;
  if (r2 >= 1.0) return 0.0;
  const double df = static_cast<double>(n - 2);
  const double t = std::abs(rho) * std::sqrt(df / (1.0 - r2));
  boost::math::students_t dist(df);
  return std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, t)));
}

RankCorrelation spearman(std::span<const double> a, std::span<const double> b, PValueMethod method) {
  if (a.size() != b.size()) throw Error(ErrorKind::Invalid, "spearman: lists differ in length");
  const std::size_t n = a.size();
  if (n < 3) throw Error(ErrorKind::Invalid, "spearman: needs at least three items");
  for (double v : a) {
    if (!std::isfinite(v)) throw Error(ErrorKind::Invalid, "spearman: non-finite value");
  }
  for (double v : b) {
    if (!std::isfinite(v)) throw Error(ErrorKind::Invalid, "spearman: non-finite value");
  }

  // Doubled average ranks are integers, so every sum below is exact.
  std::vector<std::int32_t> ra;
  std::vector<std::int32_t> rb;
  for (double r : average_ranks(a)) ra.push_back(static_cast<std::int32_t>(std::lround(2.0 * r)));
  for (double r : average_ranks(b)) rb.push_back(static_cast<std::int32_t>(std::lround(2.0 * r)));
  const auto nn = static_cast<std::int64_t>(n);
  std::int64_t sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sa += ra[i];
    sb += rb[i];
    saa += std::int64_t{ra[i]} * ra[i];
    sbb += std::int64_t{rb[i]} * rb[i];
    sab += std::int64_t{ra[i]} * rb[i];
  }
  const std::int64_t va = nn * saa - sa * sa;
  const std::int64_t vb = nn * sbb - sb * sb;
  if (va == 0 || vb == 0) throw Error(ErrorKind::Invalid, "spearman: a list is constant");
  const std::int64_t cov = nn * sab - sa * sb;

  RankCorrelation out;
  out.n = n;
  out.rho = std::clamp(static_cast<double>(cov) / std::sqrt(static_cast<double>(va) * static_cast<double>(vb)),
                       -1.0, 1.0);

  if (method == PValueMethod::Auto) {
    method = n <= kExactSpearmanDefaultN ? PValueMethod::ExactPermutation : PValueMethod::TApproximation;
  }
  if (method == PValueMethod::ExactPermutation) {
    if (n > static_cast<std::size_t>(kernels::kMaxPermutationN)) {
      throw Error(ErrorKind::Invalid, "spearman: exact p-value limited to n <= " +
                                          std::to_string(kernels::kMaxPermutationN));
    }
    const std::uint64_t hits = kernels::count_extreme_permutations(ra, rb, cov < 0 ? -cov : cov);
    double total = 1.0;
    for (std::size_t k = 2; k <= n; ++k) total *= static_cast<double>(k);
    out.p_value = static_cast<double>(hits) / total;
    out.exact = true;
  } else {
    out.p_value = spearman_t_pvalue(out.rho, n);
  }
  out.stars = significance_stars(out.p_value);
  return out;
}

}  // namespace framebench
