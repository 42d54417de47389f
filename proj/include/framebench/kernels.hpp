#pragma once

// Numeric inner loops with a scalar reference implementation and SIMD
// variants. The public entry points dispatch at runtime to the widest
// instruction set the host supports; the per-ISA namespaces are exposed so
// tests can check every variant against the scalar reference.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

namespace framebench::kernels {

enum class Isa { Scalar, Avx2 };

std::string_view to_string(Isa isa);

/// True when the variant is compiled in and the CPU supports it.
bool isa_available(Isa isa);

/// The variant used by the dispatching entry points. Defaults to the best
/// available; FRAMEBENCH_ISA=scalar in the environment pins the reference.
Isa active_isa();

/// Test hook: pin dispatch to `isa` (must be available), or reset with nullopt.
void force_isa(std::optional<Isa> isa);

/// Largest n accepted by count_extreme_permutations (10! = 3,628,800).
inline constexpr int kMaxPermutationN = 10;

/// Histogram of code bytes 0..4; other byte values are ignored.
using CodeHistogram = std::array<std::uint64_t, 5>;

CodeHistogram count_codes(std::span<const std::uint8_t> codes);

/// Sum of squared deviations from `center`.
double sum_squared_deviation(std::span<const double> values, double center);

double sum(std::span<const double> values);

/// Enumerates every permutation p of positions 0..n-1 and counts those with
///   |n * sum_i a[i] * b[p(i)] - sum(a) * sum(b)| >= threshold.
/// Inputs are integer-scaled ranks, so the count is exact. n = a.size() =
/// b.size() must lie in [1, kMaxPermutationN].
std::uint64_t count_extreme_permutations(std::span<const std::int32_t> a,
                                         std::span<const std::int32_t> b,
                                         std::int64_t threshold);

namespace scalar {
CodeHistogram count_codes(std::span<const std::uint8_t> codes);
double sum_squared_deviation(std::span<const double> values, double center);
double sum(std::span<const double> values);
std::uint64_t count_extreme_permutations(std::span<const std::int32_t> a,
                                         std::span<const std::int32_t> b,
                                         std::int64_t threshold);
}  // namespace scalar

#if defined(FRAMEBENCH_BUILD_AVX2)
namespace avx2 {
CodeHistogram count_codes(std::span<const std::uint8_t> codes);
double sum_squared_deviation(std::span<const double> values, double center);
double sum(std::span<const double> values);
std::uint64_t count_extreme_permutations(std::span<const std::int32_t> a,
                                         std::span<const std::int32_t> b,
                                         std::int64_t threshold);
}  // namespace avx2
#endif

}  // namespace framebench::kernels
