#include <atomic>
#include <cstdlib>
#include <cstring>

#include "framebench/error.hpp"
#include "framebench/kernels.hpp"

namespace framebench::kernels {

namespace {

bool cpu_has_avx2() {
#if defined(FRAMEBENCH_BUILD_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("popcnt");
#else
  return false;
#endif
}

Isa detect() {
  if (const char* env = std::getenv("FRAMEBENCH_ISA"); env && std::strcmp(env, "scalar") == 0) {
    return Isa::Scalar;
  }
  return cpu_has_avx2() ? Isa::Avx2 : Isa::Scalar;
}

std::atomic<Isa>& selected() {
  static std::atomic<Isa> isa{detect()};
  return isa;
}

}  // namespace

std::string_view to_string(Isa isa) {
  return isa == Isa::Avx2 ? "avx2" : "scalar";
}

bool isa_available(Isa isa) {
  return isa == Isa::Scalar || cpu_has_avx2();
}

Isa active_isa() { return selected().load(std::memory_order_relaxed); }

void force_isa(std::optional<Isa> isa) {
  if (isa && !isa_available(*isa)) {
    throw Error(ErrorKind::Invalid, "kernel variant not available: " + std::string(to_string(*isa)));
  }
  selected().store(isa ? *isa : detect(), std::memory_order_relaxed);
}

CodeHistogram count_codes(std::span<const std::uint8_t> codes) {
#if defined(FRAMEBENCH_BUILD_AVX2)
  if (active_isa() == Isa::Avx2) return avx2::count_codes(codes);
#endif
  return scalar::count_codes(codes);
}

double sum(std::span<const double> values) {
#if defined(FRAMEBENCH_BUILD_AVX2)
  if (active_isa() == Isa::Avx2) return avx2::sum(values);
#endif
  return scalar::sum(values);
}

double sum_squared_deviation(std::span<const double> values, double center) {
#if defined(FRAMEBENCH_BUILD_AVX2)
  if (active_isa() == Isa::Avx2) return avx2::sum_squared_deviation(values, center);
#endif
  return scalar::sum_squared_deviation(values, center);
}

std::uint64_t count_extreme_permutations(std::span<const std::int32_t> a,
                                         std::span<const std::int32_t> b,
                                         std::int64_t threshold) {
  if (a.size() != b.size() || a.empty() || a.size() > kMaxPermutationN) {
    throw Error(ErrorKind::Invalid, "count_extreme_permutations: need equal sizes in [1, " +
                                        std::to_string(kMaxPermutationN) + "]");
  }
#if defined(FRAMEBENCH_BUILD_AVX2)
  if (active_isa() == Isa::Avx2) return avx2::count_extreme_permutations(a, b, threshold);
#endif
  return scalar::count_extreme_permutations(a, b, threshold);
}

}  // namespace framebench::kernels
