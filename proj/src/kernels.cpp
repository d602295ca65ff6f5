#include "vrft/kernels.hpp"

#include <bit>
#include <vector>

namespace vrft::kernels {

namespace {

std::uint64_t scalar_popcount(const std::uint64_t* words, std::size_t n) {
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    total += static_cast<std::uint64_t>(std::popcount(words[i]));
  }
  return total;
}

std::uint64_t scalar_and_popcount(const std::uint64_t* a,
                                  const std::uint64_t* b, std::size_t n) {
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    total += static_cast<std::uint64_t>(std::popcount(a[i] & b[i]));
  }
  return total;
}

double scalar_sum(const double* values, std::size_t n) {
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    total += values[i];
  }
  return total;
}

constexpr Ops kScalarOps{"scalar", scalar_popcount, scalar_and_popcount,
                         scalar_sum};

}  // namespace

#if defined(VRFT_KERNELS_AVX2_BUILT)
const Ops* avx2_ops();  // defined in kernels_avx2.cpp
#endif

const Ops& scalar_ops() { return kScalarOps; }

namespace {

const Ops* select_active() {
#if defined(VRFT_KERNELS_AVX2_BUILT)
  if (__builtin_cpu_supports("avx2")) {
    return avx2_ops();
  }
#endif
  return &kScalarOps;
}

std::vector<const Ops*> build_variant_list() {
  std::vector<const Ops*> ops{&kScalarOps};
#if defined(VRFT_KERNELS_AVX2_BUILT)
  if (__builtin_cpu_supports("avx2")) {
    ops.push_back(avx2_ops());
  }
#endif
  return ops;
}

}  // namespace

const Ops& active_ops() {
  static const Ops* active = select_active();
  return *active;
}

std::span<const Ops* const> all_ops() {
  static const std::vector<const Ops*> variants = build_variant_list();
  return {variants.data(), variants.size()};
}

}  // namespace vrft::kernels
