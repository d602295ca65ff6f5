#ifndef VRFT_KERNELS_HPP_
#define VRFT_KERNELS_HPP_

#include <cstddef>
#include <cstdint>
#include <span>

namespace vrft::kernels {

// Data-parallel primitives behind the mask and bootstrap arithmetic.
// Every entry point has a scalar reference implementation; SIMD variants
// compiled into this build are selected once at startup based on what the
// CPU actually supports. All variants must agree with the scalar reference
// (popcounts exactly, sums within summation-order roundoff).
struct Ops {
  const char* name;
  std::uint64_t (*popcount)(const std::uint64_t* words, std::size_t n);
  std::uint64_t (*and_popcount)(const std::uint64_t* a, const std::uint64_t* b,
                                std::size_t n);
  double (*sum)(const double* values, std::size_t n);
};

const Ops& scalar_ops();
const Ops& active_ops();

// Every variant compiled into this build (scalar first). Used by the
// equivalence tests; dispatch goes through active_ops().
std::span<const Ops* const> all_ops();

inline std::uint64_t popcount(std::span<const std::uint64_t> words) {
  return active_ops().popcount(words.data(), words.size());
}

inline std::uint64_t and_popcount(std::span<const std::uint64_t> a,
                                  std::span<const std::uint64_t> b) {
  return active_ops().and_popcount(a.data(), b.data(), a.size());
}

inline double sum(std::span<const double> values) {
  return active_ops().sum(values.data(), values.size());
}

}  // namespace vrft::kernels

#endif  // VRFT_KERNELS_HPP_
