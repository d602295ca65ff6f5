#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "vrft/kernels.hpp"

namespace {

using vrft::kernels::Ops;

std::vector<std::uint64_t> random_words(std::mt19937_64& rng, std::size_t n) {
  std::vector<std::uint64_t> words(n);
  for (auto& w : words) w = rng();
  return words;
}

}  // namespace

TEST_CASE("kernel variant list always starts with scalar") {
  const auto ops = vrft::kernels::all_ops();
  REQUIRE(!ops.empty());
  CHECK(std::string(ops[0]->name) == "scalar");
  // active_ops must be one of the compiled variants
  bool found = false;
  for (const Ops* variant : ops) {
    if (variant == &vrft::kernels::active_ops()) found = true;
  }
  CHECK(found);
}

TEST_CASE("popcount variants agree with scalar on random words") {
  std::mt19937_64 rng(123);
  const auto& scalar = vrft::kernels::scalar_ops();
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = rng() % 70;  // covers empty, tails, full blocks
    const auto a = random_words(rng, n);
    const auto b = random_words(rng, n);
    const auto expected_pop = scalar.popcount(a.data(), n);
    const auto expected_and = scalar.and_popcount(a.data(), b.data(), n);
    for (const Ops* variant : vrft::kernels::all_ops()) {
      CAPTURE(variant->name);
      CHECK(variant->popcount(a.data(), n) == expected_pop);
      CHECK(variant->and_popcount(a.data(), b.data(), n) == expected_and);
    }
  }
}

TEST_CASE("popcount edge patterns") {
  const std::vector<std::uint64_t> zeros(9, 0);
  const std::vector<std::uint64_t> ones(9, ~std::uint64_t{0});
  for (const Ops* variant : vrft::kernels::all_ops()) {
    CAPTURE(variant->name);
    CHECK(variant->popcount(zeros.data(), zeros.size()) == 0);
    CHECK(variant->popcount(ones.data(), ones.size()) == 9 * 64);
    CHECK(variant->and_popcount(zeros.data(), ones.data(), 9) == 0);
    CHECK(variant->and_popcount(ones.data(), ones.data(), 9) == 9 * 64);
    CHECK(variant->popcount(nullptr, 0) == 0);
  }
}

TEST_CASE("sum variants agree with scalar within roundoff") {
  std::mt19937_64 rng(321);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = rng() % 100;
    std::vector<double> values(n);
    for (auto& v : values) {
      v = (static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5) * 100.0;
    }
    const double expected =
        vrft::kernels::scalar_ops().sum(values.data(), n);
    for (const Ops* variant : vrft::kernels::all_ops()) {
      CAPTURE(variant->name);
      const double got = variant->sum(values.data(), n);
      CHECK(std::abs(got - expected) <=
            1e-12 * std::max(1.0, std::abs(expected)));
    }
  }
}
