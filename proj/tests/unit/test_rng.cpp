#include <cmath>
#include <cstdint>
#include <random>

#include <doctest.h>

#include "repsim/rng.hpp"

using repsim::mix64;
using repsim::RngStream;

TEST_CASE("mix64 matches published splitmix64 outputs") {
  // First three outputs of splitmix64 seeded with 0, widely published as
  // reference vectors for the algorithm.
  constexpr std::uint64_t gamma = 0x9E3779B97F4A7C15ull;
  CHECK(mix64(0) == 0xE220A8397B1DCDAFull);
  CHECK(mix64(gamma) == 0x6E789E6AA1B965F4ull);
  CHECK(mix64(2 * gamma) == 0x06C45D188009454Full);
}

TEST_CASE("platform mt19937_64 conforms to the standard's pinned value") {
  std::mt19937_64 gen;  // default seed 5489
  gen.discard(9999);
  CHECK(gen() == 9981545732273789042ull);
}

TEST_CASE("frozen draw sequence for seed 42, stream 0") {
  // Regression anchor: these exact values are part of the reproducibility
  // contract. If this test fails, every recorded run becomes unreplayable.
  RngStream r(42, 0);
  CHECK(r.uniform01() == 0.14804207196520414);
  CHECK(r.uniform01() == 0.19353943274981733);
  CHECK(r.uniform01() == 0.62564729256841867);
}

TEST_CASE("frozen first draws for neighbouring streams and seeds") {
  CHECK(RngStream(42, 1).uniform01() == 0.19495389184098921);
  CHECK(RngStream(7, 0).uniform01() == 0.66462136680005746);
}

TEST_CASE("same seed and stream replay identically") {
  RngStream a(123456789, 17);
  RngStream b(123456789, 17);
  for (int i = 0; i < 10'000; ++i) REQUIRE(a.uniform01() == b.uniform01());
}

TEST_CASE("different streams of one seed diverge immediately") {
  RngStream a(99, 0);
  RngStream b(99, 1);
  RngStream c(100, 0);
  CHECK(a.uniform01() != b.uniform01());
  RngStream a2(99, 0);
  CHECK(a2.uniform01() != c.uniform01());
}

TEST_CASE("uniform01 range and moments") {
  RngStream r(2024, 3);
  const int n = 1'000'000;
  double sum = 0.0;
  double sumsq = 0.0;
  double lo = 1.0;
  double hi = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform01();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
    sumsq += u * u;
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  // 4 sigma of the sample mean at n = 1e6 is ~1.2e-3.
  CHECK(std::abs(mean - 0.5) < 1.2e-3);
  CHECK(std::abs(var - 1.0 / 12.0) < 1e-3);
  CHECK(lo < 1e-4);
  CHECK(hi > 1.0 - 1e-4);
}

TEST_CASE("stream identity is observable") {
  RngStream r(5, 9);
  CHECK(r.seed() == 5);
  CHECK(r.stream_index() == 9);
}
