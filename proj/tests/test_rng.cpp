#include <cmath>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "stohom/rng.hpp"

using namespace stohom;

TEST_CASE("Rng is reproducible and stream-splittable") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  Rng s1 = Rng::stream(7, 0, 0);
  Rng s2 = Rng::stream(7, 0, 0);
  CHECK(s1.next_u64() == s2.next_u64());

  Rng t1 = Rng::stream(7, 0, 0);
  Rng t2 = Rng::stream(7, 1, 0);
  Rng t3 = Rng::stream(7, 0, 1);
  const auto v1 = t1.next_u64(), v2 = t2.next_u64(), v3 = t3.next_u64();
  CHECK(v1 != v2);
  CHECK(v1 != v3);
  CHECK(v2 != v3);
}

TEST_CASE("Rng uniform stays in range") {
  Rng r(1);
  for (int i = 0; i < 10000; ++i) {
    const double u = r.uniform01();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
  for (int i = 0; i < 1000; ++i) {
    const double u = r.uniform(-2.0, 3.0);
    CHECK(u >= -2.0);
    CHECK(u < 3.0);
  }
  for (int i = 0; i < 1000; ++i) {
    const double p = r.phase();
    CHECK(p >= 0.0);
    CHECK(p < 2.0 * std::numbers::pi);
  }
}

TEST_CASE("Rng normal matches first two moments") {
  Rng r(1234);
  const int n = 200000;
  const double variance = 4.0;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = r.normal(variance);
    sum += x;
    sumsq += x * x;
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  CHECK(std::abs(mean) < 3.0 * std::sqrt(variance / n));
  CHECK(std::abs(var - variance) < 3.0 * std::sqrt(2.0 * variance * variance / n));
}

TEST_CASE("Rng rayleigh has second moment 2c") {
  Rng r(99);
  const int n = 200000;
  const double c = 3.0;
  double sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = r.rayleigh(c);
    CHECK(x >= 0.0);
    sumsq += x * x;
  }
  const double m2 = sumsq / n;
  CHECK(std::abs(m2 - 2.0 * c) < 3.0 * 2.0 * c / std::sqrt(n));
}
