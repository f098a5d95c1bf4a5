#include "doctest.h"

#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

#include "psm/rng.hpp"

using namespace psm;

TEST_CASE("same seed reproduces the same sequence") {
  Rng a(42), b(42);
  for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("different seeds and streams diverge") {
  Rng a(1), b(2);
  int same = 0;
  for (int i = 0; i < 64; ++i) same += (a.next_u64() == b.next_u64());
  CHECK(same == 0);

  Rng s0 = Rng::stream(7, 0), s1 = Rng::stream(7, 1);
  same = 0;
  for (int i = 0; i < 64; ++i) same += (s0.next_u64() == s1.next_u64());
  CHECK(same == 0);
}

TEST_CASE("uniform stays in [0, 1) and is roughly flat") {
  Rng rng(3);
  std::vector<int> buckets(10, 0);
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    buckets[static_cast<int>(u * 10)]++;
  }
  for (int count : buckets) {
    CHECK(count > n / 10 - 1000);
    CHECK(count < n / 10 + 1000);
  }
}

TEST_CASE("uniform_int covers the inclusive range") {
  Rng rng(5);
  std::set<std::int64_t> seen;
  for (int i = 0; i < 2000; ++i) {
    std::int64_t v = rng.uniform_int(-3, 4);
    CHECK(v >= -3);
    CHECK(v <= 4);
    seen.insert(v);
  }
  CHECK(seen.size() == 8);
  // Degenerate single-point range.
  for (int i = 0; i < 10; ++i) CHECK(rng.uniform_int(9, 9) == 9);
}

TEST_CASE("bernoulli respects degenerate probabilities") {
  Rng rng(11);
  for (int i = 0; i < 100; ++i) {
    CHECK_FALSE(rng.bernoulli(0.0));
    CHECK(rng.bernoulli(1.0));
  }
  int hits = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) hits += rng.bernoulli(0.25);
  CHECK(std::abs(hits / static_cast<double>(n) - 0.25) < 0.01);
}

TEST_CASE("exponential has the requested mean and variance") {
  Rng rng(13);
  const double mean = 730.0;
  const int n = 200000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    double x = rng.exponential(mean);
    CHECK(x >= 0.0);
    sum += x;
    sum2 += x * x;
  }
  const double m = sum / n;
  const double var = sum2 / n - m * m;
  CHECK(std::abs(m - mean) / mean < 0.02);
  // Exponential variance is mean^2.
  CHECK(std::abs(var - mean * mean) / (mean * mean) < 0.05);
}

TEST_CASE("uniform(lo, hi) spans the interval") {
  Rng rng(17);
  double lo = 1e9, hi = -1e9;
  for (int i = 0; i < 10000; ++i) {
    double v = rng.uniform(-2.5, 7.5);
    CHECK(v >= -2.5);
    CHECK(v < 7.5);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  CHECK(lo < -2.4);
  CHECK(hi > 7.4);
}
