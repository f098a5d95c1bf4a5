#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace psm {

// Deterministic, seedable, splittable generator used by every stochastic
// operation in the project. xoshiro256++ core seeded through splitmix64, so a
// given (seed, stream) pair produces the same sequence on every platform —
// std::<random> distributions are implementation-defined and are deliberately
// not used here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 1) {
    std::uint64_t x = seed;
    for (auto& word : state_) word = splitmix64(x);
  }

  // Independent stream derived from (seed, stream index). Streams do not
  // overlap in practice: the index is golden-ratio mixed into the seed before
  // the expander runs.
  static Rng stream(std::uint64_t seed, std::uint64_t stream_index) {
    return Rng(seed ^ (0x9E3779B97F4A7C15ULL * (stream_index + 1)));
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [lo, hi] inclusive.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<std::int64_t>(bounded(span));
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Exponentially distributed sample with the given mean (inverse CDF).
  double exponential(double mean) { return -mean * std::log(1.0 - uniform()); }

 private:
  static std::uint64_t splitmix64(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  static std::uint64_t rotl(std::uint64_t v, int k) {
    return (v << k) | (v >> (64 - k));
  }

  // Debiased bounded draw (Lemire-style rejection on the low word).
  std::uint64_t bounded(std::uint64_t n) {
    if (n == 0) return next_u64();
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t r = next_u64();
      if (r >= threshold) return r % n;
    }
  }

  std::uint64_t state_[4];
};

}  // namespace psm
