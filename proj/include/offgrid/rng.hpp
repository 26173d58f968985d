// Deterministic randomness for experiments: a splitmix64 stream drives every
// draw (masks, noise, property-test inputs) so runs are reproducible from one
// 64-bit seed.
#pragma once

#include <cmath>
#include <cstdint>

#include "offgrid/core.hpp"

namespace offgrid {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : s_(seed) {}

  std::uint64_t next_u64() {
    s_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = s_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, n) by rejection (no modulo bias).
  std::uint64_t bounded(std::uint64_t n) {
    std::uint64_t cutoff = (~0ULL / n) * n;  // largest multiple of n below 2^64
    for (;;) {
      std::uint64_t x = next_u64();
      if (x < cutoff) return x % n;
    }
  }

  // Uniform double in [0, 1) with 53 random bits.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * (1.0 / 9007199254740992.0);
  }

  // Standard normal pair via Box-Muller.
  std::pair<double, double> gauss_pair() {
    double u1 = next_double();
    while (u1 <= 1e-300) u1 = next_double();
    double u2 = next_double();
    double r = std::sqrt(-2.0 * std::log(u1));
    return {r * std::cos(2.0 * kPi * u2), r * std::sin(2.0 * kPi * u2)};
  }

  double gauss() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    auto [a, b] = gauss_pair();
    spare_ = b;
    have_spare_ = true;
    return a;
  }

 private:
  std::uint64_t s_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace offgrid
