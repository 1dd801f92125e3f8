#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string_view>

namespace asrkit {

// mt19937_64 output is fixed by the standard; the distributions here are
// written out so draws are identical across standard library vendors.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // [0, 1) with 53 bits of resolution.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Unbiased integer in [0, n); n must be positive.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v;
    do {
      v = engine_();
    } while (v >= limit);
    return v % n;
  }

  // Standard normal via Box-Muller (one draw per call, the partner is discarded).
  double normal() {
    const double u1 = 1.0 - uniform01();  // (0, 1]
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 engine_;
};

// Stable 64-bit seed for (global seed, key, tag): FNV-1a over the inputs,
// finished with a splitmix64 mix.
std::uint64_t derive_seed(std::uint64_t global_seed, std::string_view key, std::string_view tag);

}  // namespace asrkit
