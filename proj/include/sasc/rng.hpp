#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace sasc {

// Seeded generator with platform-stable draws. std::mt19937_64 is fully
// specified by the standard; the distributions below are written out so
// results do not depend on the standard library vendor.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return x % bound;
  }

  // Uniform real in (0, 1).
  double open_unit() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller (one value per call).
  double normal() {
    const double u1 = open_unit();
    const double u2 = open_unit();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace sasc
