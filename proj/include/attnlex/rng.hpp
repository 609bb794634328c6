#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace attnlex {

// Portable random source. The engine is std::mt19937_64, whose output sequence
// is fixed by the C++ standard. The standard distributions are not (their
// algorithms are implementation-defined), so every derived variate is computed
// here from raw engine output.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, bound) by rejection; bound must be > 0.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x = next();
    while (x >= limit)
      x = next();
    return x % bound;
  }

  /// Uniform integer in [lo, hi].
  std::int64_t between(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo) + 1));
  }

  /// Standard exponential variate by inversion of an open-interval uniform;
  /// strictly positive.
  double exponential() {
    const double u = (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
    return -std::log(u);
  }

  bool bernoulli(double p) { return uniform01() < p; }

private:
  std::mt19937_64 engine_;
};

} // namespace attnlex
