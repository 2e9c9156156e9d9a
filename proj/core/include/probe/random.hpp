#pragma once

#include <cstdint>
#include <limits>
#include <random>

namespace probe {

// Seedable generator used for fixtures and random tie breaking.
//
// The engine is std::mt19937_64, whose output sequence is fixed by the C++
// standard (the 10000th draw from the default seed is 9981545732273789042).
// The standard distributions are implementation-defined, so the mappings to
// [0, 1) and to bounded integers are done here by hand to keep draws
// identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, bound) by rejection; bound must be > 0.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit =
        std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % bound;
  }

  // Uniform integer in [lo, hi], inclusive.
  std::uint64_t between(std::uint64_t lo, std::uint64_t hi) {
    if (hi - lo == std::numeric_limits<std::uint64_t>::max()) return lo + engine_();
    return lo + below(hi - lo + 1);
  }

 private:
  std::mt19937_64 engine_;
};

// splitmix64 finalizer; derives independent per-stream seeds from a base seed.
constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace probe
