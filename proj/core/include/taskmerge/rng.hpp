#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

// Deterministic random streams. Everything that draws randomness in this
// project goes through splitmix64 plus an explicit Box-Muller transform,
// not the standard-library distributions, because distribution output is
// implementation-defined and seeds must reproduce byte-identical results
// across toolchains.

namespace taskmerge::rng {

inline constexpr std::uint64_t kFnvOffset = 14695981039346656037ULL;
inline constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

constexpr std::uint64_t fnv1a(std::string_view bytes,
                              std::uint64_t h = kFnvOffset) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= kFnvPrime;
  }
  return h;
}

constexpr std::uint64_t fnv1a(std::uint64_t value,
                              std::uint64_t h = kFnvOffset) {
  for (int i = 0; i < 8; ++i) {
    h ^= value & 0xffu;
    h *= kFnvPrime;
    value >>= 8;
  }
  return h;
}

class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1), 53 bits of mantissa.
  double next_unit() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  // Uniform in (0, 1]; never zero, safe as a log() argument.
  double next_unit_open() {
    return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller. Two uniforms per draw, no caching, so
  // the stream position is a pure function of the call count.
  double next_gaussian() {
    const double u1 = next_unit_open();
    const double u2 = next_unit();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  // Uniform integer in [0, bound) by rejection; bound > 0.
  std::uint64_t next_below(std::uint64_t bound) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x;
    do {
      x = next();
    } while (x >= limit);
    return x % bound;
  }

 private:
  std::uint64_t state_;
};

// Independent substream derived from a base seed and a label plus optional
// integer salts. Used to key noise per (segment, operation) and dataset
// synthesis per (video, case) so results do not depend on iteration order.
inline SplitMix64 substream(std::uint64_t seed, std::string_view label,
                            std::uint64_t salt0 = 0, std::uint64_t salt1 = 0) {
  std::uint64_t h = fnv1a(seed);
  h = fnv1a(label, h);
  h = fnv1a(salt0, h);
  h = fnv1a(salt1, h);
  return SplitMix64{h};
}

}  // namespace taskmerge::rng
