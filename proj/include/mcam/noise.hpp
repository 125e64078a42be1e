#pragma once

// Counter-based random draws: every sample is a pure function of its key, so
// evaluation order and threading never change results.

#include <cmath>
#include <cstdint>
#include <numbers>

namespace mcam::noise {

[[nodiscard]] constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

[[nodiscard]] constexpr std::uint64_t hash_key(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                                               std::uint64_t c) noexcept {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ a);
  h = splitmix64(h ^ b);
  return splitmix64(h ^ c);
}

// Uniform in (0, 1), never exactly 0 or 1.
[[nodiscard]] constexpr double to_unit(std::uint64_t bits) noexcept {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

// Standard normal via Box-Muller on two hashed uniforms.
[[nodiscard]] inline double standard_normal(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                                            std::uint64_t c) noexcept {
  const std::uint64_t h = hash_key(seed, a, b, c);
  const double u1 = to_unit(h);
  const double u2 = to_unit(splitmix64(h));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace mcam::noise
