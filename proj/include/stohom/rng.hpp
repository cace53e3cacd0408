#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace stohom {

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}
}  // namespace detail

/**
 * @brief Deterministic random stream: xoshiro256++ with explicit samplers.
 *
 * Streams are derived from (master seed, sample index, tag) by a splitmix64
 * chain, so independent samples can be generated on any number of threads
 * with output independent of scheduling. The normal/Rayleigh samplers are
 * written out explicitly (no std::*_distribution) so that replay does not
 * depend on the standard library implementation.
 */
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : s_) word = detail::splitmix64(sm);
  }

  /// Counter-based stream split: one independent stream per (index, tag).
  static Rng stream(std::uint64_t master, std::uint64_t index, std::uint64_t tag) {
    return Rng(stream_seed(master, index, tag));
  }

  /// The derived 64-bit seed behind stream(), reportable in run manifests.
  static std::uint64_t stream_seed(std::uint64_t master, std::uint64_t index, std::uint64_t tag) {
    std::uint64_t sm = master;
    std::uint64_t a = detail::splitmix64(sm);
    sm = a ^ (0x9e3779b97f4a7c15ULL * (index + 1));
    a = detail::splitmix64(sm);
    sm = a ^ (0xd1b54a32d192ed03ULL * (tag + 1));
    return detail::splitmix64(sm);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform in [0, 1), 53 random bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

  std::uint64_t below(std::uint64_t n) { return n ? next_u64() % n : 0; }

  /// N(0, variance) via Box-Muller (two uniforms per draw, no rejection).
  double normal(double variance) {
    const double u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log1p(-u1));
    return std::sqrt(variance) * r * std::cos(2.0 * std::numbers::pi * u2);
  }

  /// Rayleigh with E[r^2] = 2 c: density (r/c) exp(-r^2 / (2c)).
  double rayleigh(double c) {
    const double u = uniform01();
    return std::sqrt(c) * std::sqrt(-2.0 * std::log1p(-u));
  }

  /// Uniform phase in [0, 2 pi).
  double phase() { return 2.0 * std::numbers::pi * uniform01(); }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  std::uint64_t s_[4];
};

}  // namespace stohom
