#pragma once

// Counter-based random numbers. Every draw is a pure function of
// (seed, replication, candidate, stream), so results do not depend on the
// order in which replications or candidates are processed.

#include <array>
#include <cmath>
#include <cstdint>

#include "fairsel/stdnorm.hpp"

namespace fairsel::rng {

using Counter = std::array<std::uint32_t, 4>;
using Key = std::array<std::uint32_t, 2>;

// Philox4x32 with 10 rounds (Salmon et al., "Parallel random numbers: as easy
// as 1, 2, 3").
[[nodiscard]] inline Counter philox4x32_10(Counter ctr, Key key) noexcept {
  constexpr std::uint32_t m0 = 0xD2511F53u;
  constexpr std::uint32_t m1 = 0xCD9E8D57u;
  constexpr std::uint32_t w0 = 0x9E3779B9u;
  constexpr std::uint32_t w1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(m0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(m1) * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += w0;
    key[1] += w1;
  }
  return ctr;
}

// What a draw is used for; keeps prior and noise draws of one candidate apart.
enum class Stream : std::uint32_t {
  quality = 1,
  noise = 2,
  extra = 3,  // second uniform for rejection samplers
};

// Stateless source keyed by a 64-bit seed. `uniform_pair` yields two
// independent 53-bit uniforms strictly inside (0, 1).
class CounterRng {
 public:
  explicit constexpr CounterRng(std::uint64_t seed) noexcept
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}

  [[nodiscard]] std::array<double, 2> uniform_pair(std::uint32_t replication,
                                                   std::uint32_t candidate, Stream stream,
                                                   std::uint32_t block = 0) const noexcept {
    const Counter out = philox4x32_10(
        {block, candidate, replication, static_cast<std::uint32_t>(stream)}, key_);
    return {to_unit(out[0], out[1]), to_unit(out[2], out[3])};
  }

  [[nodiscard]] double uniform(std::uint32_t replication, std::uint32_t candidate, Stream stream,
                               std::uint32_t block = 0) const noexcept {
    return uniform_pair(replication, candidate, stream, block)[0];
  }

  // Standard normal by inversion of the uniform.
  [[nodiscard]] double normal(std::uint32_t replication, std::uint32_t candidate, Stream stream,
                              std::uint32_t block = 0) const {
    return stdnorm::quantile(uniform(replication, candidate, stream, block));
  }

 private:
  // (k + 1/2) / 2^53 for the top 53 bits k; never 0 or 1.
  static double to_unit(std::uint32_t hi, std::uint32_t lo) noexcept {
    const std::uint64_t bits = ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
  }

  Key key_;
};

}  // namespace fairsel::rng
