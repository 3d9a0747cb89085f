#pragma once

// Counter-based random numbers (Philox4x32-10). A draw is a pure function of
// (key, counter), so every chain/step/component gets the same variates no
// matter how work is scheduled across threads.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>

namespace ergoinv {

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

constexpr PhiloxCounter philox4x32(PhiloxCounter ctr, PhiloxKey key) noexcept {
  constexpr std::uint32_t m0 = 0xD2511F53u;
  constexpr std::uint32_t m1 = 0xCD9E8D57u;
  constexpr std::uint32_t w0 = 0x9E3779B9u;
  constexpr std::uint32_t w1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = std::uint64_t{m0} * ctr[0];
    const std::uint64_t p1 = std::uint64_t{m1} * ctr[2];
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

// Stream identifiers occupy the top counter word so that unrelated uses of
// one seed never overlap.
enum class Stream : std::uint32_t {
  increments = 0,
  initial_state = 1,
  halton_shift = 2,
  projections = 3,
  bootstrap = 4,
  reference_field = 5,
};

class CounterRng {
public:
  explicit constexpr CounterRng(std::uint64_t seed) noexcept
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}

  constexpr std::uint64_t seed() const noexcept {
    return (std::uint64_t{key_[1]} << 32) | key_[0];
  }

  // Four raw words for (stream, a, b, block); `a` is typically the step,
  // `b` the chain.
  constexpr PhiloxCounter raw(Stream stream, std::uint32_t a, std::uint32_t b,
                              std::uint32_t block) const noexcept {
    const std::uint32_t tag = (static_cast<std::uint32_t>(stream) << 24) | (block & 0x00FFFFFFu);
    return philox4x32({a, b, 0u, tag}, key_);
  }

  // Uniforms in (0, 1): 52-bit mantissas built from word pairs, offset by half
  // an ulp. With 53 bits the top value would round up to exactly 1.
  static constexpr double to_unit(std::uint32_t hi, std::uint32_t lo) noexcept {
    const std::uint64_t bits = ((std::uint64_t{hi} << 32) | lo) >> 12;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-52;
  }

  std::array<double, 2> uniform2(Stream stream, std::uint32_t a, std::uint32_t b,
                                 std::uint32_t block) const noexcept {
    const auto w = raw(stream, a, b, block);
    return {to_unit(w[0], w[1]), to_unit(w[2], w[3])};
  }

  // Box-Muller pair of independent standard normals.
  std::array<double, 2> normal2(Stream stream, std::uint32_t a, std::uint32_t b,
                                std::uint32_t block) const noexcept {
    const auto [u1, u2] = uniform2(stream, a, b, block);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double phi = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(phi), r * std::sin(phi)};
  }

  // Fills `out` with normals for one (step, chain) cell.
  void normals(Stream stream, std::uint64_t step, std::uint32_t chain,
               std::span<double> out) const noexcept {
    const auto lo = static_cast<std::uint32_t>(step);
    const auto hi = static_cast<std::uint32_t>(step >> 32);
    // The high step word is folded into the block id; runs never approach 2^32 steps.
    const std::uint32_t block_base = hi << 16;
    for (std::size_t i = 0; i < out.size(); i += 2) {
      const auto z = normal2(stream, lo, chain, block_base + static_cast<std::uint32_t>(i / 2));
      out[i] = z[0];
      if (i + 1 < out.size()) out[i + 1] = z[1];
    }
  }

private:
  PhiloxKey key_;
};

// Derives an independent 64-bit seed from a parent seed and a label (SplitMix64 finalizer).
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t label) noexcept {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (label + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace ergoinv
