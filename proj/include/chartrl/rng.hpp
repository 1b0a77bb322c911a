#pragma once

#include <cstdint>
#include <random>

namespace chartrl {

using Rng = std::mt19937_64;

// Independent stream for (seed, a, b); used to give every training step and
// every rollout group its own generator.
inline Rng make_rng(std::uint64_t seed, std::uint64_t a = 0, std::uint64_t b = 0) {
  const auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xFFFFFFFFu); };
  const auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
  std::seed_seq seq{lo(seed), hi(seed), lo(a), hi(a), lo(b), hi(b)};
  return Rng(seq);
}

}  // namespace chartrl
