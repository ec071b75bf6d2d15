#pragma once

#include <cstdint>

namespace strebm {

// Independent random streams derived from one user seed.
enum class SeedStream : std::uint64_t {
  latents = 1,
  generator = 2,
  mixing = 3,
  observation_noise = 4,
};

// splitmix64 of (seed, stream); distinct streams give unrelated mt19937_64 seeds.
constexpr std::uint64_t derive_seed(std::uint64_t seed, SeedStream stream) noexcept {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(stream) + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace strebm
