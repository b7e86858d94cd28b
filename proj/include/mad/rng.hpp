#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace mad {

using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x) noexcept;

// Derived seeds are pure functions of (seed, purpose, indices). Every source
// of randomness in a run is keyed this way from the single run seed.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view purpose,
                          std::initializer_list<std::uint64_t> indices = {});

// Uniform draw on [0, 1) from the top 53 bits of one engine output.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform integer on [0, bound) by rejection; bound > 0.
std::uint64_t uniform_index(Rng& rng, std::uint64_t bound);

double standard_normal(Rng& rng);

}  // namespace mad
