#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace iab::rng {

using Engine = std::mt19937_64;

/// Independent substream families derived from one episode seed.
enum class Stream : std::uint64_t {
  scenario = 0x5ce7,
  arrivals = 0xa221,
  fading = 0xfad1,
  policy = 0x9011,
  episode = 0xe915,
};

/// Order-sensitive 64-bit mix of a seed and a key tuple (splitmix64 finaliser).
std::uint64_t mix(std::uint64_t seed, std::initializer_list<std::uint64_t> keys);

inline Engine substream(std::uint64_t seed, Stream stream, std::uint64_t a = 0,
                        std::uint64_t b = 0, std::uint64_t c = 0) {
  return Engine(mix(seed, {static_cast<std::uint64_t>(stream), a, b, c}));
}

}  // namespace iab::rng
