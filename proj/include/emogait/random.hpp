#pragma once

#include <cstdint>
#include <random>

namespace emogait {

// Unbiased-enough bounded draw (multiply-shift); avoids the
// implementation-defined output of std::uniform_int_distribution so that
// seeded runs reproduce across standard libraries.
inline std::uint64_t bounded_draw(std::mt19937_64& rng, std::uint64_t n) {
  return static_cast<std::uint64_t>(
      (static_cast<unsigned __int128>(rng()) * n) >> 64);
}

// Fisher-Yates built on bounded_draw, same portability rationale.
template <typename T>
void seeded_shuffle(std::vector<T>& values, std::mt19937_64& rng) {
  for (std::size_t i = values.size(); i > 1; --i) {
    std::swap(values[i - 1], values[bounded_draw(rng, i)]);
  }
}

}  // namespace emogait
