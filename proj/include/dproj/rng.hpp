#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace dproj {

using Rng = std::mt19937_64;

[[nodiscard]] constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// Stream key for (root, counters...): the same inputs always give the same
/// generator, independent of how work is scheduled across threads.
[[nodiscard]] constexpr std::uint64_t derive_seed(std::uint64_t root,
                                                  std::initializer_list<std::uint64_t> counters) noexcept {
    std::uint64_t h = splitmix64(root);
    for (std::uint64_t c : counters)
        h = splitmix64(h ^ splitmix64(c + 0x632BE59BD9B4E019ull));
    return h;
}

[[nodiscard]] inline Rng make_stream(std::uint64_t root, std::initializer_list<std::uint64_t> counters) {
    return Rng(derive_seed(root, counters));
}

} // namespace dproj
