#pragma once

#include <cstdint>
#include <random>

namespace gito {

using Rng = std::mt19937_64;

/// Independent generator for (seed, stream, index). Simulations draw prices,
/// microstructure noise and implied series from separate streams so that
/// turning one component off leaves the others bitwise unchanged.
inline Rng make_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(index),
                      static_cast<std::uint32_t>(index >> 32)};
    return Rng(seq);
}

namespace stream {
inline constexpr std::uint64_t price = 1;
inline constexpr std::uint64_t noise = 2;
inline constexpr std::uint64_t implied = 3;
inline constexpr std::uint64_t jumps = 4;
inline constexpr std::uint64_t optimizer = 5;
inline constexpr std::uint64_t repetition = 6;
}  // namespace stream

/// Seed for repetition `rep` of a study seeded with `master`.
inline std::uint64_t repetition_seed(std::uint64_t master, std::uint64_t rep) {
    Rng g = make_rng(master, stream::repetition, rep);
    return g();
}

}  // namespace gito
