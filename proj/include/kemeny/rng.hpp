#pragma once

#include <cstdint>
#include <random>

namespace kemeny {

using Rng = std::mt19937_64;

/// Independent generator for stream `stream` of a run seeded with `master_seed`.
/// Sample i of a run always draws from stream i, so the trajectory of a sample
/// does not depend on scheduling.
inline Rng stream_rng(std::uint64_t master_seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                      0x4b464931u};
    return Rng(seq);
}

/// Uniform integer in [0, bound), bound > 0 (Lemire's multiply-and-reject).
inline std::uint64_t uniform_below(Rng& rng, std::uint64_t bound) {
    unsigned __int128 product = static_cast<unsigned __int128>(rng()) * bound;
    auto low = static_cast<std::uint64_t>(product);
    if (low < bound) {
        const std::uint64_t threshold = (0 - bound) % bound;
        while (low < threshold) {
            product = static_cast<unsigned __int128>(rng()) * bound;
            low = static_cast<std::uint64_t>(product);
        }
    }
    return static_cast<std::uint64_t>(product >> 64);
}

inline double uniform_unit(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace kemeny
