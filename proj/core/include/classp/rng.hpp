#pragma once

#include <cstdint>
#include <vector>

#include "classp/matrix.hpp"

namespace classp {

/// Seeded PCG32 generator (O'Neill's pcg32, 64-bit state / 32-bit output).
/// The multiplier, seeding procedure and output permutation follow the
/// reference implementation exactly, so identical seeds produce identical
/// streams on every platform. All randomness in the library flows through
/// this class.
class Pcg32 {
public:
    static constexpr std::uint64_t kMultiplier = 6364136223846793005ULL;
    // Default stream constant; with seed 42 the first outputs match the
    // reference implementation's published demo values.
    static constexpr std::uint64_t kDefaultStream = 54ULL;

    explicit Pcg32(std::uint64_t seed, std::uint64_t stream = kDefaultStream);

    std::uint32_t next_u32();

    // Unbiased draw in [0, bound) by rejection, as in pcg32_boundedrand.
    std::uint32_t next_below(std::uint32_t bound);

    // Uniform double in [0, 1), one 32-bit draw.
    double next_unit();

    // Standard normal via Box-Muller; consumes exactly two 32-bit draws
    // (u1 in (0,1], u2 in [0,1)); the sine branch is discarded.
    double next_normal();

    // Fisher-Yates permutation of 0..n-1.
    std::vector<std::size_t> permutation(std::size_t n);

private:
    std::uint64_t state_;
    std::uint64_t inc_;
};

// Matrix of pseudo-normal draws mean + std * z, filled in row-major order.
// Throws ArgumentError when std < 0.
Matrix rand_normal(Pcg32& rng, std::size_t rows, std::size_t cols, double mean = 0.0,
                   double stddev = 1.0);

} // namespace classp
