#include "classp/rng.hpp"

#include <cmath>
#include <numbers>

#include "classp/error.hpp"

namespace classp {

Pcg32::Pcg32(std::uint64_t seed, std::uint64_t stream) {
    // pcg32_srandom: advance once with the increment set, add the seed,
    // advance again.
    inc_ = (stream << 1u) | 1u;
    state_ = 0u;
    next_u32();
    state_ += seed;
    next_u32();
}

std::uint32_t Pcg32::next_u32() {
    const std::uint64_t old = state_;
    state_ = old * kMultiplier + inc_;
    const auto xorshifted = static_cast<std::uint32_t>(((old >> 18u) ^ old) >> 27u);
    const auto rot = static_cast<std::uint32_t>(old >> 59u);
    return (xorshifted >> rot) | (xorshifted << ((-rot) & 31u));
}

std::uint32_t Pcg32::next_below(std::uint32_t bound) {
    if (bound == 0) {
        throw ArgumentError("next_below: bound must be positive");
    }
    const std::uint32_t threshold = -bound % bound;
    for (;;) {
        const std::uint32_t r = next_u32();
        if (r >= threshold) return r % bound;
    }
}

double Pcg32::next_unit() {
    return static_cast<double>(next_u32()) * 0x1p-32;
}

double Pcg32::next_normal() {
    // u1 in (0,1] so log() stays finite; u2 in [0,1).
    const double u1 = (static_cast<double>(next_u32()) + 1.0) * 0x1p-32;
    const double u2 = static_cast<double>(next_u32()) * 0x1p-32;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::vector<std::size_t> Pcg32::permutation(std::size_t n) {
    std::vector<std::size_t> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = i;
    for (std::size_t i = n; i > 1; --i) {
        const std::size_t j = next_below(static_cast<std::uint32_t>(i));
        std::swap(out[i - 1], out[j]);
    }
    return out;
}

Matrix rand_normal(Pcg32& rng, std::size_t rows, std::size_t cols, double mean, double stddev) {
    if (stddev < 0.0) {
        throw ArgumentError("rand_normal: std must be >= 0, got " + std::to_string(stddev));
    }
    Matrix out(rows, cols);
    for (double& v : out.data) {
        v = mean + stddev * rng.next_normal();
    }
    return out;
}

} // namespace classp
