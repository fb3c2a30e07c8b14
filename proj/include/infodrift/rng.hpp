#pragma once
// Philox4x32-10 counter-based generator from the Random123 family.
// Every draw is a pure function of (key, counter), so a path's randomness is
// addressed by (seed, path_id, cell, stream) and never depends on the order
// in which paths are generated.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace infodrift {

class Philox4x32 {
public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter generate(Counter ctr, Key key) {
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                key[0] += kW0;
                key[1] += kW1;
            }
            const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * ctr[0];
            const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * ctr[2];
            const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
            const auto lo0 = static_cast<std::uint32_t>(p0);
            const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
            const auto lo1 = static_cast<std::uint32_t>(p1);
            ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        }
        return ctr;
    }

private:
    static constexpr std::uint32_t kM0 = 0xD2511F53u;
    static constexpr std::uint32_t kM1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kW0 = 0x9E3779B9u;
    static constexpr std::uint32_t kW1 = 0xBB67AE85u;
};

// Draws for one simulated path. Stream 0 carries the Gaussian increments,
// stream 1 + j the Poisson counts of mark j.
class PathRandom {
public:
    PathRandom(std::uint64_t seed, std::uint64_t path_id)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          path_lo_(static_cast<std::uint32_t>(path_id)),
          path_hi_(static_cast<std::uint32_t>(path_id >> 32)) {}

    // Two independent uniforms in the open interval (0, 1).
    std::array<double, 2> uniforms(std::uint32_t cell, std::uint32_t stream) const {
        const auto out = Philox4x32::generate({cell, stream, path_lo_, path_hi_}, key_);
        return {to_unit(out[0], out[1]), to_unit(out[2], out[3])};
    }

    double normal(std::uint32_t cell) const {
        const auto u = uniforms(cell, 0);
        return std::sqrt(-2.0 * std::log(u[0])) * std::cos(2.0 * std::numbers::pi * u[1]);
    }

    // Poisson(mean) by CDF inversion; mean is a per-cell intensity, so small.
    int poisson(std::uint32_t cell, std::uint32_t stream, double mean) const {
        const double u = uniforms(cell, stream)[0];
        double p = std::exp(-mean);
        double cdf = p;
        int k = 0;
        while (u > cdf && p > 0.0) {
            ++k;
            p *= mean / k;
            cdf += p;
        }
        return k;
    }

private:
    static double to_unit(std::uint32_t hi, std::uint32_t lo) {
        const std::uint64_t bits = ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 11;
        return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
    }

    std::array<std::uint32_t, 2> key_;
    std::uint32_t path_lo_;
    std::uint32_t path_hi_;
};

}  // namespace infodrift
