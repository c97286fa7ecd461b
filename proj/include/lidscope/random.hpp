#pragma once

// Project-wide pseudo random source.
//
// SplitMix64 is used in counter mode: the k-th output of a stream is
// mix(seed + (k + 1) * golden_gamma), a pure function of (seed, k). Streams
// can therefore be indexed directly, which keeps every seeded operation
// reproducible regardless of how work is split across threads.

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace lidscope {

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Seed for an independent child stream, e.g. one per sweep cell.
constexpr std::uint64_t derive_seed(std::uint64_t root, std::uint64_t index) noexcept {
    return mix64(root ^ mix64(index + 0x632BE59BD9B4E019ULL));
}

class CounterRng {
public:
    using result_type = std::uint64_t;

    constexpr explicit CounterRng(std::uint64_t seed, std::uint64_t counter = 0) noexcept
        : seed_(seed), counter_(counter) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    /// Random access into the stream; does not advance the counter.
    constexpr result_type at(std::uint64_t k) const noexcept {
        return mix64(seed_ + (k + 1) * kGoldenGamma);
    }

    constexpr result_type operator()() noexcept { return at(counter_++); }

    constexpr std::uint64_t counter() const noexcept { return counter_; }
    constexpr std::uint64_t seed() const noexcept { return seed_; }

private:
    std::uint64_t seed_;
    std::uint64_t counter_;
};

/// Uniform double in the open interval (0, 1) from 53 random bits.
constexpr double to_unit_open(std::uint64_t bits) noexcept {
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

/// Unbiased integer in [0, bound) (Lemire's multiply-and-reject). bound > 0.
inline std::uint64_t uniform_below(CounterRng& rng, std::uint64_t bound) noexcept {
    unsigned __int128 m = static_cast<unsigned __int128>(rng()) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
        const std::uint64_t threshold = (0 - bound) % bound;
        while (low < threshold) {
            m = static_cast<unsigned __int128>(rng()) * bound;
            low = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::uint64_t>(m >> 64);
}

/// Standard normal draw number k of the stream (Box-Muller on outputs 2k, 2k+1).
inline double standard_normal_at(const CounterRng& rng, std::uint64_t k) noexcept {
    const double u1 = to_unit_open(rng.at(2 * k));
    const double u2 = to_unit_open(rng.at(2 * k + 1));
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace lidscope
