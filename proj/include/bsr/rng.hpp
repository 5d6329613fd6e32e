#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace bsr {

/// Seedable random generator used throughout the library.
///
/// All draw algorithms are written out explicitly (no std distributions), so a
/// given seed produces the same stream on every platform and build. Parallel
/// work derives independent streams with stream_seed(master, index).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1) with 53-bit resolution.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform on [a, b).
    double uniform(double a, double b) { return a + uniform() * (b - a); }

    /// Standard normal via Box-Muller; two uniforms per draw, no cached state.
    double normal() {
        const double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    /// Uniform integer on {lo, ..., hi}, unbiased (masked rejection).
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        const std::uint64_t range = static_cast<std::uint64_t>(hi - lo) + 1;
        if (range <= 1) return lo;
        std::uint64_t mask = ~std::uint64_t{0};
        mask >>= __builtin_clzll(range - 1) == 64 ? 63 : __builtin_clzll(range - 1);
        std::uint64_t v;
        do {
            v = engine_() & mask;
        } while (v >= range);
        return lo + static_cast<std::int64_t>(v);
    }

private:
    std::mt19937_64 engine_;
};

/// SplitMix64 finalizer; the documented 64-bit mix behind stream derivation.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// Derives the seed of substream `index` from a master seed:
/// two SplitMix64 rounds over (master XOR (index+1)*golden-ratio-increment).
/// Streams for distinct indices are decorrelated and scheduling-independent.
inline std::uint64_t stream_seed(std::uint64_t master, std::uint64_t index) {
    return splitmix64(splitmix64(master ^ ((index + 1) * 0x9E3779B97F4A7C15ull)));
}

}  // namespace bsr
