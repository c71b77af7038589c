#pragma once

#include <cstdint>

namespace nthp {

// SplitMix64 (Steele, Lea, Flood 2014). The sequence is fully determined by
// the 64-bit state and plain integer ops; scenes and perturbations reproduce
// bit-for-bit on any platform.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform double in [0, 1), 53 mantissa bits.
    double next_unit() {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

    // Uniform integer in [0, n). Plain modulo; the slight bias is irrelevant
    // here and the result is identical everywhere.
    std::uint64_t next_below(std::uint64_t n) {
        return n == 0 ? 0 : next() % n;
    }

    // Uniform integer in [lo, hi], inclusive.
    std::int64_t next_in(std::int64_t lo, std::int64_t hi) {
        if (hi <= lo) return lo;
        return lo + static_cast<std::int64_t>(next_below(static_cast<std::uint64_t>(hi - lo + 1)));
    }

private:
    std::uint64_t state_;
};

// Derives an independent stream seed from a master seed, used to split
// per-scene and per-purpose generators.
inline std::uint64_t split_seed(std::uint64_t seed, std::uint64_t stream) {
    SplitMix64 g(seed ^ (0x6A09E667F3BCC909ULL + stream * 0x9E3779B97F4A7C15ULL));
    return g.next();
}

} // namespace nthp
