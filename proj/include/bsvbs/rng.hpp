#pragma once

#include <cstdint>
#include <algorithm>

namespace bsvbs {

// SplitMix64 (Vigna). Fixed constants, 64-bit state, one output per step.
// Chosen over std::mt19937 so that draw sequences are reproducible from the
// documented algorithm alone, independent of standard-library internals.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1), 53 mantissa bits.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    // Inclusive integer range.
    int uniform_int(int lo, int hi) {
        const int n = hi - lo + 1;
        const int k = static_cast<int>(next_double() * n);
        return lo + std::min(k, n - 1);
    }

    std::uint64_t state() const { return state_; }

private:
    std::uint64_t state_;
};

// SplitMix64 output mix as a standalone scramble.
inline std::uint64_t mix64(std::uint64_t x) {
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

// Derives an independent stream from (seed, tag). Used to give the
// environment and each learner their own generators per run seed, so adding
// or removing one consumer never shifts another's draw sequence.
inline SplitMix64 substream(std::uint64_t seed, std::uint64_t tag) {
    return SplitMix64(mix64(seed + 0x9E3779B97F4A7C15ull * (tag + 1)));
}

} // namespace bsvbs
