#pragma once

#include <cstdint>

namespace hazelab {

// SplitMix64 generator. Chosen over <random> engines because it is pure
// uint64 arithmetic with a fixed float conversion, so every draw is
// bit-identical across platforms and standard libraries, and independent
// streams can be derived cheaply (one stream per scene / per training step).
class SplitMix64 {
public:
    explicit SplitMix64(uint64_t seed) : state_(seed), seed_(seed) {}

    uint64_t next_u64() {
        uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1) with 53 random mantissa bits.
    double next_double() { return double(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }
    float uniform_f(float lo, float hi) { return float(uniform(lo, hi)); }

    // Bounded integer draw; bias is negligible for the small ranges used here.
    uint64_t next_below(uint64_t n) { return next_u64() % n; }

    // Derive the generator for sub-stream `index`. Splitting always starts
    // from the original seed, so split(i) does not depend on how many values
    // were drawn from this generator.
    SplitMix64 split(uint64_t index) const {
        uint64_t z = seed_ ^ (0x9E3779B97F4A7C15ull * (index + 1));
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return SplitMix64(z ^ (z >> 31));
    }

    uint64_t seed() const { return seed_; }

private:
    uint64_t state_;
    uint64_t seed_;
};

}  // namespace hazelab
