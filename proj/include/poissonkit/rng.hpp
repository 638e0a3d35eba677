#pragma once

#include <cstdint>
#include <cmath>

namespace poissonkit {

// splitmix64; used both as a mixer for counter-based stream derivation and
// as the per-sample generator.
struct SplitMix64 {
    std::uint64_t state;

    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // uniform in [lo, hi)
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Knuth's product-of-uniforms sampler; fine for the lambdas used here.
    int poisson(double lambda) {
        if (lambda <= 0) return 0;
        double limit = std::exp(-lambda);
        double p = 1.0;
        int k = 0;
        do {
            ++k;
            p *= uniform01();
        } while (p > limit);
        return k - 1;
    }
};

// Per-sample stream: sample i is fully determined by (master_seed, i), so any
// partition of samples across workers reproduces identical draws.
inline SplitMix64 sample_stream(std::uint64_t master_seed, std::uint64_t index) {
    SplitMix64 mixer(master_seed ^ (0x9E3779B97F4A7C15ull * (index + 1)));
    std::uint64_t s = mixer.next();
    s ^= mixer.next() << 1;
    return SplitMix64(s);
}

}  // namespace poissonkit
