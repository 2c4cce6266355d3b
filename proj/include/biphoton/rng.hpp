#pragma once
#include <cmath>
#include <cstdint>
#include <numbers>

namespace biphoton {

/// SplitMix64 stream with cheap keyed substreams. The generator is fixed
/// by this implementation, so identical (seed, substream) sequences are
/// reproducible across runs; substream k is independent of how many draws
/// other substreams consumed, which makes per-frame generation
/// order-independent under parallel execution.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    static Rng substream(std::uint64_t seed, std::uint64_t index) {
        // Mix the index through one splitmix round before keying the stream.
        Rng mixer(index * 0x9E3779B97F4A7C15ull + 0xD1B54A32D192ED03ull);
        return Rng(seed ^ mixer.next_u64());
    }

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ull;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform in (0, 1]; safe as a log argument.
    double uniform_open() { return double((next_u64() >> 11) + 1) * 0x1.0p-53; }

    /// Standard normal via Box-Muller; two uniforms per draw, no caching,
    /// so the draw count per sample is fixed.
    double normal() {
        const double u1 = uniform_open();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

private:
    std::uint64_t state_;
};

}  // namespace biphoton
