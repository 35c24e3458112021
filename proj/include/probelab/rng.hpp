// rng.hpp
#pragma once

#include <cstdint>
#include <random>

namespace probelab {

// splitmix64 finalizer. Bijective on 64-bit words, so chaining it with xor
// absorption gives distinct outputs whenever exactly one input word changes.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Per-trial random stream. mt19937_64 output is fully specified by the
// standard; variate generation elsewhere avoids std::*_distribution, whose
// algorithms are implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1), 53 random bits.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform01() < p; }

private:
    std::mt19937_64 engine_;
};

}  // namespace probelab
