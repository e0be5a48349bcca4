#pragma once

#include <cmath>
#include <cstdint>

#include "core.hpp"

namespace hwm {

// Counter-based generator: draw i is splitmix64's output function applied to
// seed + (i+1)*golden. Any language with 64-bit unsigned wraparound can
// reproduce the stream from (seed, counter) alone.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed, std::uint64_t counter = 0) : seed_(seed), ctr_(counter) {}

    static std::uint64_t mix(std::uint64_t seed, std::uint64_t i) {
        std::uint64_t z = seed + (i + 1) * 0x9E3779B97F4A7C15ULL;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t next_u64() { return mix(seed_, ctr_++); }

    // uniform in [0, 1)
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    // Box-Muller, one normal per two uniforms (no cached spare, keeps the stream stateless)
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * pi * u2);
    }

    cplx cnormal() { return {normal(), normal()}; }

    // uniform in the disk of radius r
    cplx disk(double r) {
        double rho = r * std::sqrt(uniform());
        double phi = 2.0 * pi * uniform();
        return std::polar(rho, phi);
    }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t counter() const { return ctr_; }

    // independent substream for a named sub-task
    CounterRng fork(std::uint64_t tag) const { return CounterRng(mix(seed_, ~tag), 0); }

private:
    std::uint64_t seed_;
    std::uint64_t ctr_;
};

} // namespace hwm
