#ifndef PDMP_RNG_HPP
#define PDMP_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace pdmp::rng {

// SplitMix64 step (Steele, Lea & Flood), used to expand a user seed into
// generator state. Replicate substreams are derived as seed ^ stream index
// and whitened through this before seeding, so neighboring indices give
// unrelated streams.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Reproducible random stream: identical (seed, stream) gives an identical
// sequence on every platform. All floating-point conversion is done here,
// not via std::uniform_real_distribution, whose output is unspecified.
class Stream {
public:
    explicit Stream(std::uint64_t seed, std::uint64_t stream = 0) {
        std::uint64_t s = seed ^ stream;
        splitmix64(s);
        gen_.seed(splitmix64(s));
    }

    std::uint64_t raw() { return gen_(); }

    // Uniform on the open interval (0, 1); never returns an endpoint.
    double uniform_open01() {
        return (static_cast<double>(raw() >> 11) + 0.5) * 0x1.0p-53;
    }

    double uniform(double a, double b) { return a + (b - a) * uniform_open01(); }

    // Box-Muller; consumes two uniforms per draw.
    double normal(double mean = 0.0, double sd = 1.0) {
        const double u1 = uniform_open01();
        const double u2 = uniform_open01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        return mean + sd * r * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

    // Gaussian conditioned on (lo, hi) by rejection. Intended for ranges
    // holding most of the mass (division ratios); not for far tails.
    double truncated_normal(double mean, double sd, double lo, double hi) {
        if (sd == 0.0) return mean;
        for (;;) {
            const double v = normal(mean, sd);
            if (v > lo && v < hi) return v;
        }
    }

private:
    std::mt19937_64 gen_;
};

} // namespace pdmp::rng

#endif
