#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace pinlab {

// SplitMix64 step, used to decorrelate nearby seed values.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Disjoint per-replica seed streams: a counter scheme on top of the base
// seed. Same (base, stream) always yields the same derived seed.
inline std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t stream) {
    std::uint64_t s = base_seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    return splitmix64(s);
}

// Deterministic RNG. Uniform doubles come from explicit bit manipulation of
// mt19937_64 output and normals from the Marsaglia polar method, so the
// stream does not depend on the standard library's distribution
// implementations. Reproducible per platform (libm rounding may differ
// across platforms).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    double uniform01() {
        // 53-bit mantissa in [0, 1)
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform01() - 1.0;
            v = 2.0 * uniform01() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        have_spare_ = true;
        return u * f;
    }

    std::uint64_t raw() { return eng_(); }

private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace pinlab
