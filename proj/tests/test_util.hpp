#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "pinlab/logsumexp.hpp"
#include "pinlab/renewal.hpp"

namespace pinlab::test {

// Laws are immutable and expensive to normalize at large horizons, so the
// test binaries share one instance per tail exponent.
inline const InterArrivalLaw& law_alpha(double alpha) {
    static const InterArrivalLaw half(0.5, EllSpec::constant(1.0), 1000000, 8192);
    static const InterArrivalLaw one(1.0, EllSpec::constant(1.0), 1000000, 8192);
    static const InterArrivalLaw three_half(1.5, EllSpec::constant(1.0), 1000000, 8192);
    if (alpha == 0.5) return half;
    if (alpha == 1.5) return three_half;
    return one;
}

// Exhaustive E[X_a X_b] for tiny systems; independent of the DP code path.
inline double enumerate_pair_mean(const InterArrivalLaw& law, const std::vector<double>& omega,
                                  double h, std::int64_t a, std::int64_t b) {
    const std::int64_t n = static_cast<std::int64_t>(omega.size());
    const std::uint64_t count = 1ULL << (n - 1);
    LogSumExp z, hit;
    for (std::uint64_t mask = 0; mask < count; ++mask) {
        double logw = 0.0;
        std::int64_t prev = 0;
        bool has_a = false, has_b = false;
        for (std::int64_t i = 1; i <= n; ++i) {
            const bool on = (i == n) || (mask & (1ULL << (i - 1)));
            if (!on) continue;
            logw += law.log_mass(i - prev) + h + omega[static_cast<std::size_t>(i - 1)];
            prev = i;
            if (i == a) has_a = true;
            if (i == b) has_b = true;
        }
        z.add(logw);
        if (has_a && has_b) hit.add(logw);
    }
    return std::exp(hit.value() - z.value());
}

}  // namespace pinlab::test
