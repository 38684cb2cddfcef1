#include "pinlab/renewal.hpp"

#include <algorithm>
#include <cmath>

#include "pinlab/errors.hpp"
#include "pinlab/logsumexp.hpp"

namespace pinlab {

double EllSpec::log_value(double t) const {
    switch (kind) {
        case Kind::Constant:
            return std::log(c);
        case Kind::LogPower:
            return std::log(c) + beta * std::log(std::log1p(t));
    }
    return 0.0;
}

double EllSpec::value(double t) const { return std::exp(log_value(t)); }

namespace {

bool series_summable(double alpha, const EllSpec& ell) {
    if (alpha > 0.0) return true;
    // alpha == 0 needs sum ell(t)/t < inf, which holds for LogPower with beta < -1
    return ell.kind == EllSpec::Kind::LogPower && ell.beta < -1.0;
}

// Analytic estimate of sum_{t > T} ell(t)/t^(1+alpha), with ell frozen at
// ell(T) for alpha > 0. Integration starts at T + 1/2 (midpoint rule).
double tail_estimate(double alpha, const EllSpec& ell, double T) {
    if (alpha > 0.0) {
        return ell.value(T) * std::pow(T + 0.5, -alpha) / alpha;
    }
    // alpha == 0, LogPower beta < -1: substitute u = log(1+x)
    const double u0 = std::log1p(T + 0.5);
    return ell.c * std::pow(u0, ell.beta + 1.0) / (-(ell.beta + 1.0));
}

}  // namespace

InterArrivalLaw::InterArrivalLaw(double alpha, EllSpec ell, std::int64_t horizon,
                                 std::int64_t n_max)
    : alpha_(alpha), ell_(ell), horizon_(horizon), n_max_(n_max) {
    if (alpha < 0.0) throw ValidationError("InterArrivalLaw: alpha must be >= 0");
    if (ell.c <= 0.0) throw ValidationError("InterArrivalLaw: ell scale must be positive");
    if (n_max < 1) throw ValidationError("InterArrivalLaw: n_max must be >= 1");
    if (horizon < n_max) throw InvalidHorizonError("InterArrivalLaw: horizon < n_max");
    if (!series_summable(alpha, ell))
        throw NonSummableError("InterArrivalLaw: sum of ell(t)/t^(1+alpha) diverges");

    // Unnormalized masses summed from the horizon down (ascending magnitude).
    KahanSum sum;
    for (std::int64_t t = horizon; t >= 1; --t) {
        const double td = static_cast<double>(t);
        sum.add(ell_.value(td) * std::pow(td, -(1.0 + alpha_)));
    }
    const double tail = tail_estimate(alpha_, ell_, static_cast<double>(horizon));
    const double total = sum.value() + tail;
    log_norm_constant_ = -std::log(total);
    norm_constant_ = 1.0 / total;
    tail_mass_ = tail * norm_constant_;
    // One mass point at the horizon bounds the midpoint-rule error.
    normalization_error_ =
        ell_.value(static_cast<double>(horizon)) *
        std::pow(static_cast<double>(horizon), -(1.0 + alpha_)) * norm_constant_;

    log_mass_cache_.resize(static_cast<std::size_t>(n_max_));
    for (std::int64_t t = 1; t <= n_max_; ++t)
        log_mass_cache_[static_cast<std::size_t>(t - 1)] = log_mass_analytic(t);
}

double InterArrivalLaw::log_mass(std::int64_t t) const {
    if (t < 1 || t > n_max_)
        throw OutOfRangeError("InterArrivalLaw::log_mass: t outside cached range");
    return log_mass_cache_[static_cast<std::size_t>(t - 1)];
}

double InterArrivalLaw::log_mass_analytic(std::int64_t t) const {
    const double td = static_cast<double>(t);
    return log_norm_constant_ + ell_.log_value(td) - (1.0 + alpha_) * std::log(td);
}

double InterArrivalLaw::xi_bound(std::int64_t t_max) const {
    if (t_max < 1 || t_max > n_max_)
        throw OutOfRangeError("InterArrivalLaw::xi_bound: t_max outside cached range");

    std::vector<double> lp(static_cast<std::size_t>(2 * t_max + 1));
    for (std::int64_t t = 1; t <= 2 * t_max; ++t)
        lp[static_cast<std::size_t>(t)] = log_mass_analytic(t);

    // For each s = min(s,t), the worst log p(s+t) - log p(s) - log p(t) over t >= s.
    std::vector<double> worst(static_cast<std::size_t>(t_max + 1), kNegInf);
    for (std::int64_t s = 1; s <= t_max; ++s) {
        double w = kNegInf;
        for (std::int64_t t = s; t <= t_max; ++t) {
            const double d = lp[static_cast<std::size_t>(s + t)] -
                             lp[static_cast<std::size_t>(s)] - lp[static_cast<std::size_t>(t)];
            w = std::max(w, d);
        }
        worst[static_cast<std::size_t>(s)] = w;
    }

    auto feasible = [&](double xi) {
        const double log_xi = std::log(xi);
        for (std::int64_t s = 1; s <= t_max; ++s) {
            if (log_xi + xi * std::log(static_cast<double>(s)) <
                worst[static_cast<std::size_t>(s)])
                return false;
        }
        for (std::int64_t t = 1; t <= t_max; ++t) {
            if (lp[static_cast<std::size_t>(t)] < -xi * std::log1p(static_cast<double>(t)))
                return false;
        }
        return true;
    };

    double lo = 1.0;
    if (feasible(lo)) return lo;
    double hi = 2.0;
    while (!feasible(hi)) {
        hi *= 2.0;
        if (hi > 1e18) throw NoConvergenceError("xi_bound: no feasible xi found");
    }
    for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (lo + hi);
        (feasible(mid) ? hi : lo) = mid;
    }
    return hi;
}

double InterArrivalLaw::mass_sum_tilted(double b) const {
    KahanSum sum;
    for (std::int64_t t = 1; t <= horizon_; ++t) {
        const double x = log_mass_analytic(t) - b * static_cast<double>(t);
        sum.add(std::exp(x));
        // remaining mass is below exp(-b t), so the truncated part is negligible
        if (b * static_cast<double>(t) > 45.0) break;
    }
    return sum.value();
}

double InterArrivalLaw::pure_free_energy(double h) const {
    if (h <= 0.0) return 0.0;
    const double target = std::exp(-h);
    // phi(b) = sum p(t) e^{-bt} is decreasing, phi(0) = 1 - tail >= target
    // for reasonable h, and phi(h) <= e^{-h} since t >= 1. Root is in [0, h].
    double lo = 0.0, hi = h;
    if (mass_sum_tilted(hi) > target)
        throw NoConvergenceError("pure_free_energy: failed to bracket the root");
    for (int it = 0; it < 200 && hi - lo > 1e-17 * std::max(1.0, hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        (mass_sum_tilted(mid) > target ? lo : hi) = mid;
    }
    const double b = 0.5 * (lo + hi);
    if (std::abs(mass_sum_tilted(b) - target) > 1e-12)
        throw NoConvergenceError("pure_free_energy: residual above tolerance (horizon too small)");
    return b;
}

}  // namespace pinlab
