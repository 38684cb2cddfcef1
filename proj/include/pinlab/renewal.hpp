#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace pinlab {

// Slowly varying factor ell(t) of the inter-arrival mass p(t) = ell(t)/t^(1+alpha).
// Two families: Constant(c) and LogPower(c, beta) = c * (log(1+t))^beta.
struct EllSpec {
    enum class Kind { Constant, LogPower };

    Kind kind = Kind::Constant;
    double c = 1.0;
    double beta = 0.0;

    static EllSpec constant(double c) { return {Kind::Constant, c, 0.0}; }
    static EllSpec log_power(double c, double beta) { return {Kind::LogPower, c, beta}; }

    [[nodiscard]] double log_value(double t) const;
    [[nodiscard]] double value(double t) const;

    bool operator==(const EllSpec&) const = default;
};

// Normalized heavy-tailed inter-arrival distribution with log-domain mass
// cache. Immutable after construction; safe to share across threads.
class InterArrivalLaw {
public:
    InterArrivalLaw(double alpha, EllSpec ell, std::int64_t horizon, std::int64_t n_max);

    [[nodiscard]] double alpha() const { return alpha_; }
    [[nodiscard]] const EllSpec& ell() const { return ell_; }
    [[nodiscard]] std::int64_t horizon() const { return horizon_; }
    [[nodiscard]] std::int64_t n_max() const { return n_max_; }
    [[nodiscard]] double norm_constant() const { return norm_constant_; }

    // Mass assigned past the horizon by the analytic tail estimate, and a
    // bound on the relative error of that estimate (echoed into manifests).
    [[nodiscard]] double tail_mass() const { return tail_mass_; }
    [[nodiscard]] double normalization_error() const { return normalization_error_; }

    // log p(t) from the cache; t must be in [1, n_max].
    [[nodiscard]] double log_mass(std::int64_t t) const;

    // log p(t) from the family formula, any t >= 1.
    [[nodiscard]] double log_mass_analytic(std::int64_t t) const;

    // Smallest xi >= 1 with p(s+t) <= xi * min(s,t)^xi * p(s) p(t) for all
    // s,t <= t_max and p(t) >= (1+t)^(-xi) for all t <= t_max.
    [[nodiscard]] double xi_bound(std::int64_t t_max) const;

    // Root b of sum_t p(t) exp(-b t) = exp(-h); the homogeneous-model free
    // energy. Returns 0 for h <= 0.
    [[nodiscard]] double pure_free_energy(double h) const;

private:
    double alpha_;
    EllSpec ell_;
    std::int64_t horizon_;
    std::int64_t n_max_;
    double log_norm_constant_ = 0.0;
    double norm_constant_ = 0.0;
    double tail_mass_ = 0.0;
    double normalization_error_ = 0.0;
    std::vector<double> log_mass_cache_;

    [[nodiscard]] double mass_sum_tilted(double b) const;  // sum_t p(t) exp(-b t)
};

}  // namespace pinlab
