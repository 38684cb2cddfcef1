#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "pinlab/covariance.hpp"
#include "pinlab/estimators.hpp"
#include "pinlab/renewal.hpp"

namespace pinlab {

// One falsifiable desk-scale check: a statistic, its threshold, the declared
// comparison direction, and free-form evidence rows.
struct CheckReport {
    std::string check_name;
    nlohmann::json params;
    double statistic = 0.0;
    double threshold = 0.0;
    std::string direction;  // how statistic relates to threshold when passing
    bool passed = false;
    nlohmann::json rows = nlohmann::json::array();

    [[nodiscard]] nlohmann::json to_json() const;
};

// The decay checks compare against two rate references. The matched
// estimate is mu_hat at a size comparable to the systems under test, so both
// sides carry the same finite-size effects; the slope estimate is the
// log-mean slope across two small sizes where the heavy-tailed replica mean
// is fully resolved, which tracks the asymptotic rate.
struct MuRefOptions {
    std::int64_t matched_n = 1024;
    std::int64_t matched_replicas = 400;
    std::int64_t slope_small = 8;
    std::int64_t slope_large = 24;
    std::int64_t slope_replicas = 200000;
    int slope_repeats = 8;
};

// |log E[1/Z^-]| difference between a covariance and its truncation stays
// below the entrywise matrix bound.
CheckReport check_comparison_lemma(const InterArrivalLaw& law, double h, std::int64_t n,
                                   const CovarianceSpec& spec, std::int64_t r,
                                   std::int64_t replicas, std::uint64_t seed);

// Disorder-averaged endpoint mass decays exponentially with the fitted rate
// near the gap-rate reference.
CheckReport check_endpoint_decay(const InterArrivalLaw& law, const CovarianceSpec& spec, double h,
                                 const std::vector<std::int64_t>& n_list, std::int64_t replicas,
                                 std::uint64_t seed, bool expect_localized = true,
                                 MuRefOptions mu_opts = {});

// Normalized Gibbs pair covariance decays exponentially in the lag.
// statistic = fitted slope, so the decay rate estimate is -statistic.
CheckReport check_gibbs_decay(const InterArrivalLaw& law, const CovarianceSpec& spec, double h,
                              std::int64_t n, std::int64_t replicas, std::uint64_t seed);

// Two independent paths in the same environment share a contact except with
// probability exponentially small in n.
CheckReport check_replica_decoupling(const InterArrivalLaw& law, const CovarianceSpec& spec,
                                     double h, const std::vector<std::int64_t>& n_list,
                                     std::int64_t replicas, std::int64_t paths_per_replica,
                                     std::uint64_t seed);

// Largest gap over log n concentrates near the reciprocal gap rate.
CheckReport check_largest_gap(const InterArrivalLaw& law, const CovarianceSpec& spec, double h,
                              const std::vector<std::int64_t>& n_list, std::int64_t replicas,
                              std::int64_t paths, std::uint64_t seed, MuRefOptions mu_opts = {},
                              std::int64_t cutoff = 0);

// Sampled contact counts, standardized by the exact per-environment mean and
// the global variance estimate, are close to standard normal per
// Kolmogorov-Smirnov.
CheckReport check_clt(const InterArrivalLaw& law, const CovarianceSpec& spec, double h,
                      std::int64_t n, std::int64_t omega_replicas, std::int64_t paths_per_omega,
                      std::uint64_t seed);

// Empirical tails of log Z against the Gaussian-Lipschitz bound.
CheckReport check_concentration(const InterArrivalLaw& law, const CovarianceSpec& spec, double h,
                                std::int64_t n, std::int64_t replicas, std::uint64_t seed);

// Block decoupling inequality E[prod phi_i] <= prod ||phi_i||_kappa with
// kappa = 2 gamma_bar / lambda_min.
CheckReport check_hypercontractivity(const CovarianceSpec& spec, std::int64_t n,
                                     int block_count, std::int64_t replicas, std::uint64_t seed);

// mu_hat <= f_hat, equivalence of their positivity, and 1-Lipschitz steps.
CheckReport check_mu_sandwich(const InterArrivalLaw& law, const CovarianceSpec& spec,
                              const std::vector<double>& h_grid, std::int64_t n,
                              std::int64_t replicas, std::uint64_t seed);

// The double convolution of exponential-polynomial-exponential sequences
// stays bounded after polynomial renormalization.
CheckReport check_convolution_decay(double eps, double a, double a_prime, std::int64_t k_max);

// Centering-term variance rate stabilizes between two sizes, is positive for
// invertible covariance, and environment-measure covariances of contact
// marginals obey the kernel-smoothed bound.
CheckReport check_centering_variance(const InterArrivalLaw& law, const CovarianceSpec& spec,
                                     double h, std::int64_t n, std::int64_t replicas,
                                     double eps_hat, std::uint64_t seed);

}  // namespace pinlab
