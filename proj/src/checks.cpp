#include "pinlab/checks.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "pinlab/errors.hpp"
#include "pinlab/logsumexp.hpp"
#include "pinlab/parallel.hpp"
#include "pinlab/rng.hpp"
#include "pinlab/stats.hpp"
#include "pinlab/thresholds.hpp"

namespace pinlab {

using nlohmann::json;

nlohmann::json CheckReport::to_json() const {
    return json{{"check_name", check_name}, {"params", params},       {"statistic", statistic},
                {"threshold", threshold},   {"direction", direction}, {"passed", passed},
                {"rows", rows}};
}

namespace {

json spec_json(const CovarianceSpec& spec) {
    return json{{"label", spec.label()}, {"gamma_bar", spec.gamma_bar()}};
}

double log_mean_exp(const std::vector<double>& xs) {
    LogSumExp acc;
    for (double x : xs) acc.add(x);
    return acc.value() - std::log(static_cast<double>(xs.size()));
}

// delta-method standard error of log(mean exp(x_r))
double log_mean_exp_se(const std::vector<double>& xs) {
    const double r = static_cast<double>(xs.size());
    LogSumExp acc1, acc2;
    for (double x : xs) {
        acc1.add(x);
        acc2.add(2.0 * x);
    }
    const double log_mean = acc1.value() - std::log(r);
    const double log_m2 = acc2.value() - std::log(r);
    const double gap = 2.0 * log_mean - log_m2;
    if (gap >= -1e-15) return 0.0;
    const double log_var = log_m2 + std::log1p(-std::exp(gap));
    return std::exp(0.5 * (log_var - std::log(r)) - log_mean);
}

// The localized-phase checks are only meaningful when the free energy is
// positive at the requested h; gate on a cheap estimate.
void require_localized(const InterArrivalLaw& law, const CovarianceSpec& spec, double h,
                       std::uint64_t seed, const char* who) {
    const auto f = free_energy(law, spec, h, 256, 30, derive_seed(seed, 0xF0F0));
    if (!(f.replica_mean.point > thresholds::kSigmaGate * f.replica_mean.std_error &&
          f.replica_mean.point > 0.0))
        throw ValidationError(std::string(who) + ": h is not in the localized phase");
}

double binomial_se(double p, double count) {
    return std::sqrt(std::max(p * (1.0 - p), 0.0) / count);
}

std::vector<double> neg_log_zminus(const InterArrivalLaw& law, const CovarianceSpec& spec,
                                   double h, std::int64_t n, std::int64_t replicas,
                                   std::uint64_t seed) {
    DisorderSampler sampler(spec, n);
    WorkspaceOptions opts;
    opts.backward = false;
    return per_replica(
        law, sampler, replicas, seed,
        [](const PolymerWorkspace& ws) { return -ws.log_partition_minus(); }, h, opts);
}

double matched_rate_reference(const InterArrivalLaw& law, const CovarianceSpec& spec, double h,
                              const MuRefOptions& opts, std::uint64_t seed) {
    return mu_hat(law, spec, h, opts.matched_n, opts.matched_replicas, derive_seed(seed, 0x3ACE))
        .record.point;
}

double slope_rate_reference(const InterArrivalLaw& law, const CovarianceSpec& spec, double h,
                            const MuRefOptions& opts, std::uint64_t seed) {
    return mu_reference(law, spec, h, opts.slope_small, opts.slope_large, opts.slope_replicas,
                        derive_seed(seed, 0x51073), opts.slope_repeats);
}

}  // namespace

CheckReport check_comparison_lemma(const InterArrivalLaw& law, double h, std::int64_t n,
                                   const CovarianceSpec& spec, std::int64_t r,
                                   std::int64_t replicas, std::uint64_t seed) {
    if (n > 12) throw ValidationError("check_comparison_lemma: n must be <= 12");
    const CovarianceSpec truncated = spec.truncate(r);

    const std::vector<double> side_a = neg_log_zminus(law, spec, h, n, replicas, seed);
    const std::vector<double> side_b =
        neg_log_zminus(law, truncated, h, n, replicas, derive_seed(seed, 0xB));
    const double lm_a = log_mean_exp(side_a), lm_b = log_mean_exp(side_b);
    const double se = std::hypot(log_mean_exp_se(side_a), log_mean_exp_se(side_b));

    // sum_{i,j} |Gamma_{ij} - Gamma'_{ij}|: the diagonal moves by twice the
    // absolute tail, entries with |i-j| in 1..r match, the rest lose gamma_k.
    const double tail = spec.tail_abs_sum(r);
    double bound = static_cast<double>(n) * 2.0 * tail;
    for (std::int64_t k = r + 1; k < n; ++k)
        bound += 2.0 * static_cast<double>(n - k) * std::abs(spec.gamma(k));

    const double diff = std::abs(lm_a - lm_b);
    CheckReport rep;
    rep.check_name = "comparison_lemma";
    rep.params = json{{"h", h},           {"n", n}, {"spec", spec_json(spec)},
                      {"r", r},           {"replicas", replicas},
                      {"seed", seed}};
    rep.statistic = diff;
    rep.threshold = bound + thresholds::kSigmaGateWide * se;
    rep.direction = "statistic <= threshold";
    rep.passed = diff <= rep.threshold;
    rep.rows.push_back(json{{"log_mean_full", lm_a},
                            {"log_mean_truncated", lm_b},
                            {"matrix_bound", bound},
                            {"combined_se", se},
                            {"slack", rep.threshold - diff}});
    // single-interval form: per-site difference against 2 sum_k |gamma - gamma_r|
    const double per_site_bound = 6.0 * tail;
    rep.rows.push_back(
        json{{"per_site_diff", diff / static_cast<double>(n)},
             {"per_site_bound", per_site_bound},
             {"per_site_ok",
              diff / static_cast<double>(n) <=
                  per_site_bound + thresholds::kSigmaGateWide * se / static_cast<double>(n)}});
    return rep;
}

CheckReport check_endpoint_decay(const InterArrivalLaw& law, const CovarianceSpec& spec, double h,
                                 const std::vector<std::int64_t>& n_list, std::int64_t replicas,
                                 std::uint64_t seed, bool expect_localized, MuRefOptions mu_opts) {
    if (n_list.size() < 4) throw ValidationError("check_endpoint_decay: need at least 4 sizes");
    if (expect_localized) require_localized(law, spec, h, seed, "check_endpoint_decay");

    CheckReport rep;
    rep.check_name = "endpoint_decay";
    rep.params = json{{"h", h},
                      {"n_list", n_list},
                      {"replicas", replicas},
                      {"spec", spec_json(spec)},
                      {"expect_localized", expect_localized},
                      {"seed", seed}};

    std::vector<double> xs, xs_log, ys;
    for (std::size_t k = 0; k < n_list.size(); ++k) {
        const std::int64_t n = n_list[k];
        // endpoint mass is p(n)/Z^-: the log p(n) offset is deterministic
        const std::vector<double> nlzm =
            neg_log_zminus(law, spec, h, n, replicas, derive_seed(seed, k));
        const double log_mean_endpoint = law.log_mass(n) + log_mean_exp(nlzm);
        xs.push_back(static_cast<double>(n));
        xs_log.push_back(std::log(static_cast<double>(n)));
        ys.push_back(log_mean_endpoint);
        rep.rows.push_back(json{{"n", n}, {"log_mean_endpoint", log_mean_endpoint}});
    }

    const LinearFit fit_exp = fit_line(xs, ys);
    const LinearFit fit_poly = fit_line(xs_log, ys);
    const bool exponential_preferred = fit_exp.r_squared >= fit_poly.r_squared;

    rep.statistic = fit_exp.slope;
    rep.rows.push_back(json{{"fit_slope", fit_exp.slope},
                            {"fit_r2", fit_exp.r_squared},
                            {"poly_fit_slope", fit_poly.slope},
                            {"poly_fit_r2", fit_poly.r_squared},
                            {"model", exponential_preferred ? "exponential" : "polynomial"}});

    if (!expect_localized) {
        // delocalized regime: the check passes when the exponential model is rejected
        rep.direction = "polynomial fit preferred over exponential";
        rep.threshold = 0.0;
        rep.passed = !exponential_preferred;
        if (!exponential_preferred)
            rep.rows.push_back(json{{"note", "exponential fit rejected"}});
        return rep;
    }

    const double mu_ref = matched_rate_reference(law, spec, h, mu_opts, seed);
    const double mu_slope = slope_rate_reference(law, spec, h, mu_opts, seed);
    const double rate = -fit_exp.slope;
    rep.threshold = -0.0;
    rep.direction = "slope < 0, R^2 >= gate, rate within factor 2 of mu_hat";
    rep.passed = fit_exp.slope < 0.0 && fit_exp.r_squared >= thresholds::kR2Gate &&
                 rate >= mu_ref / thresholds::kRateFactorGate &&
                 rate <= mu_ref * thresholds::kRateFactorGate;
    rep.rows.push_back(json{{"rate", rate},
                            {"mu_ref", mu_ref},
                            {"ratio", rate / mu_ref},
                            {"mu_slope_reference", mu_slope}});
    return rep;
}

CheckReport check_gibbs_decay(const InterArrivalLaw& law, const CovarianceSpec& spec, double h,
                              std::int64_t n, std::int64_t replicas, std::uint64_t seed) {
    require_localized(law, spec, h, seed, "check_gibbs_decay");
    const std::int64_t a = n / 2;
    std::vector<std::int64_t> lags;
    for (std::int64_t d = 2; d <= 40; d += 2) lags.push_back(d);
    if (a + lags.back() >= n)
        throw ValidationError("check_gibbs_decay: n too small for the lag window");

    DisorderSampler sampler(spec, n);
    std::vector<std::vector<double>> ratios(lags.size(),
                                            std::vector<double>(static_cast<std::size_t>(replicas)));
    parallel_for(replicas, [&](std::int64_t rep_idx) {
        const DisorderSample omega =
            sampler.sample(derive_seed(seed, static_cast<std::uint64_t>(rep_idx)));
        const PolymerWorkspace ws = build_workspace(law, omega, h);
        for (std::size_t k = 0; k < lags.size(); ++k) {
            const std::int64_t b = a + lags[k];
            const double cov = ws.pair_covariance(a, b);
            const double floor = std::min(ws.contact_marginal(a), ws.contact_marginal(b));
            ratios[k][static_cast<std::size_t>(rep_idx)] = std::abs(cov) / floor;
        }
    });

    CheckReport rep;
    rep.check_name = "gibbs_decay";
    rep.params = json{{"h", h},
                      {"n", n},
                      {"replicas", replicas},
                      {"spec", spec_json(spec)},
                      {"seed", seed},
                      {"numeric_floor", thresholds::kCovarianceNumericFloor}};

    std::vector<double> xs, ys;
    for (std::size_t k = 0; k < lags.size(); ++k) {
        const MeanVar acc = accumulate(ratios[k]);
        const bool usable = acc.mean() > thresholds::kCovarianceNumericFloor;
        if (usable) {
            xs.push_back(static_cast<double>(lags[k]));
            ys.push_back(std::log(acc.mean()));
        }
        rep.rows.push_back(json{{"lag", lags[k]},
                                {"mean_ratio", acc.mean()},
                                {"std_error", acc.std_error()},
                                {"used_in_fit", usable}});
    }
    if (xs.size() < 5)
        throw ValidationError("check_gibbs_decay: too few lags above the numeric floor");

    const LinearFit fit = fit_line(xs, ys);
    rep.statistic = fit.slope;
    rep.threshold = 0.0;
    rep.direction = "slope < 0 with R^2 >= gate";
    rep.passed = fit.slope < 0.0 && fit.r_squared >= thresholds::kR2Gate;
    rep.rows.push_back(json{{"fit_slope", fit.slope},
                            {"fit_r2", fit.r_squared},
                            {"eps_hat", -fit.slope},
                            {"lags_used", xs.size()}});
    return rep;
}

CheckReport check_replica_decoupling(const InterArrivalLaw& law, const CovarianceSpec& spec,
                                     double h, const std::vector<std::int64_t>& n_list,
                                     std::int64_t replicas, std::int64_t paths_per_replica,
                                     std::uint64_t seed) {
    require_localized(law, spec, h, seed, "check_replica_decoupling");
    CheckReport rep;
    rep.check_name = "replica_decoupling";
    rep.params = json{{"h", h},
                      {"n_list", n_list},
                      {"replicas", replicas},
                      {"paths_per_replica", paths_per_replica},
                      {"spec", spec_json(spec)},
                      {"seed", seed}};

    WorkspaceOptions opts;
    opts.backward = false;
    std::vector<double> xs, ys;
    for (std::size_t k = 0; k < n_list.size(); ++k) {
        const std::int64_t n = n_list[k];
        DisorderSampler sampler(spec, n);
        std::vector<double> frac(static_cast<std::size_t>(replicas));
        parallel_for(replicas, [&](std::int64_t r) {
            const DisorderSample omega =
                sampler.sample(derive_seed(seed, (k << 32) + static_cast<std::uint64_t>(r)));
            const PolymerWorkspace ws = build_workspace(law, omega, h, opts);
            std::int64_t misses = 0;
            std::vector<char> hit(static_cast<std::size_t>(n), 0);
            for (std::int64_t p = 0; p < paths_per_replica; ++p) {
                const std::uint64_t ps = derive_seed(seed ^ 0x5151, (k << 40) +
                                                                        (static_cast<std::uint64_t>(r) << 16) +
                                                                        static_cast<std::uint64_t>(p));
                const PathSample one = ws.sample_path(ps);
                const PathSample two = ws.sample_path(derive_seed(ps, 1));
                std::fill(hit.begin(), hit.end(), 0);
                for (const std::int64_t pt : one.renewal_points)
                    if (pt < n) hit[static_cast<std::size_t>(pt)] = 1;
                bool common = false;
                for (const std::int64_t pt : two.renewal_points)
                    if (pt < n && hit[static_cast<std::size_t>(pt)]) {
                        common = true;
                        break;
                    }
                if (!common) ++misses;
            }
            frac[static_cast<std::size_t>(r)] =
                static_cast<double>(misses) / static_cast<double>(paths_per_replica);
        });
        const MeanVar acc = accumulate(frac);
        rep.rows.push_back(
            json{{"n", n}, {"mean_no_common_contact", acc.mean()}, {"std_error", acc.std_error()}});
        if (acc.mean() > 0.0) {
            xs.push_back(static_cast<double>(n));
            ys.push_back(std::log(acc.mean()));
        }
    }
    if (xs.size() < 3)
        throw ValidationError("check_replica_decoupling: too few sizes with nonzero estimates");
    const LinearFit fit = fit_line(xs, ys);
    rep.statistic = fit.slope;
    rep.threshold = 0.0;
    rep.direction = "slope < 0 with R^2 >= gate";
    rep.passed = fit.slope < 0.0 && fit.r_squared >= thresholds::kR2Gate;
    rep.rows.push_back(json{{"fit_slope", fit.slope}, {"fit_r2", fit.r_squared}});
    return rep;
}

CheckReport check_largest_gap(const InterArrivalLaw& law, const CovarianceSpec& spec, double h,
                              const std::vector<std::int64_t>& n_list, std::int64_t replicas,
                              std::int64_t paths, std::uint64_t seed, MuRefOptions mu_opts,
                              std::int64_t cutoff) {
    require_localized(law, spec, h, seed, "check_largest_gap");
    // Two rate references: the size-matched mu_hat gates the median window
    // (both sides carry matching finite-size effects), while the resolved
    // small-size slope gates the convergence trend and the upper-tail
    // threshold (those clauses compare against the asymptotic rate).
    const double mu_matched = matched_rate_reference(law, spec, h, mu_opts, seed);
    const double mu_slope = slope_rate_reference(law, spec, h, mu_opts, seed);
    const double target = 1.0 / mu_matched;
    const double target_asym = 1.0 / mu_slope;

    CheckReport rep;
    rep.check_name = "largest_gap";
    rep.params = json{{"h", h},
                      {"n_list", n_list},
                      {"replicas", replicas},
                      {"paths", paths},
                      {"spec", spec_json(spec)},
                      {"mu_matched", mu_matched},
                      {"mu_slope", mu_slope},
                      {"invertible_certificate", spec.invertible_certificate()},
                      {"approximate", cutoff > 0},
                      {"seed", seed}};

    WorkspaceOptions opts;
    opts.backward = false;
    opts.cutoff = cutoff;
    std::vector<double> medians, tail_freqs, devs;
    for (std::size_t k = 0; k < n_list.size(); ++k) {
        const std::int64_t n = n_list[k];
        const double log_n = std::log(static_cast<double>(n));
        DisorderSampler sampler(spec, n);
        std::vector<double> ratio(static_cast<std::size_t>(replicas * paths));
        parallel_for(replicas, [&](std::int64_t r) {
            const DisorderSample omega =
                sampler.sample(derive_seed(seed, (k << 32) + static_cast<std::uint64_t>(r)));
            const PolymerWorkspace ws = build_workspace(law, omega, h, opts);
            for (std::int64_t p = 0; p < paths; ++p) {
                const PathSample path = ws.sample_path(
                    derive_seed(seed ^ 0x9A9A, (k << 40) +
                                                   (static_cast<std::uint64_t>(r) << 16) +
                                                   static_cast<std::uint64_t>(p)));
                ratio[static_cast<std::size_t>(r * paths + p)] =
                    static_cast<double>(path.max_gap) / log_n;
            }
        });
        const double med = median(ratio);
        double tail_count = 0.0;
        for (double x : ratio)
            if (x >= 1.5 * target_asym) tail_count += 1.0;
        const double tail_freq = tail_count / static_cast<double>(ratio.size());
        medians.push_back(med);
        tail_freqs.push_back(tail_freq);
        devs.push_back(std::abs(med - target_asym));
        rep.rows.push_back(json{{"n", n},
                                {"median_ratio", med},
                                {"median_times_mu", med * mu_matched},
                                {"deviation_from_asym_target", std::abs(med - target_asym)},
                                {"upper_tail_freq", tail_freq}});
    }

    const double med_last = medians.back();
    const bool window_ok = med_last >= thresholds::kGapMedianLo * target &&
                           med_last <= thresholds::kGapMedianHi * target;
    const bool trend_ok = devs.back() <= devs.front() + 0.05 * target_asym;
    bool tail_ok = true;
    const double samples_per_n = static_cast<double>(replicas * paths);
    for (std::size_t k = 1; k < tail_freqs.size(); ++k) {
        const double slack = 2.0 * (binomial_se(tail_freqs[k - 1], samples_per_n) +
                                    binomial_se(tail_freqs[k], samples_per_n));
        if (tail_freqs[k] > tail_freqs[k - 1] + slack) tail_ok = false;
    }

    rep.statistic = med_last * mu_matched;
    rep.threshold = thresholds::kGapMedianHi;
    rep.direction = "median in [0.6, 1.67]/mu, deviations non-increasing, upper tail decreasing";
    rep.passed = window_ok && trend_ok && tail_ok;
    rep.rows.push_back(json{{"window_ok", window_ok},
                            {"trend_ok", trend_ok},
                            {"upper_tail_ok", tail_ok},
                            {"target", target},
                            {"target_asym", target_asym}});
    return rep;
}

CheckReport check_clt(const InterArrivalLaw& law, const CovarianceSpec& spec, double h,
                      std::int64_t n, std::int64_t omega_replicas, std::int64_t paths_per_omega,
                      std::uint64_t seed) {
    require_localized(law, spec, h, seed, "check_clt");
    DisorderSampler sampler(spec, n);
    WorkspaceOptions opts;
    opts.backward = false;
    opts.r_max = 2;

    // Phase 1: exact per-environment mean and variance of the contact count.
    std::vector<double> means(static_cast<std::size_t>(omega_replicas));
    std::vector<double> variances(static_cast<std::size_t>(omega_replicas));
    parallel_for(omega_replicas, [&](std::int64_t r) {
        const DisorderSample omega = sampler.sample(derive_seed(seed, static_cast<std::uint64_t>(r)));
        const PolymerWorkspace ws = build_workspace(law, omega, h, opts);
        means[static_cast<std::size_t>(r)] = ws.mean_contacts();
        variances[static_cast<std::size_t>(r)] = ws.contact_variance() / static_cast<double>(n);
    });
    const MeanVar v_acc = accumulate(variances);
    const double v_hat = v_acc.mean();
    if (v_hat <= thresholds::kSigmaGate * v_acc.std_error())
        throw DegenerateVarianceError("check_clt: variance estimate indistinguishable from zero");
    const double scale = std::sqrt(static_cast<double>(n) * v_hat);

    // Phase 2: per-environment KS distances of standardized contact counts,
    // plus pooled concentration-companion counters.
    std::vector<double> ks(static_cast<std::size_t>(omega_replicas));
    std::vector<std::array<double, 3>> excess(static_cast<std::size_t>(omega_replicas));
    const double sqrt_n = std::sqrt(static_cast<double>(n));
    parallel_for(omega_replicas, [&](std::int64_t r) {
        const DisorderSample omega = sampler.sample(derive_seed(seed, static_cast<std::uint64_t>(r)));
        const PolymerWorkspace ws = build_workspace(law, omega, h,
                                                    {.r_max = 0, .backward = false});
        std::vector<double> std_vals(static_cast<std::size_t>(paths_per_omega));
        std::array<double, 3> exc{0.0, 0.0, 0.0};
        for (std::int64_t p = 0; p < paths_per_omega; ++p) {
            const PathSample path = ws.sample_path(
                derive_seed(seed ^ 0xC17C, (static_cast<std::uint64_t>(r) << 24) +
                                               static_cast<std::uint64_t>(p)));
            const double centered =
                static_cast<double>(path.contacts) - means[static_cast<std::size_t>(r)];
            std_vals[static_cast<std::size_t>(p)] = centered / scale;
            for (int u = 1; u <= 3; ++u)
                if (std::abs(centered) > u * sqrt_n) exc[static_cast<std::size_t>(u - 1)] += 1.0;
        }
        ks[static_cast<std::size_t>(r)] = ks_distance_normal(std::move(std_vals));
        for (auto& e : exc) e /= static_cast<double>(paths_per_omega);
        excess[static_cast<std::size_t>(r)] = exc;
    });

    CheckReport rep;
    rep.check_name = "clt";
    rep.params = json{{"h", h},
                      {"n", n},
                      {"omega_replicas", omega_replicas},
                      {"paths_per_omega", paths_per_omega},
                      {"spec", spec_json(spec)},
                      {"seed", seed}};
    for (std::size_t r = 0; r < ks.size(); ++r)
        rep.rows.push_back(json{{"omega_replica", r}, {"ks_distance", ks[r]}});
    const double med_ks = median(ks);

    double pooled[3] = {0.0, 0.0, 0.0};
    for (const auto& e : excess)
        for (int u = 0; u < 3; ++u) pooled[u] += e[static_cast<std::size_t>(u)];
    for (auto& p : pooled) p /= static_cast<double>(omega_replicas);
    rep.rows.push_back(json{{"v_hat", v_hat},
                            {"v_hat_se", v_acc.std_error()},
                            {"tail_freq_1sqrtn", pooled[0]},
                            {"tail_freq_2sqrtn", pooled[1]},
                            {"tail_freq_3sqrtn", pooled[2]},
                            {"tail_decreasing", pooled[0] >= pooled[1] && pooled[1] >= pooled[2]}});

    rep.statistic = med_ks;
    rep.threshold = thresholds::kKsGate;
    rep.direction = "statistic <= threshold";
    rep.passed = med_ks <= thresholds::kKsGate;
    return rep;
}

CheckReport check_concentration(const InterArrivalLaw& law, const CovarianceSpec& spec, double h,
                                std::int64_t n, std::int64_t replicas, std::uint64_t seed) {
    DisorderSampler sampler(spec, n);
    WorkspaceOptions opts;
    opts.backward = false;
    const std::vector<double> log_z = per_replica(
        law, sampler, replicas, seed,
        [](const PolymerWorkspace& ws) { return ws.log_partition(); }, h, opts);
    const MeanVar acc = accumulate(log_z);
    const double sigma = acc.std_dev();
    const double gamma_bar_n = spec.gamma_bar_n(n);

    CheckReport rep;
    rep.check_name = "concentration";
    rep.params = json{{"h", h},        {"n", n},       {"replicas", replicas},
                      {"spec", spec_json(spec)}, {"seed", seed}, {"gamma_bar_n", gamma_bar_n}};
    rep.direction = "empirical tail <= bound + 3 SE at every u";
    rep.passed = true;
    double worst_margin = 1e300;
    for (int mult = 0; mult <= 3; ++mult) {
        const double u = mult * sigma;
        double count = 0.0;
        for (double z : log_z)
            if (std::abs(z - acc.mean()) > u) count += 1.0;
        const double emp = count / static_cast<double>(replicas);
        const double bound =
            2.0 * std::exp(-u * u / (4.0 * static_cast<double>(n) * gamma_bar_n));
        const double gate = bound + thresholds::kSigmaGate *
                                        binomial_se(emp, static_cast<double>(replicas));
        const bool ok = emp <= gate;
        rep.passed = rep.passed && ok;
        worst_margin = std::min(worst_margin, gate - emp);
        rep.rows.push_back(json{{"u_over_sigma", mult},
                                {"u", u},
                                {"empirical_tail", emp},
                                {"bound", bound},
                                {"ok", ok}});
    }
    rep.statistic = worst_margin;
    rep.threshold = 0.0;
    rep.direction = "worst (bound + 3 SE - empirical) >= 0";
    return rep;
}

CheckReport check_hypercontractivity(const CovarianceSpec& spec, std::int64_t n, int block_count,
                                     std::int64_t replicas, std::uint64_t seed) {
    const SpectralBounds sb = spec.spectral_bounds(n);
    if (!(sb.lambda_min > 0.0))
        throw NotInvertibleError("check_hypercontractivity: covariance not invertible");
    const double kappa = 2.0 * spec.gamma_bar() / sb.lambda_min;
    if (kappa < 1.0)
        throw Error("check_hypercontractivity: kappa below one, spectral bounds inconsistent");

    // Block boundaries: near-equal consecutive blocks.
    std::vector<std::pair<std::int64_t, std::int64_t>> blocks;
    const std::int64_t base = n / block_count, extra = n % block_count;
    std::int64_t at = 0;
    for (int b = 0; b < block_count; ++b) {
        const std::int64_t len = base + (b < extra ? 1 : 0);
        blocks.emplace_back(at, at + len);
        at += len;
    }

    struct Phi {
        std::string name;
        std::function<double(const double*, std::int64_t)> eval;
    };
    const std::vector<Phi> library = {
        {"indicator-all-positive",
         [](const double* x, std::int64_t len) {
             for (std::int64_t i = 0; i < len; ++i)
                 if (x[i] <= 0.0) return 0.0;
             return 1.0;
         }},
        {"exp-mean",
         [](const double* x, std::int64_t len) {
             double s = 0.0;
             for (std::int64_t i = 0; i < len; ++i) s += x[i];
             return std::exp(s / static_cast<double>(len));
         }},
        {"clipped-square",
         [](const double* x, std::int64_t len) {
             double s = 0.0;
             for (std::int64_t i = 0; i < len; ++i) s += x[i];
             const double m = s / static_cast<double>(len);
             return std::min(m * m, 4.0);
         }},
        {"clipped-quartic",
         [](const double* x, std::int64_t len) {
             double s = 0.0;
             for (std::int64_t i = 0; i < len; ++i) s += x[i];
             const double m = s / static_cast<double>(len);
             return std::min(m * m * m * m, 16.0);
         }},
    };

    // One MC sweep evaluates every library function; chunked accumulators
    // keep the merge order fixed.
    const std::size_t n_phi = library.size();
    const std::size_t n_blocks = blocks.size();
    const std::int64_t chunks = 64;
    struct ChunkAcc {
        std::vector<MeanVar> lhs;         // per phi: product over blocks
        std::vector<MeanVar> norm_pow;    // per phi x block: |phi|^kappa
        std::vector<MeanVar> whole_lhs;   // per phi: single-block value
        std::vector<MeanVar> whole_pow;   // per phi: |phi|^kappa on the whole range
    };
    std::vector<ChunkAcc> acc(static_cast<std::size_t>(chunks));
    for (auto& a : acc) {
        a.lhs.resize(n_phi);
        a.norm_pow.resize(n_phi * n_blocks);
        a.whole_lhs.resize(n_phi);
        a.whole_pow.resize(n_phi);
    }
    DisorderSampler sampler(spec, n);
    const std::int64_t per_chunk = (replicas + chunks - 1) / chunks;
    parallel_for(chunks, [&](std::int64_t c) {
        ChunkAcc& a = acc[static_cast<std::size_t>(c)];
        const std::int64_t lo = c * per_chunk;
        const std::int64_t hi = std::min(replicas, lo + per_chunk);
        for (std::int64_t r = lo; r < hi; ++r) {
            const DisorderSample omega =
                sampler.sample(derive_seed(seed, static_cast<std::uint64_t>(r)));
            const double* x = omega.values.data();
            for (std::size_t f = 0; f < n_phi; ++f) {
                double prod = 1.0;
                for (std::size_t b = 0; b < n_blocks; ++b) {
                    const auto [s, e] = blocks[b];
                    const double v = library[f].eval(x + s, e - s);
                    prod *= v;
                    a.norm_pow[f * n_blocks + b].add(std::pow(std::abs(v), kappa));
                }
                a.lhs[f].add(prod);
                const double w = library[f].eval(x, n);
                a.whole_lhs[f].add(w);
                a.whole_pow[f].add(std::pow(std::abs(w), kappa));
            }
        }
    });

    CheckReport rep;
    rep.check_name = "hypercontractivity";
    rep.params = json{{"n", n},
                      {"block_count", block_count},
                      {"replicas", replicas},
                      {"spec", spec_json(spec)},
                      {"kappa", kappa},
                      {"lambda_min", sb.lambda_min},
                      {"seed", seed}};
    rep.direction = "LHS <= RHS + 4 SE for every function and block layout";
    rep.passed = true;
    double worst_margin = 1e300;

    for (std::size_t f = 0; f < n_phi; ++f) {
        MeanVar lhs, whole_lhs, whole_pow;
        std::vector<MeanVar> pow_b(n_blocks);
        for (const auto& a : acc) {
            lhs.merge(a.lhs[f]);
            whole_lhs.merge(a.whole_lhs[f]);
            whole_pow.merge(a.whole_pow[f]);
            for (std::size_t b = 0; b < n_blocks; ++b) pow_b[b].merge(a.norm_pow[f * n_blocks + b]);
        }
        // A block norm with zero Monte Carlo mass forces every sampled
        // product to zero as well; the comparison is then 0 <= 0.
        double rhs = 1.0, rel_var = 0.0;
        for (std::size_t b = 0; b < n_blocks; ++b) {
            const double m = pow_b[b].mean();
            if (m <= 0.0) {
                rhs = 0.0;
                rel_var = 0.0;
                break;
            }
            rhs *= std::pow(m, 1.0 / kappa);
            const double rel = pow_b[b].std_error() / (kappa * m);
            rel_var += rel * rel;
        }
        const double se = std::hypot(lhs.std_error(), rhs * std::sqrt(rel_var));
        const double gate = rhs + thresholds::kSigmaGateWide * se;
        const bool ok = lhs.mean() <= gate;
        rep.passed = rep.passed && ok;
        worst_margin = std::min(worst_margin, gate - lhs.mean());
        rep.rows.push_back(json{{"phi", library[f].name},
                                {"layout", "blocks"},
                                {"lhs", lhs.mean()},
                                {"lhs_se", lhs.std_error()},
                                {"rhs", rhs},
                                {"ok", ok}});

        // single-block layout: reduces to the Jensen bound E[phi] <= ||phi||_kappa
        const double whole_mean = whole_pow.mean();
        const double rhs1 = whole_mean > 0.0 ? std::pow(whole_mean, 1.0 / kappa) : 0.0;
        const double se1 =
            whole_mean > 0.0
                ? std::hypot(whole_lhs.std_error(),
                             rhs1 * whole_pow.std_error() / (kappa * whole_mean))
                : whole_lhs.std_error();
        const bool ok1 = whole_lhs.mean() <= rhs1 + thresholds::kSigmaGateWide * se1;
        rep.passed = rep.passed && ok1;
        worst_margin = std::min(worst_margin, rhs1 + thresholds::kSigmaGateWide * se1 -
                                                  whole_lhs.mean());
        rep.rows.push_back(json{{"phi", library[f].name},
                                {"layout", "single-block"},
                                {"lhs", whole_lhs.mean()},
                                {"rhs", rhs1},
                                {"ok", ok1}});
    }
    rep.statistic = worst_margin;
    rep.threshold = 0.0;
    rep.direction = "worst (RHS + 4 SE - LHS) >= 0";
    return rep;
}

CheckReport check_mu_sandwich(const InterArrivalLaw& law, const CovarianceSpec& spec,
                              const std::vector<double>& h_grid, std::int64_t n,
                              std::int64_t replicas, std::uint64_t seed) {
    CheckReport rep;
    rep.check_name = "mu_sandwich";
    rep.params = json{{"h_grid", h_grid}, {"n", n},       {"replicas", replicas},
                      {"spec", spec_json(spec)},      {"seed", seed}};
    rep.direction = "mu <= f + 3 SE; mu > 0 where f > 0; 1-Lipschitz steps";
    rep.passed = true;
    double worst_margin = 1e300;

    for (const double h : h_grid) {
        const auto f = free_energy(law, spec, h, n, replicas, seed);
        const auto mu = mu_hat(law, spec, h, n, replicas, seed);
        const auto mu_step = mu_hat(law, spec, h + 0.2, n, replicas, seed);

        const double comb = thresholds::kSigmaGate *
                            std::hypot(f.replica_mean.std_error, mu.record.std_error);
        const bool sandwich_ok = mu.record.point <= f.replica_mean.point + comb;
        const bool f_positive =
            f.replica_mean.point > thresholds::kSigmaGate * f.replica_mean.std_error;
        const bool equivalence_ok =
            !f_positive || mu.record.point > thresholds::kSigmaGate * mu.record.std_error;
        const double lip_comb = thresholds::kSigmaGate *
                                std::hypot(mu.record.std_error, mu_step.record.std_error);
        const bool lipschitz_ok =
            std::abs(mu_step.record.point - mu.record.point) <= 0.2 + lip_comb;

        rep.passed = rep.passed && sandwich_ok && equivalence_ok && lipschitz_ok;
        worst_margin =
            std::min(worst_margin, f.replica_mean.point + comb - mu.record.point);
        rep.rows.push_back(json{{"h", h},
                                {"f_hat", f.replica_mean.point},
                                {"f_se", f.replica_mean.std_error},
                                {"mu_hat", mu.record.point},
                                {"mu_se", mu.record.std_error},
                                {"mu_hat_step", mu_step.record.point},
                                {"ess", mu.ess},
                                {"ess_fraction", mu.ess / static_cast<double>(replicas)},
                                {"low_ess", mu.low_ess},
                                {"sandwich_ok", sandwich_ok},
                                {"equivalence_ok", equivalence_ok},
                                {"lipschitz_ok", lipschitz_ok}});
    }
    rep.statistic = worst_margin;
    rep.threshold = 0.0;
    rep.direction = "worst sandwich margin >= 0 plus equivalence and Lipschitz flags";
    return rep;
}

CheckReport check_convolution_decay(double eps, double a, double a_prime, std::int64_t k_max) {
    if (!(0.0 < a_prime && a_prime < a && a < 1.0))
        throw ValidationError("check_convolution_decay: need 0 < a' < a < 1");
    if (k_max > 100000) throw ValidationError("check_convolution_decay: k_max <= 1e5");

    // Window wide enough that the dropped exponential tail is below 1e-12 of
    // any retained value.
    const std::int64_t w = static_cast<std::int64_t>(std::ceil(60.0 / eps));
    const auto u_at = [&](std::int64_t k) { return std::exp(-eps * std::abs(static_cast<double>(k))); };
    const auto w_at = [&](std::int64_t k) {
        return std::pow(1.0 + std::abs(static_cast<double>(k)), -1.0 - a);
    };

    // v = u * w on 0..k_max + w (even in k)
    std::vector<double> v(static_cast<std::size_t>(k_max + w + 1));
    for (std::int64_t k = 0; k <= k_max + w; ++k) {
        KahanSum s;
        for (std::int64_t i = -w; i <= w; ++i) s.add(u_at(i) * w_at(k - i));
        v[static_cast<std::size_t>(k)] = s.value();
    }
    const auto v_at = [&](std::int64_t k) { return v[static_cast<std::size_t>(std::abs(k))]; };
    // s = v * u on 0..k_max
    std::vector<double> conv(static_cast<std::size_t>(k_max + 1));
    for (std::int64_t k = 0; k <= k_max; ++k) {
        KahanSum s;
        for (std::int64_t i = -w; i <= w; ++i) s.add(u_at(i) * v_at(k - i));
        conv[static_cast<std::size_t>(k)] = s.value();
    }

    // normalized sequence and its shape
    std::vector<double> norm(conv.size());
    for (std::int64_t k = 0; k <= k_max; ++k)
        norm[static_cast<std::size_t>(k)] =
            conv[static_cast<std::size_t>(k)] *
            std::pow(1.0 + static_cast<double>(k), 1.0 + a_prime);
    std::size_t argmax = 0;
    for (std::size_t k = 1; k < norm.size(); ++k)
        if (norm[k] > norm[argmax]) argmax = k;
    // smallest k0 with norm non-increasing beyond it
    std::size_t k0 = norm.size() - 1;
    while (k0 > 0 && norm[k0 - 1] >= norm[k0] * (1.0 - 1e-12)) --k0;

    // intermediate single-convolution bound
    double c_single = 0.0;
    std::size_t argmax_single = 0;
    for (std::int64_t k = 0; k <= k_max; ++k) {
        const double s = v[static_cast<std::size_t>(k)] *
                         std::pow(1.0 + static_cast<double>(k), 1.0 + a_prime);
        if (s > c_single) {
            c_single = s;
            argmax_single = static_cast<std::size_t>(k);
        }
    }

    CheckReport rep;
    rep.check_name = "convolution_decay";
    rep.params = json{{"eps", eps}, {"a", a}, {"a_prime", a_prime}, {"k_max", k_max}};
    rep.statistic = static_cast<double>(k0);
    rep.threshold = static_cast<double>(k_max) / 10.0;
    rep.direction = "non-increasing from k0 <= k_max/10 with the peak at small k";
    rep.passed = conv[0] > conv[1] && argmax <= 10 && k0 <= static_cast<std::size_t>(k_max / 10);
    rep.rows.push_back(json{{"c_constant", norm[argmax]},
                            {"argmax", argmax},
                            {"monotone_from", k0},
                            {"peak_unimodal", conv[0] > conv[1]},
                            {"single_conv_constant", c_single},
                            {"single_conv_argmax", argmax_single},
                            {"norm_first", norm.front()},
                            {"norm_last", norm.back()}});
    return rep;
}

CheckReport check_centering_variance(const InterArrivalLaw& law, const CovarianceSpec& spec,
                                     double h, std::int64_t n, std::int64_t replicas,
                                     double eps_hat, std::uint64_t seed) {
    require_localized(law, spec, h, seed, "check_centering_variance");
    CheckReport rep;
    rep.check_name = "centering_variance";
    rep.params = json{{"h", h},        {"n", n},       {"replicas", replicas},
                      {"spec", spec_json(spec)},      {"eps_hat", eps_hat},
                      {"seed", seed},  {"invertible_certificate", spec.invertible_certificate()}};

    // Variance rate of the exact per-environment mean contact count at n, 2n.
    double w_vals[2], w_ses[2];
    const std::int64_t sizes[2] = {n, 2 * n};
    for (int k = 0; k < 2; ++k) {
        DisorderSampler sampler(spec, sizes[k]);
        WorkspaceOptions opts;
        opts.backward = false;
        opts.r_max = 1;
        const std::vector<double> mean_l = per_replica(
            law, sampler, replicas, derive_seed(seed, static_cast<std::uint64_t>(k)),
            [](const PolymerWorkspace& ws) { return ws.mean_contacts(); }, h, opts);
        const MeanVar acc = accumulate(mean_l);
        w_vals[k] = acc.variance() / static_cast<double>(sizes[k]);
        w_ses[k] = w_vals[k] * std::sqrt(2.0 / static_cast<double>(replicas - 1));
        rep.rows.push_back(json{{"size", sizes[k]}, {"w_hat", w_vals[k]}, {"w_se", w_ses[k]}});
    }
    const double agree_gate =
        thresholds::kSigmaGateWide * std::hypot(w_ses[0], w_ses[1]);
    const bool agreement_ok = std::abs(w_vals[0] - w_vals[1]) <= agree_gate;
    const bool positive_ok =
        !spec.invertible_certificate() || w_vals[1] > thresholds::kSigmaGate * w_ses[1];

    // Environment-measure covariance of contact marginals against the
    // smoothed kernel bound; the constant is fitted at the first pair then
    // frozen.
    const std::int64_t base = n / 2;
    const std::vector<std::pair<std::int64_t, std::int64_t>> pairs = {
        {base, base + 1}, {base, base + 2}, {base, base + 4},
        {base, base + 8}, {base, base + 16}, {n / 4, 3 * n / 4}};
    std::vector<std::int64_t> idx;
    for (const auto& [i, j] : pairs) {
        idx.push_back(i);
        idx.push_back(j);
    }
    std::sort(idx.begin(), idx.end());
    idx.erase(std::unique(idx.begin(), idx.end()), idx.end());

    DisorderSampler sampler(spec, n);
    std::vector<std::vector<double>> marg(idx.size(),
                                          std::vector<double>(static_cast<std::size_t>(replicas)));
    parallel_for(replicas, [&](std::int64_t r) {
        const DisorderSample omega =
            sampler.sample(derive_seed(seed ^ 0x77, static_cast<std::uint64_t>(r)));
        const PolymerWorkspace ws = build_workspace(law, omega, h);
        for (std::size_t q = 0; q < idx.size(); ++q)
            marg[q][static_cast<std::size_t>(r)] = ws.contact_marginal(idx[q]);
    });
    const auto index_of = [&](std::int64_t i) {
        return static_cast<std::size_t>(std::lower_bound(idx.begin(), idx.end(), i) - idx.begin());
    };
    const auto cov_with_se = [&](std::size_t qa, std::size_t qb, double* se_out) {
        const MeanVar ma = accumulate(marg[qa]), mb = accumulate(marg[qb]);
        double cov = 0.0, m22 = 0.0;
        const double r = static_cast<double>(replicas);
        for (std::int64_t t = 0; t < replicas; ++t) {
            const double dx = marg[qa][static_cast<std::size_t>(t)] - ma.mean();
            const double dy = marg[qb][static_cast<std::size_t>(t)] - mb.mean();
            cov += dx * dy;
            m22 += dx * dx * dy * dy;
        }
        cov /= r - 1.0;
        m22 /= r;
        *se_out = std::sqrt(std::max(m22 - cov * cov, 0.0) / r);
        return cov;
    };
    const auto kernel_sum = [&](std::int64_t i, std::int64_t j) {
        double s = 0.0;
        for (std::int64_t k = 1; k <= n; ++k)
            for (std::int64_t l = 1; l <= n; ++l)
                s += std::abs(spec.gamma(std::abs(k - l))) *
                     std::exp(-eps_hat * std::abs(static_cast<double>(i - k))) *
                     std::exp(-eps_hat * std::abs(static_cast<double>(j - l)));
        return s;
    };

    bool pairs_ok = true;
    double c_frozen = 0.0;
    for (std::size_t p = 0; p < pairs.size(); ++p) {
        const auto [i, j] = pairs[p];
        double se = 0.0;
        const double emp = std::abs(cov_with_se(index_of(i), index_of(j), &se));
        const double s_ij = kernel_sum(i, j);
        if (p == 0) c_frozen = std::max(emp, 0.0) / s_ij;
        const double bound = c_frozen * s_ij + thresholds::kSigmaGateWide * se;
        const bool ok = emp <= bound;
        if (p > 0) pairs_ok = pairs_ok && ok;
        rep.rows.push_back(json{{"i", i},
                                {"j", j},
                                {"empirical_cov", emp},
                                {"cov_se", se},
                                {"kernel_sum", s_ij},
                                {"bound", bound},
                                {"fitted", p == 0},
                                {"ok", ok}});
    }

    rep.statistic = std::abs(w_vals[0] - w_vals[1]);
    rep.threshold = agree_gate;
    rep.direction = "two-size w agreement, positivity when invertible, kernel bound on pairs";
    rep.passed = agreement_ok && positive_ok && pairs_ok;
    rep.rows.push_back(json{{"agreement_ok", agreement_ok},
                            {"positivity_ok", positive_ok},
                            {"pairs_ok", pairs_ok},
                            {"c_frozen", c_frozen}});
    return rep;
}

}  // namespace pinlab
