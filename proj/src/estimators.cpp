#include "pinlab/estimators.hpp"

#include <algorithm>
#include <cmath>

#include "pinlab/errors.hpp"
#include "pinlab/logsumexp.hpp"
#include "pinlab/parallel.hpp"
#include "pinlab/rng.hpp"
#include "pinlab/stats.hpp"

namespace pinlab {

namespace {

// log of the replica mean of exp(x_r), i.e. LSE(x) - log R.
double log_mean_exp(const std::vector<double>& xs) {
    LogSumExp acc;
    for (double x : xs) acc.add(x);
    return acc.value() - std::log(static_cast<double>(xs.size()));
}

struct LogMeanStats {
    double log_mean = 0.0;
    double se_of_log = 0.0;  // delta method: SE(mean)/mean
    double ess = 0.0;
};

LogMeanStats log_mean_exp_stats(const std::vector<double>& xs) {
    const double r = static_cast<double>(xs.size());
    LogSumExp acc1, acc2;
    for (double x : xs) {
        acc1.add(x);
        acc2.add(2.0 * x);
    }
    LogMeanStats out;
    out.log_mean = acc1.value() - std::log(r);
    out.ess = std::exp(2.0 * acc1.value() - acc2.value());
    // var(Y) = mean(Y^2) - mean(Y)^2, all in log domain
    const double log_m2 = acc2.value() - std::log(r);
    const double gap = 2.0 * out.log_mean - log_m2;  // <= 0 by Jensen
    if (gap >= -1e-15) {
        out.se_of_log = 0.0;  // degenerate sample: all weights equal
    } else {
        const double log_var = log_m2 + std::log1p(-std::exp(gap));
        out.se_of_log = std::exp(0.5 * (log_var - std::log(r)) - out.log_mean);
    }
    return out;
}

}  // namespace

std::vector<double> per_replica(const InterArrivalLaw& law, const DisorderSampler& sampler,
                                std::int64_t replicas, std::uint64_t base_seed,
                                const std::function<double(const PolymerWorkspace&)>& stat,
                                double h, WorkspaceOptions opts) {
    std::vector<double> out(static_cast<std::size_t>(replicas));
    parallel_for(replicas, [&](std::int64_t r) {
        const DisorderSample omega = sampler.sample(derive_seed(base_seed, static_cast<std::uint64_t>(r)));
        const PolymerWorkspace ws = build_workspace(law, omega, h, opts);
        out[static_cast<std::size_t>(r)] = stat(ws);
    });
    return out;
}

FreeEnergyEstimate free_energy(const InterArrivalLaw& law, const CovarianceSpec& spec, double h,
                               std::int64_t n, std::int64_t replicas, std::uint64_t seed,
                               std::int64_t cutoff) {
    if (replicas < 2) throw ValidationError("free_energy: need at least 2 replicas");
    DisorderSampler sampler(spec, n);
    WorkspaceOptions opts;
    opts.backward = false;
    opts.cutoff = cutoff;
    const std::vector<double> vals = per_replica(
        law, sampler, replicas, seed,
        [](const PolymerWorkspace& ws) { return ws.log_partition(); }, h, opts);
    MeanVar acc;
    for (double v : vals) acc.add(v / static_cast<double>(n));

    const std::string tag = cutoff > 0 ? "+approximate-cutoff" : "";
    FreeEnergyEstimate out;
    out.replica_mean = {"free_energy", h, n, replicas, acc.mean(), acc.std_error(),
                        "replica-mean" + tag, seed};
    out.single_trajectory = {"free_energy_single", h, n, 1,
                             vals.front() / static_cast<double>(n), 0.0,
                             "single-trajectory" + tag, seed};
    return out;
}

MuEstimate mu_hat(const InterArrivalLaw& law, const CovarianceSpec& spec, double h,
                  std::int64_t n, std::int64_t replicas, std::uint64_t seed,
                  std::int64_t cutoff) {
    if (replicas < 100) throw ValidationError("mu_hat: need at least 100 replicas");
    DisorderSampler sampler(spec, n);
    WorkspaceOptions opts;
    opts.backward = false;
    opts.cutoff = cutoff;
    const std::vector<double> neg_log_zm = per_replica(
        law, sampler, replicas, seed,
        [](const PolymerWorkspace& ws) { return -ws.log_partition_minus(); }, h, opts);
    const LogMeanStats stats = log_mean_exp_stats(neg_log_zm);

    const std::string tag = cutoff > 0 ? "+approximate-cutoff" : "";
    MuEstimate out;
    out.record = {"mu_hat", h, n, replicas, -stats.log_mean / static_cast<double>(n),
                  stats.se_of_log / static_cast<double>(n), "log-replica-mean" + tag, seed};
    out.ess = stats.ess;
    out.low_ess = stats.ess < 0.01 * static_cast<double>(replicas);
    return out;
}

double mu_reference(const InterArrivalLaw& law, const CovarianceSpec& spec, double h,
                    std::int64_t n_small, std::int64_t n_large, std::int64_t replicas,
                    std::uint64_t seed, int repeats) {
    if (n_small >= n_large) throw ValidationError("mu_reference: need n_small < n_large");
    if (repeats < 1) throw ValidationError("mu_reference: need repeats >= 1");
    WorkspaceOptions opts;
    opts.backward = false;
    DisorderSampler sampler(spec, n_large);

    // Both sizes are evaluated on the same field (the small system sees the
    // prefix), which cancels most of the extreme-value noise in the slope;
    // independent repeats average what remains.
    MeanVar slope_acc;
    for (int rep = 0; rep < repeats; ++rep) {
        std::vector<double> small_vals(static_cast<std::size_t>(replicas));
        std::vector<double> large_vals(static_cast<std::size_t>(replicas));
        const std::uint64_t rep_seed = derive_seed(seed, 0xE0000 + static_cast<std::uint64_t>(rep));
        parallel_for(replicas, [&](std::int64_t r) {
            const DisorderSample omega =
                sampler.sample(derive_seed(rep_seed, static_cast<std::uint64_t>(r)));
            std::vector<double> prefix(omega.values.begin(), omega.values.begin() + n_small);
            const PolymerWorkspace ws_small(law, std::move(prefix), h, opts);
            const PolymerWorkspace ws_large(law, omega.values, h, opts);
            small_vals[static_cast<std::size_t>(r)] = -ws_small.log_partition_minus();
            large_vals[static_cast<std::size_t>(r)] = -ws_large.log_partition_minus();
        });
        const double slope = -(log_mean_exp(large_vals) - log_mean_exp(small_vals)) /
                             static_cast<double>(n_large - n_small);
        slope_acc.add(slope);
    }
    return slope_acc.mean();
}

std::vector<EstimateRecord> free_energy_derivatives(const InterArrivalLaw& law,
                                                    const CovarianceSpec& spec, double h,
                                                    std::int64_t n, std::int64_t replicas,
                                                    int order, std::uint64_t seed,
                                                    double h_floor) {
    if (order < 1 || order > 3) throw ValidationError("free_energy_derivatives: order in 1..3");
    if (replicas < 2) throw ValidationError("free_energy_derivatives: need >= 2 replicas");
    DisorderSampler sampler(spec, n);
    const double nd = static_cast<double>(n);

    std::vector<EstimateRecord> records;

    // Orders 1 and 2 from the exact contact-moment recursions.
    {
        WorkspaceOptions opts;
        opts.backward = false;
        opts.r_max = 2;
        std::vector<double> rho_vals(static_cast<std::size_t>(replicas));
        std::vector<double> v_vals(static_cast<std::size_t>(replicas));
        parallel_for(replicas, [&](std::int64_t r) {
            const DisorderSample omega =
                sampler.sample(derive_seed(seed, static_cast<std::uint64_t>(r)));
            const PolymerWorkspace ws = build_workspace(law, omega, h, opts);
            rho_vals[static_cast<std::size_t>(r)] = ws.mean_contacts() / nd;
            v_vals[static_cast<std::size_t>(r)] = ws.contact_variance() / nd;
        });
        const MeanVar rho_acc = accumulate(rho_vals);
        records.push_back({"rho", h, n, replicas, rho_acc.mean(), rho_acc.std_error(),
                           "exact-moment", seed});
        if (order >= 2) {
            const MeanVar v_acc = accumulate(v_vals);
            records.push_back({"v", h, n, replicas, v_acc.mean(), v_acc.std_error(),
                               "exact-moment", seed});
        }
    }

    if (order >= 3) {
        // Five-point stencil for the third derivative; the same replica seeds
        // are reused at every stencil point (common random numbers).
        const double delta = 0.05;
        if (h - 2.0 * delta < h_floor)
            throw StencilOutOfRangeError("free_energy_derivatives: stencil dips below the h floor");
        WorkspaceOptions opts;
        opts.backward = false;
        std::vector<double> d3(static_cast<std::size_t>(replicas));
        parallel_for(replicas, [&](std::int64_t r) {
            const DisorderSample omega =
                sampler.sample(derive_seed(seed, static_cast<std::uint64_t>(r)));
            double f[5];
            for (int k = -2; k <= 2; ++k) {
                const PolymerWorkspace ws =
                    PolymerWorkspace(law, omega.values, h + k * delta, opts);
                f[k + 2] = ws.log_partition() / nd;
            }
            d3[static_cast<std::size_t>(r)] =
                (f[4] - 2.0 * f[3] + 2.0 * f[1] - f[0]) / (2.0 * delta * delta * delta);
        });
        const MeanVar acc = accumulate(d3);
        records.push_back({"d3f", h, n, replicas, acc.mean(), acc.std_error(),
                           "central-difference(delta=0.05)", seed});
    }
    return records;
}

CenteringStatistics centering_statistics(const InterArrivalLaw& law, const CovarianceSpec& spec,
                                         double h, std::int64_t n, std::int64_t replicas,
                                         std::uint64_t seed) {
    if (replicas < 2) throw ValidationError("centering_statistics: need >= 2 replicas");
    if (n < 4) throw ValidationError("centering_statistics: n too small");
    CenteringStatistics out;
    const std::int64_t sizes[3] = {n / 4, n / 2, n};
    double means[3] = {0, 0, 0};
    WorkspaceOptions opts;
    opts.backward = false;
    opts.r_max = 1;
    for (int k = 0; k < 3; ++k) {
        const std::int64_t size = sizes[k];
        DisorderSampler sampler(spec, size);
        const std::vector<double> mean_l = per_replica(
            law, sampler, replicas, seed,
            [](const PolymerWorkspace& ws) { return ws.mean_contacts(); }, h, opts);
        const MeanVar acc = accumulate(mean_l);
        means[k] = acc.mean();
        const double sized = static_cast<double>(size);
        out.sizes.push_back(sized);
        out.rho.push_back({"rho_n", h, size, replicas, acc.mean() / sized,
                           acc.std_error() / sized, "exact-moment", seed});
        // Normal-theory standard error for a sample variance.
        const double w_hat = acc.variance() / sized;
        const double w_se =
            replicas > 1 ? w_hat * std::sqrt(2.0 / static_cast<double>(replicas - 1)) : 0.0;
        out.w.push_back({"w_hat", h, size, replicas, w_hat, w_se, "replica-variance", seed});
    }
    out.halving_defect_small = std::abs(means[1] - 2.0 * means[0]);
    out.halving_defect_large = std::abs(means[2] - 2.0 * means[1]);
    return out;
}

CriticalPointScan critical_point_scan(const InterArrivalLaw& law, const CovarianceSpec& spec,
                                      const std::vector<double>& h_grid, std::int64_t n,
                                      std::int64_t replicas, std::uint64_t seed) {
    if (h_grid.size() < 5) throw ValidationError("critical_point_scan: need >= 5 grid points");
    if (!std::is_sorted(h_grid.begin(), h_grid.end()))
        throw ValidationError("critical_point_scan: h_grid must be sorted");

    CriticalPointScan out;
    out.grid_step = h_grid[1] - h_grid[0];
    DisorderSampler sampler(spec, n);
    WorkspaceOptions opts;
    opts.backward = false;

    const double nd = static_cast<double>(n);
    for (const double h : h_grid) {
        // One replica pass serves both estimators; seeds are shared across
        // the grid (common random numbers).
        std::vector<double> log_z(static_cast<std::size_t>(replicas));
        std::vector<double> neg_log_zm(static_cast<std::size_t>(replicas));
        parallel_for(replicas, [&](std::int64_t r) {
            const DisorderSample omega =
                sampler.sample(derive_seed(seed, static_cast<std::uint64_t>(r)));
            const PolymerWorkspace ws = build_workspace(law, omega, h, opts);
            log_z[static_cast<std::size_t>(r)] = ws.log_partition();
            neg_log_zm[static_cast<std::size_t>(r)] = -ws.log_partition_minus();
        });
        MeanVar f_acc;
        for (double v : log_z) f_acc.add(v / nd);
        const LogMeanStats mu_stats = log_mean_exp_stats(neg_log_zm);
        out.f_curve.push_back(
            {"free_energy", h, n, replicas, f_acc.mean(), f_acc.std_error(), "replica-mean", seed});
        out.mu_curve.push_back({"mu_hat", h, n, replicas, -mu_stats.log_mean / nd,
                                mu_stats.se_of_log / nd, "log-replica-mean", seed});
    }

    for (std::size_t i = 0; i < h_grid.size(); ++i) {
        const auto& f = out.f_curve[i];
        const auto& mu = out.mu_curve[i];
        const bool localized =
            f.point > 3.0 * f.std_error && mu.point > 3.0 * mu.std_error && f.point > 0.0 &&
            mu.point > 0.0;
        if (localized) {
            if (i == 0)
                throw NotBracketedError("critical_point_scan: leftmost grid point already localized");
            out.h_c_hat = h_grid[i];
            out.found = true;
            break;
        }
    }
    out.annealed_bound_ok = out.found && out.h_c_hat <= 0.0 + out.grid_step + 1e-12;
    return out;
}

}  // namespace pinlab
