#include "pinlab/polymer.hpp"

#include <algorithm>
#include <cmath>

#include "pinlab/errors.hpp"
#include "pinlab/logsumexp.hpp"
#include "pinlab/rng.hpp"

namespace pinlab {

namespace {
constexpr double kForwardBackwardTol = 1e-9;
constexpr double kStepProbabilityTol = 1e-6;
}  // namespace

PolymerWorkspace::PolymerWorkspace(const InterArrivalLaw& law, std::vector<double> omega,
                                   double h, WorkspaceOptions opts)
    : law_(&law), omega_(std::move(omega)), h_(h),
      n_(static_cast<std::int64_t>(omega_.size())), opts_(opts) {
    if (n_ < 1) throw SizeMismatchError("PolymerWorkspace: empty environment");
    if (n_ > law.n_max())
        throw SizeMismatchError("PolymerWorkspace: n exceeds the law's mass cache");
    if (opts_.r_max < 0 || opts_.r_max > 4)
        throw ValidationError("PolymerWorkspace: r_max must be in 0..4");
    build_forward();
    if (opts_.backward) {
        build_backward();
        if (std::abs(fwd_[static_cast<std::size_t>(n_)] - bwd_[0]) > kForwardBackwardTol)
            throw Error("PolymerWorkspace: forward/backward partition functions disagree");
    }
}

void PolymerWorkspace::build_forward() {
    const std::size_t sz = static_cast<std::size_t>(n_) + 1;
    fwd_.assign(sz, 0.0);
    const int r = opts_.r_max;
    for (int m = 0; m < r; ++m) moments_[static_cast<std::size_t>(m)].assign(sz, 0.0);

    // Local view of log p(t); index t starts at 1.
    std::vector<double> lp(sz, 0.0);
    for (std::int64_t t = 1; t <= n_; ++t)
        lp[static_cast<std::size_t>(t)] = law_->log_mass(t);

    for (std::int64_t j = 1; j <= n_; ++j) {
        const std::int64_t lo =
            opts_.cutoff > 0 ? std::max<std::int64_t>(0, j - opts_.cutoff) : 0;
        LogSumExp acc;
        for (std::int64_t i = lo; i < j; ++i)
            acc.add(fwd_[static_cast<std::size_t>(i)] + lp[static_cast<std::size_t>(j - i)]);
        const double base = acc.value();  // log sum_i Z_i p(j-i)
        fwd_[static_cast<std::size_t>(j)] = h_ + omega_at(j) + base;

        if (r > 0) {
            // Second streaming pass with the now-known normalizer. The
            // conditional moments stay O(poly(n)) while Z itself explodes.
            double s[4] = {0.0, 0.0, 0.0, 0.0};
            for (std::int64_t i = lo; i < j; ++i) {
                const double w = std::exp(fwd_[static_cast<std::size_t>(i)] +
                                          lp[static_cast<std::size_t>(j - i)] - base);
                if (w == 0.0) continue;
                const std::size_t ii = static_cast<std::size_t>(i);
                const double r1 = moments_[0][ii];
                s[0] += w * (r1 + 1.0);
                if (r >= 2) {
                    const double r2 = moments_[1][ii];
                    s[1] += w * (r2 + 2.0 * r1 + 1.0);
                    if (r >= 3) {
                        const double r3 = moments_[2][ii];
                        s[2] += w * (r3 + 3.0 * r2 + 3.0 * r1 + 1.0);
                        if (r >= 4)
                            s[3] += w * (moments_[3][ii] + 4.0 * r3 + 6.0 * r2 + 4.0 * r1 + 1.0);
                    }
                }
            }
            for (int m = 0; m < r; ++m)
                moments_[static_cast<std::size_t>(m)][static_cast<std::size_t>(j)] = s[m];
        }
    }
}

void PolymerWorkspace::build_backward() {
    const std::size_t sz = static_cast<std::size_t>(n_) + 1;
    bwd_.assign(sz, 0.0);
    std::vector<double> lp(sz, 0.0);
    for (std::int64_t t = 1; t <= n_; ++t)
        lp[static_cast<std::size_t>(t)] = law_->log_mass(t);

    for (std::int64_t i = n_ - 1; i >= 0; --i) {
        const std::int64_t hi =
            opts_.cutoff > 0 ? std::min<std::int64_t>(n_, i + opts_.cutoff) : n_;
        LogSumExp acc;
        for (std::int64_t j = i + 1; j <= hi; ++j)
            acc.add(lp[static_cast<std::size_t>(j - i)] + h_ + omega_at(j) +
                    bwd_[static_cast<std::size_t>(j)]);
        bwd_[static_cast<std::size_t>(i)] = acc.value();
    }
}

double PolymerWorkspace::log_partition_minus() const {
    return log_partition() - h_ - omega_at(n_);
}

double PolymerWorkspace::contact_marginal(std::int64_t i) const {
    if (i < 1 || i > n_) throw OutOfRangeError("contact_marginal: index outside 1..n");
    if (bwd_.empty()) throw Error("contact_marginal: workspace built without backward pass");
    if (i == n_) return 1.0;
    const double v = std::exp(fwd_[static_cast<std::size_t>(i)] +
                              bwd_[static_cast<std::size_t>(i)] - log_partition());
    return std::min(v, 1.0);
}

double PolymerWorkspace::pair_covariance(std::int64_t a, std::int64_t b) const {
    if (!(1 <= a && a < b && b <= n_))
        throw OutOfRangeError("pair_covariance: need 1 <= a < b <= n");
    if (b == n_) return 0.0;  // X_n is constant under the pinned boundary
    if (bwd_.empty()) throw Error("pair_covariance: workspace built without backward pass");

    // Fresh forward pass seeded at a over the shifted environment gives the
    // pinned segment partition function between a and b.
    const std::int64_t len = b - a;
    std::vector<double> g(static_cast<std::size_t>(len) + 1, 0.0);
    for (std::int64_t j = 1; j <= len; ++j) {
        const std::int64_t lo =
            opts_.cutoff > 0 ? std::max<std::int64_t>(0, j - opts_.cutoff) : 0;
        LogSumExp acc;
        for (std::int64_t i = lo; i < j; ++i)
            acc.add(g[static_cast<std::size_t>(i)] + law_->log_mass(j - i));
        g[static_cast<std::size_t>(j)] = h_ + omega_at(a + j) + acc.value();
    }
    const double log_exx = fwd_[static_cast<std::size_t>(a)] + g[static_cast<std::size_t>(len)] +
                           bwd_[static_cast<std::size_t>(b)] - log_partition();
    const double exx = std::exp(log_exx);
    return exx - contact_marginal(a) * contact_marginal(b);
}

std::vector<double> PolymerWorkspace::contact_moments(int r) const {
    if (r < 1 || r > opts_.r_max)
        throw ValidationError("contact_moments: r exceeds the r_max the workspace was built with");
    std::vector<double> out(static_cast<std::size_t>(r));
    for (int m = 0; m < r; ++m)
        out[static_cast<std::size_t>(m)] =
            moments_[static_cast<std::size_t>(m)][static_cast<std::size_t>(n_)];
    return out;
}

double PolymerWorkspace::mean_contacts() const { return contact_moments(1)[0]; }

double PolymerWorkspace::contact_variance() const {
    const auto m = contact_moments(2);
    return std::max(0.0, m[1] - m[0] * m[0]);
}

double PolymerWorkspace::endpoint_mass() const {
    return std::exp(law_->log_mass(n_) - log_partition_minus());
}

PathSample PolymerWorkspace::sample_path(std::uint64_t seed) const {
    PathSample path;
    Rng rng(seed);
    std::int64_t j = n_;
    while (j > 0) {
        path.renewal_points.push_back(j);
        const double shift = fwd_[static_cast<std::size_t>(j)] - h_ - omega_at(j);
        const double u = rng.uniform01();
        // Inverse CDF over the previous contact, scanned in increasing gap
        // order; in the localized phase the expected scan length is O(1).
        const std::int64_t max_gap =
            opts_.cutoff > 0 ? std::min<std::int64_t>(j, opts_.cutoff) : j;
        double cdf = 0.0;
        std::int64_t chosen = -1;
        for (std::int64_t g = 1; g <= max_gap; ++g) {
            const double w = std::exp(fwd_[static_cast<std::size_t>(j - g)] +
                                      law_->log_mass(g) - shift);
            cdf += w;
            if (u <= cdf) {
                chosen = j - g;
                break;
            }
        }
        if (chosen < 0) {
            // Exhausted the scan: the step probabilities must still account
            // for all mass up to rounding.
            if (cdf < 1.0 - kStepProbabilityTol || cdf > 1.0 + kStepProbabilityTol)
                throw NumericalLeakError("sample_path: step probabilities sum to " +
                                         std::to_string(cdf));
            chosen = j - max_gap;
        }
        path.gaps.push_back(j - chosen);
        j = chosen;
    }
    std::reverse(path.renewal_points.begin(), path.renewal_points.end());
    std::reverse(path.gaps.begin(), path.gaps.end());
    path.contacts = static_cast<std::int64_t>(path.renewal_points.size());
    path.max_gap = *std::max_element(path.gaps.begin(), path.gaps.end());
    return path;
}

PolymerWorkspace build_workspace(const InterArrivalLaw& law, const DisorderSample& disorder,
                                 double h, WorkspaceOptions opts) {
    return PolymerWorkspace(law, disorder.values, h, opts);
}

PolymerWorkspace build_shifted_workspace(const InterArrivalLaw& law,
                                         const DisorderSample& disorder, std::int64_t offset,
                                         std::int64_t m, double h, WorkspaceOptions opts) {
    if (offset < 0 || offset + m > disorder.n)
        throw SizeMismatchError("build_shifted_workspace: window outside the sample");
    std::vector<double> window(disorder.values.begin() + offset,
                               disorder.values.begin() + offset + m);
    return PolymerWorkspace(law, std::move(window), h, opts);
}

BruteForceResult brute_force(const InterArrivalLaw& law, const std::vector<double>& omega,
                             double h) {
    const std::int64_t n = static_cast<std::int64_t>(omega.size());
    if (n < 1) throw SizeMismatchError("brute_force: empty environment");
    if (n > 20) throw TooLargeError("brute_force: limited to n <= 20");

    const std::uint64_t count = 1ULL << (n - 1);
    LogSumExp z_acc;
    std::vector<LogSumExp> site_acc(static_cast<std::size_t>(n));
    LogSumExp l_acc, l2_acc;
    double log_single = 0.0;

    std::vector<std::int64_t> points;
    points.reserve(static_cast<std::size_t>(n));
    for (std::uint64_t mask = 0; mask < count; ++mask) {
        points.clear();
        for (std::int64_t i = 1; i < n; ++i)
            if (mask & (1ULL << (i - 1))) points.push_back(i);
        points.push_back(n);

        double logw = 0.0;
        std::int64_t prev = 0;
        for (const std::int64_t p : points) {
            logw += law.log_mass(p - prev) + h + omega[static_cast<std::size_t>(p - 1)];
            prev = p;
        }
        z_acc.add(logw);
        for (const std::int64_t p : points)
            site_acc[static_cast<std::size_t>(p - 1)].add(logw);
        const double l = static_cast<double>(points.size());
        l_acc.add(logw + std::log(l));
        l2_acc.add(logw + 2.0 * std::log(l));
        if (mask == 0) log_single = logw;  // the single-jump configuration {n}
    }

    BruteForceResult out;
    out.log_z = z_acc.value();
    out.marginals.resize(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i)
        out.marginals[static_cast<std::size_t>(i)] =
            std::exp(site_acc[static_cast<std::size_t>(i)].value() - out.log_z);
    out.mean_contacts = std::exp(l_acc.value() - out.log_z);
    out.second_moment = std::exp(l2_acc.value() - out.log_z);
    out.endpoint_mass = std::exp(log_single - out.log_z);
    return out;
}

}  // namespace pinlab
