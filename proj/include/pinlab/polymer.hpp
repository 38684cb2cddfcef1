#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "pinlab/disorder.hpp"
#include "pinlab/renewal.hpp"

namespace pinlab {

// One renewal trajectory under the quenched Gibbs law.
struct PathSample {
    std::vector<std::int64_t> renewal_points;  // strictly increasing, ends at n
    std::vector<std::int64_t> gaps;            // inter-arrival gaps, sum to n
    std::int64_t contacts = 0;                 // L_n
    std::int64_t max_gap = 0;                  // M_n
};

struct WorkspaceOptions {
    int r_max = 0;              // contact-moment order kept by the forward pass (0..4)
    bool backward = true;       // build the backward array (marginals, covariances)
    std::int64_t cutoff = 0;    // 0 = exact; else drop p(t) for t > cutoff (approximate)
};

// Log-domain forward/backward arrays for one (law, omega, h). All Gibbs
// queries for that triple are answered from here. Built once, then read-only.
class PolymerWorkspace {
public:
    PolymerWorkspace(const InterArrivalLaw& law, std::vector<double> omega, double h,
                     WorkspaceOptions opts = {});

    [[nodiscard]] std::int64_t n() const { return n_; }
    [[nodiscard]] double h() const { return h_; }
    [[nodiscard]] bool approximate() const { return opts_.cutoff > 0; }
    [[nodiscard]] const WorkspaceOptions& options() const { return opts_; }

    [[nodiscard]] double log_partition() const { return fwd_[static_cast<std::size_t>(n_)]; }
    [[nodiscard]] double log_partition_minus() const;

    // P(X_i = 1); requires the backward array.
    [[nodiscard]] double contact_marginal(std::int64_t i) const;

    // Cov(X_a, X_b) for 1 <= a < b <= n; exact zero at b = n.
    [[nodiscard]] double pair_covariance(std::int64_t a, std::int64_t b) const;

    // E[L_n^m] for m = 1..r (requires r <= r_max at build time).
    [[nodiscard]] std::vector<double> contact_moments(int r) const;
    [[nodiscard]] double mean_contacts() const;      // E[L_n]
    [[nodiscard]] double contact_variance() const;   // Var(L_n), clamped at 0

    // P(T_1 = n) = p(n) / Z^-.
    [[nodiscard]] double endpoint_mass() const;

    // Exact backward sampling from the quenched Gibbs law.
    [[nodiscard]] PathSample sample_path(std::uint64_t seed) const;

    [[nodiscard]] const std::vector<double>& log_forward() const { return fwd_; }
    [[nodiscard]] const std::vector<double>& log_backward() const { return bwd_; }

private:
    const InterArrivalLaw* law_;
    std::vector<double> omega_;  // omega_[i-1] = omega_i
    double h_;
    std::int64_t n_;
    WorkspaceOptions opts_;
    std::vector<double> fwd_;                       // F[0..n]
    std::vector<double> bwd_;                       // B[0..n]
    std::array<std::vector<double>, 4> moments_;    // conditional moments given a pin at j

    [[nodiscard]] double omega_at(std::int64_t i) const { return omega_[static_cast<std::size_t>(i - 1)]; }
    void build_forward();
    void build_backward();
};

PolymerWorkspace build_workspace(const InterArrivalLaw& law, const DisorderSample& disorder,
                                 double h, WorkspaceOptions opts = {});

// Workspace over the shifted environment omega_{offset+1} .. omega_{offset+m}.
PolymerWorkspace build_shifted_workspace(const InterArrivalLaw& law,
                                         const DisorderSample& disorder, std::int64_t offset,
                                         std::int64_t m, double h, WorkspaceOptions opts = {});

// Enumeration oracle for n <= 20: every subset of {1..n-1} union {n} is a
// configuration. Weights accumulated in log domain.
struct BruteForceResult {
    double log_z = 0.0;
    std::vector<double> marginals;   // index 1..n at [i-1]
    double mean_contacts = 0.0;      // E[L_n]
    double second_moment = 0.0;      // E[L_n^2]
    double endpoint_mass = 0.0;      // P(T_1 = n)
};

BruteForceResult brute_force(const InterArrivalLaw& law, const std::vector<double>& omega,
                             double h);

}  // namespace pinlab
