#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "pinlab/covariance.hpp"
#include "pinlab/disorder.hpp"
#include "pinlab/polymer.hpp"
#include "pinlab/renewal.hpp"

namespace pinlab {

struct EstimateRecord {
    std::string name;
    double h = 0.0;
    std::int64_t n = 0;
    std::int64_t replicas = 0;
    double point = 0.0;
    double std_error = 0.0;
    std::string method;
    std::uint64_t seed = 0;
};

// Replica loop shared by the disorder-averaged estimators: parallel over
// replicas, per-replica seed streams derived from the base seed, results
// written into fixed slots so the reduction order is immaterial.
std::vector<double> per_replica(const InterArrivalLaw& law, const DisorderSampler& sampler,
                                std::int64_t replicas, std::uint64_t base_seed,
                                const std::function<double(const PolymerWorkspace&)>& stat,
                                double h, WorkspaceOptions opts = {});

struct FreeEnergyEstimate {
    EstimateRecord replica_mean;
    EstimateRecord single_trajectory;  // Birkhoff variant: one omega, same n
};

FreeEnergyEstimate free_energy(const InterArrivalLaw& law, const CovarianceSpec& spec, double h,
                               std::int64_t n, std::int64_t replicas, std::uint64_t seed,
                               std::int64_t cutoff = 0);

struct MuEstimate {
    EstimateRecord record;
    double ess = 0.0;      // effective sample size of the 1/Z^- weights
    bool low_ess = false;  // ess < 1% of replicas
};

// Log-domain replica mean of 1/Z^-; the estimand is heavy-tailed, so the
// effective sample size is reported alongside.
MuEstimate mu_hat(const InterArrivalLaw& law, const CovarianceSpec& spec, double h,
                  std::int64_t n, std::int64_t replicas, std::uint64_t seed,
                  std::int64_t cutoff = 0);

// Gap-rate reference: slope of -log E-hat[1/Z^-] between two small sizes,
// where the replica mean is fully resolved. Used by the decay checks.
double mu_reference(const InterArrivalLaw& law, const CovarianceSpec& spec, double h,
                    std::int64_t n_small, std::int64_t n_large, std::int64_t replicas,
                    std::uint64_t seed, int repeats = 1);

std::vector<EstimateRecord> free_energy_derivatives(const InterArrivalLaw& law,
                                                    const CovarianceSpec& spec, double h,
                                                    std::int64_t n, std::int64_t replicas,
                                                    int order, std::uint64_t seed,
                                                    double h_floor = -10.0);

struct CenteringStatistics {
    std::vector<EstimateRecord> rho;        // mean E[L]/size at sizes n/4, n/2, n
    std::vector<EstimateRecord> w;          // var(E[L])/size at the same sizes
    std::vector<double> sizes;
    double halving_defect_small = 0.0;      // |mean(n/2) - 2 mean(n/4)|
    double halving_defect_large = 0.0;      // |mean(n) - 2 mean(n/2)|
};

CenteringStatistics centering_statistics(const InterArrivalLaw& law, const CovarianceSpec& spec,
                                         double h, std::int64_t n, std::int64_t replicas,
                                         std::uint64_t seed);

struct CriticalPointScan {
    std::vector<EstimateRecord> f_curve;
    std::vector<EstimateRecord> mu_curve;
    double h_c_hat = 0.0;
    bool found = false;
    double grid_step = 0.0;
    bool annealed_bound_ok = false;  // h_c_hat <= 0 + grid step
};

CriticalPointScan critical_point_scan(const InterArrivalLaw& law, const CovarianceSpec& spec,
                                      const std::vector<double>& h_grid, std::int64_t n,
                                      std::int64_t replicas, std::uint64_t seed);

}  // namespace pinlab
