#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "pinlab/covariance.hpp"

namespace pinlab {

// One realization omega_1..omega_n. Indices are 1-based to follow the
// environment convention; shifts are taken as index offsets, never copies.
struct DisorderSample {
    std::int64_t n = 0;
    std::vector<double> values;
    std::uint64_t seed = 0;
    std::string spec_label;

    [[nodiscard]] double omega(std::int64_t i) const { return values[static_cast<std::size_t>(i - 1)]; }
};

enum class SampleMethod { Auto, CirculantEmbedding, DenseCholesky };

std::string to_string(SampleMethod m);

// Reusable sampling plan for one (spec, n): the embedding eigenvalues or the
// dense Cholesky factor are computed once. sample() is const and safe to
// call concurrently; replicas get disjoint seed streams via derive_seed.
class DisorderSampler {
public:
    DisorderSampler(CovarianceSpec spec, std::int64_t n, SampleMethod method = SampleMethod::Auto);

    [[nodiscard]] DisorderSample sample(std::uint64_t seed) const;

    [[nodiscard]] std::int64_t n() const { return n_; }
    [[nodiscard]] const CovarianceSpec& spec() const { return spec_; }
    [[nodiscard]] SampleMethod resolved_method() const { return resolved_; }
    [[nodiscard]] bool fell_back_to_cholesky() const { return fallback_; }

private:
    CovarianceSpec spec_;
    std::int64_t n_;
    SampleMethod resolved_ = SampleMethod::CirculantEmbedding;
    bool fallback_ = false;
    std::vector<double> sqrt_eigs_;                    // circulant path, size M
    std::shared_ptr<std::vector<double>> chol_;        // dense path, row-major lower factor

    void build_circulant();
    bool try_build_circulant();
    void build_cholesky();
};

// Convenience one-off sampler.
DisorderSample sample_disorder(const CovarianceSpec& spec, std::int64_t n, std::uint64_t seed,
                               SampleMethod method = SampleMethod::Auto);

struct EmpiricalCovariance {
    std::vector<double> gamma_hat;
    std::vector<double> std_err;
};

// Lag-k products averaged across positions and replicas; standard errors
// from the replica spread.
EmpiricalCovariance empirical_covariance(const std::vector<DisorderSample>& samples,
                                         std::int64_t k_max);

// Little-endian binary dump: 8-byte magic, uint64 n, then n doubles.
inline constexpr char kDisorderMagic[8] = {'P', 'I', 'N', 'O', 'M', 'G', 'A', '1'};
void write_disorder_binary(const DisorderSample& sample, const std::filesystem::path& path);
DisorderSample read_disorder_binary(const std::filesystem::path& path);

}  // namespace pinlab
