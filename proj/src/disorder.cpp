#include "pinlab/disorder.hpp"

#include <Eigen/Dense>
#include <bit>
#include <cmath>
#include <complex>
#include <cstring>
#include <fstream>

#include "pinlab/errors.hpp"
#include "pinlab/fft.hpp"
#include "pinlab/rng.hpp"
#include "pinlab/stats.hpp"

static_assert(std::endian::native == std::endian::little,
              "binary disorder dumps assume a little-endian host");

namespace pinlab {

std::string to_string(SampleMethod m) {
    switch (m) {
        case SampleMethod::Auto: return "auto";
        case SampleMethod::CirculantEmbedding: return "circulant-embedding";
        case SampleMethod::DenseCholesky: return "dense-cholesky";
    }
    return "?";
}

namespace {
constexpr std::int64_t kDenseCholeskyLimit = 8192;
}

DisorderSampler::DisorderSampler(CovarianceSpec spec, std::int64_t n, SampleMethod method)
    : spec_(std::move(spec)), n_(n) {
    if (n < 1) throw ValidationError("DisorderSampler: n must be >= 1");
    switch (method) {
        case SampleMethod::CirculantEmbedding:
            build_circulant();
            resolved_ = SampleMethod::CirculantEmbedding;
            break;
        case SampleMethod::DenseCholesky:
            build_cholesky();
            resolved_ = SampleMethod::DenseCholesky;
            break;
        case SampleMethod::Auto:
            if (try_build_circulant()) {
                resolved_ = SampleMethod::CirculantEmbedding;
            } else {
                fallback_ = true;
                build_cholesky();
                resolved_ = SampleMethod::DenseCholesky;
            }
            break;
    }
}

bool DisorderSampler::try_build_circulant() {
    const std::size_t m = next_power_of_two(static_cast<std::size_t>(2 * n_));
    std::vector<std::complex<double>> c(m);
    for (std::size_t j = 0; j < m; ++j) {
        const std::size_t k = std::min(j, m - j);
        c[j] = spec_.gamma(static_cast<std::int64_t>(k));
    }
    fft_pow2(c, false);
    const double tol = 1e-12 * std::max(1.0, spec_.gamma(0));
    sqrt_eigs_.assign(m, 0.0);
    for (std::size_t j = 0; j < m; ++j) {
        const double lambda = c[j].real();
        if (lambda < -tol) {
            sqrt_eigs_.clear();
            return false;  // embedding not nonnegative
        }
        sqrt_eigs_[j] = std::sqrt(std::max(lambda, 0.0));
    }
    return true;
}

void DisorderSampler::build_circulant() {
    if (!try_build_circulant())
        throw NotPositiveDefiniteError("DisorderSampler: circulant embedding has negative eigenvalues for " +
                                       spec_.label());
}

void DisorderSampler::build_cholesky() {
    if (n_ > kDenseCholeskyLimit)
        throw NotPositiveDefiniteError("DisorderSampler: dense Cholesky fallback limited to n <= 8192");
    Eigen::MatrixXd g(n_, n_);
    for (std::int64_t i = 0; i < n_; ++i)
        for (std::int64_t j = 0; j <= i; ++j) {
            const double v = spec_.gamma(i - j);
            g(i, j) = v;
            g(j, i) = v;
        }
    Eigen::LLT<Eigen::MatrixXd> llt(g);
    if (llt.info() != Eigen::Success)
        throw NotPositiveDefiniteError("DisorderSampler: Gamma_n is not positive definite for " +
                                       spec_.label());
    Eigen::MatrixXd l = llt.matrixL();
    chol_ = std::make_shared<std::vector<double>>(static_cast<std::size_t>(n_ * n_), 0.0);
    for (std::int64_t i = 0; i < n_; ++i)
        for (std::int64_t j = 0; j <= i; ++j)
            (*chol_)[static_cast<std::size_t>(i * n_ + j)] = l(i, j);
}

DisorderSample DisorderSampler::sample(std::uint64_t seed) const {
    DisorderSample out;
    out.n = n_;
    out.seed = seed;
    out.spec_label = spec_.label();
    out.values.resize(static_cast<std::size_t>(n_));
    Rng rng(seed);

    if (resolved_ == SampleMethod::CirculantEmbedding) {
        const std::size_t m = sqrt_eigs_.size();
        std::vector<std::complex<double>> v(m);
        for (std::size_t k = 0; k < m; ++k) {
            const double a = rng.normal();
            const double b = rng.normal();
            v[k] = sqrt_eigs_[k] * std::complex<double>(a, b);
        }
        fft_pow2(v, true);
        const double scale = 1.0 / std::sqrt(static_cast<double>(m));
        for (std::int64_t i = 0; i < n_; ++i)
            out.values[static_cast<std::size_t>(i)] = v[static_cast<std::size_t>(i)].real() * scale;
        return out;
    }

    std::vector<double> z(static_cast<std::size_t>(n_));
    for (auto& x : z) x = rng.normal();
    const std::vector<double>& l = *chol_;
    for (std::int64_t i = 0; i < n_; ++i) {
        double acc = 0.0;
        const double* row = l.data() + i * n_;
        for (std::int64_t j = 0; j <= i; ++j) acc += row[j] * z[static_cast<std::size_t>(j)];
        out.values[static_cast<std::size_t>(i)] = acc;
    }
    return out;
}

DisorderSample sample_disorder(const CovarianceSpec& spec, std::int64_t n, std::uint64_t seed,
                               SampleMethod method) {
    return DisorderSampler(spec, n, method).sample(seed);
}

EmpiricalCovariance empirical_covariance(const std::vector<DisorderSample>& samples,
                                         std::int64_t k_max) {
    if (samples.empty()) throw LengthMismatchError("empirical_covariance: no samples");
    const std::int64_t n = samples.front().n;
    for (const auto& s : samples)
        if (s.n != n) throw LengthMismatchError("empirical_covariance: samples differ in length");
    if (n < k_max + 1)
        throw LengthMismatchError("empirical_covariance: need n >= k_max + 1");

    EmpiricalCovariance out;
    out.gamma_hat.resize(static_cast<std::size_t>(k_max + 1));
    out.std_err.resize(static_cast<std::size_t>(k_max + 1));
    for (std::int64_t k = 0; k <= k_max; ++k) {
        MeanVar acc;
        for (const auto& s : samples) {
            double lag = 0.0;
            const std::int64_t terms = n - k;
            for (std::int64_t i = 0; i < terms; ++i)
                lag += s.values[static_cast<std::size_t>(i)] *
                       s.values[static_cast<std::size_t>(i + k)];
            acc.add(lag / static_cast<double>(terms));
        }
        out.gamma_hat[static_cast<std::size_t>(k)] = acc.mean();
        out.std_err[static_cast<std::size_t>(k)] = acc.std_error();
    }
    return out;
}

void write_disorder_binary(const DisorderSample& sample, const std::filesystem::path& path) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("write_disorder_binary: cannot open " + path.string());
    f.write(kDisorderMagic, sizeof(kDisorderMagic));
    const std::uint64_t n = static_cast<std::uint64_t>(sample.n);
    f.write(reinterpret_cast<const char*>(&n), sizeof(n));
    f.write(reinterpret_cast<const char*>(sample.values.data()),
            static_cast<std::streamsize>(sample.values.size() * sizeof(double)));
    if (!f) throw IoError("write_disorder_binary: short write to " + path.string());
}

DisorderSample read_disorder_binary(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("read_disorder_binary: cannot open " + path.string());
    char magic[8];
    f.read(magic, sizeof(magic));
    if (!f || std::memcmp(magic, kDisorderMagic, sizeof(magic)) != 0)
        throw IoError("read_disorder_binary: bad magic in " + path.string());
    std::uint64_t n = 0;
    f.read(reinterpret_cast<char*>(&n), sizeof(n));
    DisorderSample out;
    out.n = static_cast<std::int64_t>(n);
    out.values.resize(n);
    f.read(reinterpret_cast<char*>(out.values.data()),
           static_cast<std::streamsize>(n * sizeof(double)));
    if (!f) throw IoError("read_disorder_binary: truncated file " + path.string());
    return out;
}

}  // namespace pinlab
