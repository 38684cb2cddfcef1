#include "pinlab/covariance.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <utility>

#include "pinlab/errors.hpp"
#include "pinlab/fft.hpp"
#include "pinlab/logsumexp.hpp"

namespace pinlab {

namespace {

constexpr std::size_t kSymbolGridPoints = 4096;
constexpr std::int64_t kDenseSpectralLimit = 4096;
constexpr std::int64_t kDenseEigenLimit = 1024;
constexpr std::int64_t kPowerLawFoldTerms = 1 << 20;

double power_law_partial_abs_sum(double c, double a, std::int64_t r) {
    // sum_{k=1..r} C k^{-1-a}
    KahanSum s;
    for (std::int64_t k = r; k >= 1; --k)
        s.add(std::abs(c) * std::pow(static_cast<double>(k), -(1.0 + a)));
    return s.value();
}

// Euler-Maclaurin tail of sum_{k>r} k^{-s}
double power_law_tail(double c, double a, std::int64_t r) {
    const double s = 1.0 + a;
    const double rd = static_cast<double>(r);
    const double t = std::pow(rd, 1.0 - s) / (s - 1.0) - 0.5 * std::pow(rd, -s) +
                     s / 12.0 * std::pow(rd, -s - 1.0);
    return std::abs(c) * t;
}

}  // namespace

CovarianceSpec CovarianceSpec::iid(double sigma2, std::string label) {
    if (sigma2 < 0.0) throw ValidationError("CovarianceSpec::iid: sigma2 must be >= 0");
    CovarianceSpec s;
    s.family_ = Family::Iid;
    s.params_ = {sigma2};
    s.label_ = std::move(label);
    s.gamma_bar_ = sigma2;
    s.symbol_min_ = sigma2;
    s.symbol_max_ = sigma2;
    return s;
}

CovarianceSpec CovarianceSpec::finite_range(std::vector<double> gammas, std::string label) {
    if (gammas.empty()) throw ValidationError("CovarianceSpec::finite_range: empty sequence");
    CovarianceSpec s;
    s.family_ = Family::FiniteRange;
    s.range_gammas_ = std::move(gammas);
    s.label_ = std::move(label);
    KahanSum bar;
    for (double g : s.range_gammas_) bar.add(std::abs(g));
    s.gamma_bar_ = bar.value();
    s.certify();
    return s;
}

CovarianceSpec CovarianceSpec::exp_decay(double gamma0, double rho, std::string label) {
    if (gamma0 <= 0.0) throw ValidationError("CovarianceSpec::exp_decay: gamma0 must be > 0");
    if (std::abs(rho) >= 1.0) throw ValidationError("CovarianceSpec::exp_decay: need |rho| < 1");
    CovarianceSpec s;
    s.family_ = Family::ExpDecay;
    s.params_ = {gamma0, rho};
    s.label_ = std::move(label);
    s.gamma_bar_ = gamma0 / (1.0 - std::abs(rho));
    s.certify();
    return s;
}

CovarianceSpec CovarianceSpec::power_law(double gamma0, double c, double a, std::string label) {
    if (gamma0 <= 0.0) throw ValidationError("CovarianceSpec::power_law: gamma0 must be > 0");
    if (a <= 0.0) throw ValidationError("CovarianceSpec::power_law: need a > 0");
    CovarianceSpec s;
    s.family_ = Family::PowerLaw;
    s.params_ = {gamma0, c, a};
    s.label_ = std::move(label);
    s.gamma_bar_ = gamma0 + std::abs(c) * std::riemann_zeta(1.0 + a);
    s.certify();
    return s;
}

double CovarianceSpec::gamma(std::int64_t k) const {
    if (k < 0) throw ValidationError("CovarianceSpec::gamma: k must be >= 0");
    switch (family_) {
        case Family::Iid:
            return k == 0 ? params_[0] : 0.0;
        case Family::FiniteRange:
            return k < static_cast<std::int64_t>(range_gammas_.size())
                       ? range_gammas_[static_cast<std::size_t>(k)]
                       : 0.0;
        case Family::ExpDecay:
            return params_[0] * std::pow(params_[1], static_cast<double>(k));
        case Family::PowerLaw:
            return k == 0 ? params_[0]
                          : params_[1] * std::pow(static_cast<double>(k), -(1.0 + params_[2]));
    }
    return 0.0;
}

double CovarianceSpec::gamma_bar_n(std::int64_t n) const {
    if (n < 1) throw ValidationError("CovarianceSpec::gamma_bar_n: n must be >= 1");
    switch (family_) {
        case Family::Iid:
            return params_[0];
        case Family::FiniteRange: {
            KahanSum s;
            const std::int64_t m =
                std::min<std::int64_t>(n, static_cast<std::int64_t>(range_gammas_.size()));
            for (std::int64_t k = 0; k < m; ++k)
                s.add(std::abs(range_gammas_[static_cast<std::size_t>(k)]));
            return s.value();
        }
        case Family::ExpDecay: {
            const double r = std::abs(params_[1]);
            if (r == 0.0) return params_[0];
            return params_[0] * (1.0 - std::pow(r, static_cast<double>(n))) / (1.0 - r);
        }
        case Family::PowerLaw:
            return params_[0] + power_law_partial_abs_sum(params_[1], params_[2], n - 1);
    }
    return 0.0;
}

double CovarianceSpec::tail_abs_sum(std::int64_t r) const {
    if (r < 0) throw ValidationError("CovarianceSpec::tail_abs_sum: r must be >= 0");
    switch (family_) {
        case Family::Iid:
            return 0.0;
        case Family::FiniteRange: {
            KahanSum s;
            for (std::int64_t k = static_cast<std::int64_t>(range_gammas_.size()) - 1; k > r; --k)
                s.add(std::abs(range_gammas_[static_cast<std::size_t>(k)]));
            return s.value();
        }
        case Family::ExpDecay: {
            const double rho = std::abs(params_[1]);
            if (rho == 0.0) return 0.0;
            return params_[0] * std::pow(rho, static_cast<double>(r + 1)) / (1.0 - rho);
        }
        case Family::PowerLaw: {
            if (r >= 1000000) return power_law_tail(params_[1], params_[2], r);
            const double partial = power_law_partial_abs_sum(params_[1], params_[2], r);
            return std::abs(params_[1]) * std::riemann_zeta(1.0 + params_[2]) - partial;
        }
    }
    return 0.0;
}

CovarianceSpec CovarianceSpec::truncate(std::int64_t r) const {
    if (r < 1) throw ValidationError("CovarianceSpec::truncate: r must be >= 1");
    if (family_ == Family::Iid) return *this;
    if (family_ == Family::FiniteRange &&
        static_cast<std::int64_t>(range_gammas_.size()) - 1 <= r)
        return *this;
    std::vector<double> g(static_cast<std::size_t>(r + 1));
    g[0] = gamma(0) + 2.0 * tail_abs_sum(r);
    for (std::int64_t k = 1; k <= r; ++k) g[static_cast<std::size_t>(k)] = gamma(k);
    return finite_range(std::move(g), label_ + ":r" + std::to_string(r));
}

void CovarianceSpec::certify() {
    // Fold the coefficient sequence modulo the grid size; one FFT then gives
    // the truncated symbol at all grid angles exactly.
    const std::size_t m = kSymbolGridPoints;
    std::vector<std::complex<double>> folded(m, 0.0);
    folded[0] = gamma(0);
    std::int64_t terms = 0;
    double tail_slack = 0.0;
    switch (family_) {
        case Family::Iid:
            terms = 0;
            break;
        case Family::FiniteRange:
            terms = static_cast<std::int64_t>(range_gammas_.size()) - 1;
            break;
        case Family::ExpDecay: {
            // stop once the geometric tail is negligible
            const double rho = std::abs(params_[1]);
            terms = rho == 0.0 ? 0 : static_cast<std::int64_t>(std::ceil(-40.0 / std::log(rho)));
            tail_slack = 2.0 * tail_abs_sum(terms);
            break;
        }
        case Family::PowerLaw:
            terms = kPowerLawFoldTerms;
            tail_slack = 2.0 * tail_abs_sum(terms);
            break;
    }
    for (std::int64_t k = 1; k <= terms; ++k)
        folded[static_cast<std::size_t>(k % static_cast<std::int64_t>(m))] += 2.0 * gamma(k);
    fft_pow2(folded, false);
    double lo = folded[0].real(), hi = folded[0].real();
    for (const auto& z : folded) {
        lo = std::min(lo, z.real());
        hi = std::max(hi, z.real());
    }
    symbol_min_ = lo - tail_slack;
    symbol_max_ = hi + tail_slack;
    const double scale = std::max(1.0, std::abs(gamma(0)));
    if (symbol_min_ < -1e-12 * scale)
        throw NotPositiveDefiniteError("CovarianceSpec: Toeplitz symbol negative on the grid (" +
                                       label_ + ")");
    if (symbol_min_ < 0.0) symbol_min_ = 0.0;
}

SpectralBounds CovarianceSpec::spectral_bounds(std::int64_t n) const {
    if (n < 1) throw ValidationError("CovarianceSpec::spectral_bounds: n must be >= 1");
    if (family_ == Family::Iid) return {params_[0], params_[0]};

    if (n > kDenseSpectralLimit) {
        return {std::max(symbol_min_, 0.0), std::min(2.0 * gamma_bar_, symbol_max_)};
    }

    Eigen::MatrixXd g(n, n);
    for (std::int64_t i = 0; i < n; ++i)
        for (std::int64_t j = 0; j <= i; ++j) {
            const double v = gamma(i - j);
            g(i, j) = v;
            g(j, i) = v;
        }
    Eigen::LLT<Eigen::MatrixXd> llt(g);
    if (llt.info() != Eigen::Success)
        throw NotPositiveDefiniteError("CovarianceSpec::spectral_bounds: Cholesky failed for " +
                                       label_);

    if (n <= kDenseEigenLimit) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g, Eigen::EigenvaluesOnly);
        return {es.eigenvalues().minCoeff(),
                std::min(es.eigenvalues().maxCoeff(), 2.0 * gamma_bar_)};
    }
    // Cholesky succeeded, so the matrix is positive definite; report the
    // certified symbol interval (principal submatrices satisfy
    // symbol_min <= lambda <= symbol_max).
    return {std::max(symbol_min_, 0.0), std::min(2.0 * gamma_bar_, symbol_max_)};
}

bool CovarianceSpec::operator==(const CovarianceSpec& other) const {
    return family_ == other.family_ && params_ == other.params_ &&
           range_gammas_ == other.range_gammas_ && label_ == other.label_;
}

}  // namespace pinlab
