#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "pinlab/covariance.hpp"
#include "pinlab/errors.hpp"

using namespace pinlab;

namespace {

Eigen::MatrixXd dense_gamma(const CovarianceSpec& spec, std::int64_t n) {
    Eigen::MatrixXd g(n, n);
    for (std::int64_t i = 0; i < n; ++i)
        for (std::int64_t j = 0; j < n; ++j) g(i, j) = spec.gamma(std::abs(i - j));
    return g;
}

// Euler-Maclaurin tail of sum_{k>r} k^{-s}; independent oracle for the
// partial-sum checks.
double em_tail(double s, double r) {
    return std::pow(r, 1.0 - s) / (s - 1.0) - 0.5 * std::pow(r, -s) +
           s / 12.0 * std::pow(r, -s - 1.0);
}

}  // namespace

TEST_CASE("gamma values per family") {
    const auto iid = CovarianceSpec::iid(1.0);
    CHECK(iid.gamma(0) == 1.0);
    CHECK(iid.gamma(5) == 0.0);

    const auto ed = CovarianceSpec::exp_decay(1.0, 0.5);
    CHECK(ed.gamma(3) == doctest::Approx(0.125).epsilon(1e-15));

    const auto pl = CovarianceSpec::power_law(1.0, 0.2, 0.5);
    CHECK(pl.gamma(4) == doctest::Approx(0.2 * std::pow(4.0, -1.5)).epsilon(1e-15));
    CHECK(pl.gamma(4) == doctest::Approx(0.025).epsilon(1e-15));
}

TEST_CASE("partial absolute sums") {
    CHECK(CovarianceSpec::iid(1.0).gamma_bar_n(17) == 1.0);
    CHECK(CovarianceSpec::exp_decay(1.0, 0.5).gamma_bar_n(3) ==
          doctest::Approx(1.75).epsilon(1e-15));

    const auto pl = CovarianceSpec::power_law(1.0, 0.2, 0.5);
    const std::int64_t n = 1000000;
    const double expected = pl.gamma_bar() - 0.2 * em_tail(1.5, static_cast<double>(n - 1));
    CHECK(pl.gamma_bar_n(n) == doctest::Approx(expected).epsilon(1e-6));
    CHECK(pl.gamma_bar_n(n) <= pl.gamma_bar());
    CHECK(pl.gamma_bar_n(n) >= pl.gamma_bar_n(n / 2));
}

TEST_CASE("truncation matches the quoted entries") {
    const auto ed = CovarianceSpec::exp_decay(1.0, 0.5);
    const auto tr = ed.truncate(2);
    CHECK(tr.family() == CovarianceSpec::Family::FiniteRange);
    CHECK(tr.gamma(0) == doctest::Approx(1.5).epsilon(1e-14));
    CHECK(tr.gamma(1) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(tr.gamma(2) == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(tr.gamma(3) == 0.0);

    const auto iid = CovarianceSpec::iid(1.0);
    CHECK(iid.truncate(4) == iid);

    const auto fr = CovarianceSpec::finite_range({1.0, 0.3, 0.1});
    CHECK(fr.truncate(5) == fr);  // idempotent when the range already fits
}

TEST_CASE("truncation raises the small-n spectrum") {
    for (const auto& spec : {CovarianceSpec::exp_decay(1.0, 0.5),
                             CovarianceSpec::power_law(1.0, 0.2, 0.5)}) {
        const auto tr = spec.truncate(3);
        for (std::int64_t n : {8, 32, 64}) {
            const Eigen::VectorXd ev_orig =
                Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(dense_gamma(spec, n)).eigenvalues();
            const Eigen::VectorXd ev_tr =
                Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(dense_gamma(tr, n)).eigenvalues();
            CHECK(ev_orig.minCoeff() > 0.0);
            CHECK(ev_tr.minCoeff() >= ev_orig.minCoeff() - 1e-12);
        }
    }
}

TEST_CASE("spectral bounds against a dense eigensolve") {
    const auto iid = CovarianceSpec::iid(2.5);
    const auto sb_iid = iid.spectral_bounds(100);
    CHECK(sb_iid.lambda_min == 2.5);
    CHECK(sb_iid.lambda_max == 2.5);

    const auto ed = CovarianceSpec::exp_decay(1.0, 0.5);
    const auto sb = ed.spectral_bounds(64);
    const Eigen::VectorXd ev =
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(dense_gamma(ed, 64)).eigenvalues();
    CHECK(sb.lambda_max <= 2.0 * ed.gamma_bar() + 1e-12);  // Gersgorin: 2 * gamma_bar = 4
    CHECK(sb.lambda_max == doctest::Approx(ev.maxCoeff()).epsilon(1e-6));
    CHECK(sb.lambda_min == doctest::Approx(ev.minCoeff()).epsilon(1e-6));

    // every family obeys lambda_max <= 2 gamma_bar at small n
    for (const auto& spec :
         {CovarianceSpec::finite_range({1.0, 0.3, 0.1}), CovarianceSpec::power_law(1.0, 0.2, 0.5)}) {
        const Eigen::VectorXd evs =
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(dense_gamma(spec, 64)).eigenvalues();
        CHECK(evs.maxCoeff() <= 2.0 * spec.gamma_bar() + 1e-12);
    }
}

TEST_CASE("symbol grid matches the Poisson kernel for exponential decay") {
    const auto ed = CovarianceSpec::exp_decay(1.0, 0.5);
    // closed-form extrema of (1 - rho^2) / (1 - 2 rho cos(theta) + rho^2)
    CHECK(ed.symbol_min() == doctest::Approx((1.0 - 0.5) / (1.0 + 0.5)).epsilon(1e-9));
    CHECK(ed.symbol_max() == doctest::Approx((1.0 + 0.5) / (1.0 - 0.5)).epsilon(1e-9));
    CHECK(ed.invertible_certificate());

    const auto big = ed.spectral_bounds(100000);  // symbol-grid path
    CHECK(big.lambda_min > 0.0);
    CHECK(big.lambda_max <= 2.0 * ed.gamma_bar());
}

TEST_CASE("certification rejects indefinite sequences") {
    CHECK_THROWS_AS(CovarianceSpec::finite_range({1.0, 0.8}), NotPositiveDefiniteError);
    // free gamma_0 must satisfy the symbol certificate
    CHECK_THROWS_AS(CovarianceSpec::power_law(0.05, 0.2, 0.5), NotPositiveDefiniteError);
    CHECK_NOTHROW(CovarianceSpec::power_law(1.0, 0.2, 0.5));
}
