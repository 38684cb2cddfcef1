#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "pinlab/errors.hpp"
#include "pinlab/estimators.hpp"
#include "test_util.hpp"

using namespace pinlab;

namespace {
const CovarianceSpec kZero = CovarianceSpec::iid(0.0, "zero");
const CovarianceSpec kIid = CovarianceSpec::iid(1.0, "iid-1");
}  // namespace

TEST_CASE("free energy reproduces the homogeneous oracle on zero disorder") {
    const auto& law = test::law_alpha(1.0);
    const auto est = free_energy(law, kZero, 1.0, 2048, 2, 7);
    CHECK(std::abs(est.replica_mean.point - law.pure_free_energy(1.0)) <= 0.01);
    CHECK(est.replica_mean.std_error == 0.0);  // deterministic environment
    CHECK(est.single_trajectory.point == est.replica_mean.point);
}

TEST_CASE("free energy vanishes deep in the delocalized phase") {
    const auto& law = test::law_alpha(1.0);
    const std::int64_t n = 1024;
    const auto est = free_energy(law, kIid, -10.0, n, 20, 11);
    const double single_jump = (law.log_mass(n) - 10.0) / static_cast<double>(n);
    CHECK(std::abs(est.replica_mean.point - single_jump) <= 0.01);
    CHECK(std::abs(est.replica_mean.point) <= 0.05);
}

TEST_CASE("free energy is monotone in h under common random numbers") {
    const auto& law = test::law_alpha(1.0);
    const auto lo = free_energy(law, kIid, 0.5, 512, 30, 3);
    const auto hi = free_energy(law, kIid, 1.0, 512, 30, 3);
    CHECK(lo.replica_mean.point < hi.replica_mean.point);
}

TEST_CASE("mu_hat equals the free energy for a deterministic environment") {
    const auto& law = test::law_alpha(1.0);
    const std::int64_t n = 2048;
    const auto mu = mu_hat(law, kZero, 1.0, n, 100, 5);
    CHECK(std::abs(mu.record.point - law.pure_free_energy(1.0)) <= 0.02);
    CHECK(mu.ess == doctest::Approx(100.0).epsilon(1e-9));  // all weights equal
    CHECK_FALSE(mu.low_ess);
}

TEST_CASE("mu_hat respects the sandwich and Lipschitz bounds") {
    const auto& law = test::law_alpha(1.0);
    const std::int64_t n = 512;
    for (double h : {0.5, 1.0, 2.0}) {
        const auto mu = mu_hat(law, kIid, h, n, 200, 21);
        const auto f = free_energy(law, kIid, h, n, 200, 21);  // same seed stream
        const double comb =
            3.0 * std::hypot(mu.record.std_error, f.replica_mean.std_error);
        CHECK(mu.record.point <= f.replica_mean.point + comb);
    }
    const auto a = mu_hat(law, kIid, 1.0, n, 200, 21);
    const auto b = mu_hat(law, kIid, 1.2, n, 200, 21);
    const double comb = 3.0 * std::hypot(a.record.std_error, b.record.std_error);
    CHECK(std::abs(b.record.point - a.record.point) <= 0.2 + comb);
    CHECK_THROWS_AS(mu_hat(law, kIid, 1.0, 128, 50, 1), ValidationError);
}

TEST_CASE("mu_reference is positive and below the free energy in the localized phase") {
    const auto& law = test::law_alpha(1.0);
    const double mu_ref = mu_reference(law, kIid, 1.5, 16, 32, 20000, 13);
    const auto f = free_energy(law, kIid, 1.5, 512, 50, 13);
    CHECK(mu_ref > 0.0);
    CHECK(mu_ref <= f.replica_mean.point + 0.1);
}

TEST_CASE("derivative estimators cross-check against finite differences") {
    const auto& law = test::law_alpha(1.0);
    const std::int64_t n = 512;
    const auto recs = free_energy_derivatives(law, kIid, 1.0, n, 40, 2, 17);
    REQUIRE(recs.size() == 2);
    const auto& rho = recs[0];
    const auto& v = recs[1];
    CHECK(rho.name == "rho");
    CHECK(v.name == "v");
    CHECK(v.point > 3.0 * v.std_error);  // strict convexity indicator

    // rho against a central difference of the free energy (common seeds)
    const double delta = 0.02;
    const auto up = free_energy(law, kIid, 1.0 + delta, n, 40, 17);
    const auto dn = free_energy(law, kIid, 1.0 - delta, n, 40, 17);
    const double fd = (up.replica_mean.point - dn.replica_mean.point) / (2.0 * delta);
    const double comb = std::hypot(up.replica_mean.std_error, dn.replica_mean.std_error) /
                            (2.0 * delta) +
                        rho.std_error;
    CHECK(std::abs(rho.point - fd) <= 3.0 * comb + 5e-3);
}

TEST_CASE("second derivative matches the homogeneous oracle on zero disorder") {
    const auto& law = test::law_alpha(1.0);
    const auto recs = free_energy_derivatives(law, kZero, 1.0, 2048, 2, 2, 23);
    const double delta = 0.05;
    const double oracle = (law.pure_free_energy(1.0 + delta) - 2.0 * law.pure_free_energy(1.0) +
                           law.pure_free_energy(1.0 - delta)) /
                          (delta * delta);
    CHECK(std::abs(recs[1].point - oracle) <= 5e-3);
}

TEST_CASE("third derivative stencil runs and respects the floor") {
    const auto& law = test::law_alpha(1.0);
    const auto recs = free_energy_derivatives(law, kIid, 1.0, 256, 20, 3, 29);
    REQUIRE(recs.size() == 3);
    CHECK(recs[2].name == "d3f");
    CHECK(std::isfinite(recs[2].point));
    CHECK_THROWS_AS(free_energy_derivatives(law, kIid, -9.95, 64, 4, 3, 29),
                    StencilOutOfRangeError);
}

TEST_CASE("centering statistics: zero disorder gives w = 0 exactly") {
    const auto& law = test::law_alpha(1.0);
    const auto cs = centering_statistics(law, kZero, 1.0, 256, 16, 31);
    for (const auto& w : cs.w) CHECK(w.point == 0.0);
}

TEST_CASE("centering statistics: invertible disorder gives positive w and bounded defects") {
    const auto& law = test::law_alpha(1.0);
    const auto cs = centering_statistics(law, CovarianceSpec::exp_decay(1.0, 0.5), 1.0, 512,
                                         200, 37);
    const auto& w_large = cs.w.back();
    CHECK(w_large.point > 3.0 * w_large.std_error);

    // the halving defect must not scale with n
    const double se_mean =
        cs.rho.back().std_error * cs.sizes.back() +
        2.0 * cs.rho[1].std_error * cs.sizes[1] + 4.0 * cs.rho[0].std_error * cs.sizes[0];
    CHECK(cs.halving_defect_large <=
          std::max(2.0 * cs.halving_defect_small, 1.0) + 4.0 * se_mean);
}

TEST_CASE("critical point scan brackets zero for the homogeneous model") {
    const auto& law = test::law_alpha(1.0);
    const std::vector<double> grid = {-0.2, -0.1, 0.0, 0.1, 0.2};
    const auto scan = critical_point_scan(law, kZero, grid, 1024, 2, 41);
    REQUIRE(scan.found);
    CHECK(std::abs(scan.h_c_hat) <= scan.grid_step + 1e-12);
    CHECK(scan.annealed_bound_ok);
}

TEST_CASE("critical point scan: iid disorder localizes at h <= grid step") {
    const auto& law = test::law_alpha(1.0);
    const std::vector<double> grid = {-0.6, -0.4, -0.2, 0.0, 0.2, 0.4};
    const auto scan = critical_point_scan(law, kIid, grid, 512, 60, 43);
    REQUIRE(scan.found);
    CHECK(scan.h_c_hat <= 0.0 + scan.grid_step + 1e-12);
}

TEST_CASE("critical point scan requires a delocalized left end") {
    const auto& law = test::law_alpha(1.0);
    const std::vector<double> grid = {0.5, 0.75, 1.0, 1.25, 1.5};
    CHECK_THROWS_AS(critical_point_scan(law, kIid, grid, 256, 40, 47), NotBracketedError);
}
