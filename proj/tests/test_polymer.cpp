#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "pinlab/disorder.hpp"
#include "pinlab/errors.hpp"
#include "pinlab/logsumexp.hpp"
#include "pinlab/polymer.hpp"
#include "pinlab/rng.hpp"
#include "pinlab/stats.hpp"
#include "test_util.hpp"

using namespace pinlab;

namespace {

DisorderSample make_sample(std::vector<double> values) {
    DisorderSample s;
    s.n = static_cast<std::int64_t>(values.size());
    s.values = std::move(values);
    return s;
}

std::vector<double> random_omega(std::int64_t n, std::uint64_t seed, double scale = 1.0) {
    Rng rng(seed);
    std::vector<double> v(static_cast<std::size_t>(n));
    for (auto& x : v) x = scale * rng.normal();
    return v;
}

}  // namespace

TEST_CASE("single-site and two-site systems by hand") {
    const auto& law = test::law_alpha(1.0);
    const double h = 0.7, w1 = 0.3, w2 = -0.4;

    const auto ws1 = PolymerWorkspace(law, {w1}, h);
    CHECK(ws1.log_partition() == doctest::Approx(law.log_mass(1) + h + w1).epsilon(1e-14));
    CHECK(ws1.endpoint_mass() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(ws1.contact_marginal(1) == 1.0);

    const auto ws2 = PolymerWorkspace(law, {w1, w2}, h);
    const double direct = log_add(law.log_mass(2) + h + w2,
                                  2.0 * law.log_mass(1) + 2.0 * h + w1 + w2);
    CHECK(ws2.log_partition() == doctest::Approx(direct).epsilon(1e-14));
}

TEST_CASE("hand-computed homogeneous two-site partition function") {
    const auto& law = test::law_alpha(1.0);
    const auto r = brute_force(law, {0.0, 0.0}, 0.0);
    const double p1 = std::exp(law.log_mass(1));
    const double p2 = std::exp(law.log_mass(2));
    CHECK(std::exp(r.log_z) == doctest::Approx(p2 + p1 * p1).epsilon(1e-13));
}

TEST_CASE("dynamic programming agrees with the enumeration oracle") {
    const double alphas[3] = {0.5, 1.0, 1.5};
    Rng rng(2024);
    for (int inst = 0; inst < 40; ++inst) {
        const auto& law = test::law_alpha(alphas[inst % 3]);
        const std::int64_t n = 1 + static_cast<std::int64_t>(rng.uniform01() * 14);
        const double h = -2.0 + 4.0 * rng.uniform01();
        const auto omega = random_omega(n, derive_seed(99, static_cast<std::uint64_t>(inst)));
        const auto ws = PolymerWorkspace(law, omega, h, {.r_max = 2});
        const auto bf = brute_force(law, omega, h);

        CHECK(ws.log_partition() == doctest::Approx(bf.log_z).epsilon(1e-10));
        for (std::int64_t i = 1; i <= n; ++i)
            CHECK(ws.contact_marginal(i) ==
                  doctest::Approx(bf.marginals[static_cast<std::size_t>(i - 1)]).epsilon(1e-9));
        const auto m = ws.contact_moments(2);
        CHECK(m[0] == doctest::Approx(bf.mean_contacts).epsilon(1e-9));
        CHECK(m[1] == doctest::Approx(bf.second_moment).epsilon(1e-9));
        CHECK(ws.endpoint_mass() == doctest::Approx(bf.endpoint_mass).epsilon(1e-9));
    }
}

TEST_CASE("pair covariance against enumeration") {
    const auto& law = test::law_alpha(1.0);
    Rng rng(5);
    for (int inst = 0; inst < 10; ++inst) {
        const std::int64_t n = 6 + static_cast<std::int64_t>(rng.uniform01() * 6);
        const double h = -1.0 + 2.0 * rng.uniform01();
        const auto omega = random_omega(n, derive_seed(123, static_cast<std::uint64_t>(inst)));
        const auto ws = PolymerWorkspace(law, omega, h);
        const auto bf = brute_force(law, omega, h);
        for (std::int64_t a = 1; a < n; ++a)
            for (std::int64_t b = a + 1; b <= n; ++b) {
                const double exx = test::enumerate_pair_mean(law, omega, h, a, b);
                const double expected =
                    exx - bf.marginals[static_cast<std::size_t>(a - 1)] *
                              bf.marginals[static_cast<std::size_t>(b - 1)];
                CHECK(ws.pair_covariance(a, b) == doctest::Approx(expected).epsilon(1e-9));
            }
    }
    // X_n is constant, so its covariances vanish identically
    const auto omega = random_omega(9, 321);
    const auto ws = PolymerWorkspace(law, omega, 0.5);
    CHECK(ws.pair_covariance(3, 9) == 0.0);
}

TEST_CASE("forward and backward partition functions agree at n = 512") {
    const auto& law = test::law_alpha(1.0);
    const auto omega = random_omega(512, 77);
    const auto ws = PolymerWorkspace(law, omega, 1.0);
    CHECK(std::abs(ws.log_partition() -
                   ws.log_backward().front()) <= 1e-9);
    for (std::int64_t i = 1; i <= 512; ++i) {
        const double m = ws.contact_marginal(i);
        CHECK(m >= 0.0);
        CHECK(m <= 1.0);
    }
    CHECK(ws.contact_marginal(512) == 1.0);
    CHECK(ws.log_partition_minus() ==
          doctest::Approx(ws.log_partition() - 1.0 - omega[511]).epsilon(1e-14));
}

TEST_CASE("zero disorder recovers the homogeneous free energy") {
    const auto& law = test::law_alpha(1.0);
    const std::int64_t n = 4096;
    const auto ws = PolymerWorkspace(law, std::vector<double>(n, 0.0), 1.0,
                                     {.backward = false});
    const double f_pure = law.pure_free_energy(1.0);
    CHECK(std::abs(ws.log_partition() / static_cast<double>(n) - f_pure) <= 0.01);
}

TEST_CASE("partition function is monotone in h") {
    const auto& law = test::law_alpha(1.0);
    const auto omega = random_omega(128, 8);
    const auto a = PolymerWorkspace(law, omega, 0.4, {.backward = false});
    const auto b = PolymerWorkspace(law, omega, 0.5, {.backward = false});
    CHECK(b.log_partition() > a.log_partition());
}

TEST_CASE("splitting identities at n = 64") {
    const auto& law = test::law_alpha(1.0);
    DisorderSample disorder = make_sample(random_omega(64, 4242));
    const double h = 0.8;
    const auto ws_n = build_workspace(law, disorder, h);
    Rng rng(17);
    for (int t = 0; t < 12; ++t) {
        const std::int64_t m = 8 + static_cast<std::int64_t>(rng.uniform01() * 48);
        const std::int64_t a = 1 + static_cast<std::int64_t>(rng.uniform01() * (m - 1));
        const std::int64_t b = m + static_cast<std::int64_t>(rng.uniform01() * (64 - m));

        // prefix identity
        const auto ws_m = build_shifted_workspace(law, disorder, 0, m, h);
        const double lhs = ws_n.contact_marginal(a) - ws_m.contact_marginal(a);
        const double rhs = (m == 64 || a == m)
                               ? 0.0
                               : -ws_n.pair_covariance(a, m) / ws_n.contact_marginal(m);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-8));

        // suffix identity over the shifted environment
        if (b > m && b < 64) {
            const auto ws_shift = build_shifted_workspace(law, disorder, m, 64 - m, h);
            const double lhs2 = ws_n.contact_marginal(b) - ws_shift.contact_marginal(b - m);
            const double rhs2 = -ws_n.pair_covariance(m, b) / ws_n.contact_marginal(m);
            CHECK(lhs2 == doctest::Approx(rhs2).epsilon(1e-8));
        }
    }
}

TEST_CASE("moment identities: marginal sum, h-derivatives, covariance sum") {
    const auto& law = test::law_alpha(1.0);
    const std::int64_t n = 48;
    const auto omega = random_omega(n, 606);
    const double h = 1.1;
    const auto ws = PolymerWorkspace(law, omega, h, {.r_max = 2});

    double marg_sum = 0.0;
    for (std::int64_t i = 1; i <= n; ++i) marg_sum += ws.contact_marginal(i);
    const double mean_l = ws.mean_contacts();
    CHECK(marg_sum == doctest::Approx(mean_l).epsilon(1e-8));

    const double delta = 1e-4;
    const auto up = PolymerWorkspace(law, omega, h + delta, {.backward = false});
    const auto dn = PolymerWorkspace(law, omega, h - delta, {.backward = false});
    const double d1 = (up.log_partition() - dn.log_partition()) / (2.0 * delta);
    CHECK(d1 == doctest::Approx(mean_l).epsilon(1e-5));
    const double d2 = (up.log_partition() - 2.0 * ws.log_partition() + dn.log_partition()) /
                      (delta * delta);
    CHECK(d2 == doctest::Approx(ws.contact_variance()).epsilon(1e-4));

    // Var(L_n) equals the full covariance double sum
    double cov_sum = 0.0;
    for (std::int64_t a = 1; a <= n; ++a) {
        const double ma = ws.contact_marginal(a);
        cov_sum += ma * (1.0 - ma);
        for (std::int64_t b = a + 1; b <= n; ++b) cov_sum += 2.0 * ws.pair_covariance(a, b);
    }
    CHECK(cov_sum == doctest::Approx(ws.contact_variance()).epsilon(1e-6));
}

TEST_CASE("path sampling matches exact marginals and moments") {
    const auto& law = test::law_alpha(1.0);
    const std::int64_t n = 10;
    const auto omega = random_omega(n, 31);
    const auto ws = PolymerWorkspace(law, omega, 1.0, {.r_max = 1});

    const std::int64_t paths = 20000;
    std::vector<double> site_hits(static_cast<std::size_t>(n), 0.0);
    MeanVar contacts;
    for (std::int64_t p = 0; p < paths; ++p) {
        const auto path = ws.sample_path(derive_seed(1234, static_cast<std::uint64_t>(p)));
        CHECK(path.renewal_points.back() == n);
        std::int64_t total = 0;
        for (auto g : path.gaps) total += g;
        CHECK(total == n);
        CHECK(path.contacts == static_cast<std::int64_t>(path.renewal_points.size()));
        for (auto pt : path.renewal_points) site_hits[static_cast<std::size_t>(pt - 1)] += 1.0;
        contacts.add(static_cast<double>(path.contacts));
    }
    for (std::int64_t i = 1; i <= n; ++i) {
        const double m = ws.contact_marginal(i);
        const double freq = site_hits[static_cast<std::size_t>(i - 1)] / static_cast<double>(paths);
        const double se = std::sqrt(std::max(m * (1.0 - m), 1e-12) / static_cast<double>(paths));
        CHECK(std::abs(freq - m) <= 4.0 * se + 1e-9);
    }
    const double exact_mean = ws.mean_contacts();
    CHECK(std::abs(contacts.mean() - exact_mean) <= 4.0 * contacts.std_error() + 1e-9);

    const auto single = PolymerWorkspace(law, {0.2}, 1.0).sample_path(9);
    CHECK(single.contacts == 1);
    CHECK(single.max_gap == 1);
}

TEST_CASE("endpoint mass decreases with h on average") {
    const auto& law = test::law_alpha(1.0);
    const DisorderSampler sampler(CovarianceSpec::iid(1.0), 64);
    MeanVar diff;
    for (std::uint64_t r = 0; r < 100; ++r) {
        const auto omega = sampler.sample(derive_seed(55, r));
        const auto lo = build_workspace(law, omega, 0.5, {.backward = false});
        const auto hi = build_workspace(law, omega, 1.5, {.backward = false});
        diff.add(lo.endpoint_mass() - hi.endpoint_mass());
    }
    CHECK(diff.mean() > 0.0);
}

TEST_CASE("kernel cutoff is close to exact in the localized phase and is labeled") {
    const auto& law = test::law_alpha(1.0);
    const auto omega = random_omega(256, 98);
    const auto exact = PolymerWorkspace(law, omega, 1.5, {.backward = false});
    const auto approx =
        PolymerWorkspace(law, omega, 1.5, {.backward = false, .cutoff = 64});
    CHECK(approx.approximate());
    CHECK_FALSE(exact.approximate());
    CHECK(approx.log_partition() <= exact.log_partition());
    CHECK(exact.log_partition() - approx.log_partition() < 1e-6);
}

TEST_CASE("input validation") {
    const auto& law = test::law_alpha(1.0);
    CHECK_THROWS_AS(brute_force(law, std::vector<double>(21, 0.0), 0.0), TooLargeError);
    CHECK_THROWS_AS(PolymerWorkspace(law, std::vector<double>(9000, 0.0), 0.0),
                    SizeMismatchError);
    const auto ws = PolymerWorkspace(law, {0.1, 0.2}, 0.0);
    CHECK_THROWS_AS(ws.contact_marginal(3), OutOfRangeError);
    CHECK_THROWS_AS(ws.contact_moments(1), ValidationError);  // built with r_max = 0
}
