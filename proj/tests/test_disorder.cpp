#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "pinlab/disorder.hpp"
#include "pinlab/errors.hpp"
#include "pinlab/rng.hpp"
#include "pinlab/stats.hpp"

using namespace pinlab;

TEST_CASE("fixed seed reproduces bit-identical samples") {
    for (auto method : {SampleMethod::CirculantEmbedding, SampleMethod::DenseCholesky}) {
        const DisorderSampler s(CovarianceSpec::exp_decay(1.0, 0.5), 64, method);
        const auto a = s.sample(42);
        const auto b = s.sample(42);
        CHECK(a.values == b.values);
        const auto c = s.sample(43);
        CHECK(a.values != c.values);
    }
}

TEST_CASE("iid sampling reduces to independent standard normals") {
    const DisorderSampler s(CovarianceSpec::iid(1.0), 8);
    MeanVar first;
    for (std::uint64_t r = 0; r < 100000; ++r)
        first.add(s.sample(derive_seed(7, r)).omega(1));
    CHECK(std::abs(first.mean()) < 0.02);
    CHECK(first.variance() == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("degenerate iid(0) yields the zero field") {
    const DisorderSampler s(CovarianceSpec::iid(0.0), 16);
    const auto x = s.sample(5);
    for (double v : x.values) CHECK(v == 0.0);
}

TEST_CASE("empirical covariance tracks the spec") {
    const CovarianceSpec spec = CovarianceSpec::exp_decay(1.0, 0.5);
    const DisorderSampler s(spec, 256);
    std::vector<DisorderSample> reps;
    for (std::uint64_t r = 0; r < 500; ++r) reps.push_back(s.sample(derive_seed(11, r)));
    const auto emp = empirical_covariance(reps, 5);
    for (std::int64_t k = 0; k <= 5; ++k) {
        const double err = std::abs(emp.gamma_hat[k] - spec.gamma(k));
        CHECK(err <= 5.0 * emp.std_err[k]);
    }
}

TEST_CASE("empirical covariance on a constant synthetic field") {
    std::vector<DisorderSample> reps;
    for (int r = 0; r < 3; ++r) {
        DisorderSample s;
        s.n = 32;
        s.values.assign(32, 1.5);
        reps.push_back(std::move(s));
    }
    const auto emp = empirical_covariance(reps, 4);
    for (double g : emp.gamma_hat) CHECK(g == doctest::Approx(2.25).epsilon(1e-14));
}

TEST_CASE("empirical covariance input validation") {
    std::vector<DisorderSample> reps(2);
    reps[0].n = 16;
    reps[0].values.assign(16, 0.0);
    reps[1].n = 8;
    reps[1].values.assign(8, 0.0);
    CHECK_THROWS_AS(empirical_covariance(reps, 4), LengthMismatchError);
    reps.pop_back();
    CHECK_THROWS_AS(empirical_covariance(reps, 16), LengthMismatchError);
}

TEST_CASE("circulant and Cholesky paths agree in distribution") {
    const CovarianceSpec spec = CovarianceSpec::exp_decay(1.0, 0.5);
    const DisorderSampler circ(spec, 128, SampleMethod::CirculantEmbedding);
    const DisorderSampler chol(spec, 128, SampleMethod::DenseCholesky);
    std::vector<double> a, b;
    for (std::uint64_t r = 0; r < 800; ++r) {
        a.push_back(circ.sample(derive_seed(3, r)).omega(1));
        b.push_back(chol.sample(derive_seed(10007, r)).omega(1));
    }
    CHECK(ks_distance_two_sample(a, b) < 0.08);
}

TEST_CASE("truncated specs remain sampleable") {
    const auto tr = CovarianceSpec::exp_decay(1.0, 0.5).truncate(3);
    const DisorderSampler s(tr, 128);  // Auto: embedding, else recorded fallback
    const auto x = s.sample(9);
    CHECK(x.n == 128);
    for (double v : x.values) CHECK(std::isfinite(v));
}

TEST_CASE("binary dump round trip") {
    const DisorderSampler s(CovarianceSpec::power_law(1.0, 0.2, 0.5), 64);
    const auto x = s.sample(77);
    const auto path = std::filesystem::temp_directory_path() / "pinlab_test_disorder.bin";
    write_disorder_binary(x, path);
    const auto y = read_disorder_binary(path);
    CHECK(y.n == x.n);
    CHECK(y.values == x.values);
    std::filesystem::remove(path);
}
