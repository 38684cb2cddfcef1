#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "pinlab/config.hpp"
#include "pinlab/csv.hpp"
#include "pinlab/errors.hpp"
#include "pinlab/runner.hpp"

using namespace pinlab;
namespace fs = std::filesystem;

namespace {

ExperimentConfig small_config(Command cmd, const fs::path& out) {
    ExperimentConfig c;
    c.law.horizon = 1000000;
    c.law.n_max = 1024;
    c.command = cmd;
    c.h_grid = {1.0};
    c.n_list = {128};
    c.replicas = 20;
    c.paths = 50;
    c.seed = 12345;
    c.seed_set = true;
    c.output_dir = out.string();
    return c;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    REQUIRE(f.good());
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("config round trip") {
    ExperimentConfig c = small_config(Command::FreeEnergy, "out");
    c.disorder.family = "exp_decay";
    c.disorder.params = {1.0, 0.5};
    c.disorder.label = "ed";
    c.h_grid = {0.5, 1.0, 2.0};
    c.approximate_cutoff = 64;
    const auto parsed = ExperimentConfig::from_json(c.to_json());
    CHECK(parsed == c);
}

TEST_CASE("config validation failures carry field paths") {
    ExperimentConfig c = small_config(Command::FreeEnergy, "out");
    c.seed_set = false;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c.seed_set = true;
    c.n_list = {4096};  // beyond law.n_max = 1024
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c.n_list = {128};
    c.disorder.family = "exp_decay";
    c.disorder.params = {1.0, 1.5};  // |rho| >= 1
    CHECK_THROWS_AS(c.validate(), ValidationError);
    c.disorder.params = {1.0};
    CHECK_THROWS_AS(c.validate(), ValidationError);
}

TEST_CASE("csv round trip: empty, single, many") {
    TempDir tmp("pinlab_csv_test");
    const auto path = tmp.path / "records.csv";

    emit_csv({}, path);
    CHECK(parse_csv(path).empty());
    CHECK(slurp(path) == "name,h,n,replicas,point,std_error,method,seed\n");

    std::vector<EstimateRecord> recs = {
        {"free_energy", 1.0, 128, 20, 0.123456789012345678, 0.001, "replica-mean", 7}};
    emit_csv(recs, path);
    auto back = parse_csv(path);
    REQUIRE(back.size() == 1);
    CHECK(back[0].name == recs[0].name);
    CHECK(back[0].point == recs[0].point);  // exact round trip at 17 digits
    CHECK(back[0].std_error == recs[0].std_error);
    CHECK(back[0].seed == recs[0].seed);

    recs.clear();
    for (int i = 0; i < 500; ++i)
        recs.push_back({"r" + std::to_string(i), 0.1 * i, i, i + 1, 1.0 / (i + 1),
                        1e-9 * i, "m", static_cast<std::uint64_t>(i)});
    emit_csv(recs, path);
    back = parse_csv(path);
    REQUIRE(back.size() == recs.size());
    for (std::size_t i = 0; i < recs.size(); ++i) {
        CHECK(back[i].point == recs[i].point);
        CHECK(back[i].h == recs[i].h);
    }
}

TEST_CASE("runner: free-energy command writes records and a manifest") {
    TempDir tmp("pinlab_run_fe");
    const auto cfg = small_config(Command::FreeEnergy, tmp.path);
    CHECK(run(cfg) == 0);
    const auto records = parse_csv(tmp.path / "estimates.csv");
    REQUIRE(records.size() == 2);  // replica mean + single trajectory
    CHECK(records[0].name == "free_energy");
    CHECK(records[1].name == "free_energy_single");

    const auto manifest = nlohmann::json::parse(slurp(tmp.path / "manifest.json"));
    CHECK(manifest["config"]["command"] == "free-energy");
    CHECK(manifest["output_digests"].contains("estimates.csv"));
    CHECK(manifest["normalization_error"].get<double>() < 1e-8);
}

TEST_CASE("runner: identical config and seed reproduce byte-identical outputs") {
    TempDir a("pinlab_run_det_a"), b("pinlab_run_det_b");
    auto ca = small_config(Command::FreeEnergy, a.path);
    ca.h_grid = {0.5, 1.0};
    auto cb = ca;
    cb.output_dir = b.path.string();
    CHECK(run(ca) == 0);
    CHECK(run(cb) == 0);
    CHECK(slurp(a.path / "estimates.csv") == slurp(b.path / "estimates.csv"));
}

TEST_CASE("runner: mu command reports effective sample sizes") {
    TempDir tmp("pinlab_run_mu");
    auto cfg = small_config(Command::Mu, tmp.path);
    cfg.replicas = 120;
    CHECK(run(cfg) == 0);
    const auto details = nlohmann::json::parse(slurp(tmp.path / "mu_details.json"));
    REQUIRE(details["ess"].size() == 1);
    CHECK(details["ess"][0].contains("ess_fraction"));
}

TEST_CASE("runner: sample-disorder dumps reproducible binary fields") {
    TempDir tmp("pinlab_run_sd");
    auto cfg = small_config(Command::SampleDisorder, tmp.path);
    cfg.replicas = 3;
    CHECK(run(cfg) == 0);
    const auto s0 = read_disorder_binary(tmp.path / "disorder_0000.bin");
    CHECK(s0.n == 128);
    const auto manifest = nlohmann::json::parse(slurp(tmp.path / "manifest.json"));
    CHECK(manifest["stage_seeds"].contains("disorder_0000.bin"));
}

TEST_CASE("runner: cutoff is rejected outside the supported commands") {
    TempDir tmp("pinlab_run_cut");
    auto cfg = small_config(Command::Derivatives, tmp.path);
    cfg.approximate_cutoff = 32;
    CHECK_THROWS_AS(run(cfg), ConfigError);
}

TEST_CASE("runner: cutoff watermarks the output rows") {
    TempDir tmp("pinlab_run_cut2");
    auto cfg = small_config(Command::FreeEnergy, tmp.path);
    cfg.approximate_cutoff = 48;
    CHECK(run(cfg) == 0);
    const auto records = parse_csv(tmp.path / "estimates.csv");
    for (const auto& r : records) CHECK(r.method.find("approximate-cutoff") != std::string::npos);
}
