#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pinlab/covariance.hpp"
#include "pinlab/renewal.hpp"

namespace pinlab {

struct LawConfig {
    double alpha = 1.0;
    EllSpec ell = EllSpec::constant(1.0);
    std::int64_t horizon = 10000000;
    std::int64_t n_max = 8192;

    [[nodiscard]] InterArrivalLaw build() const;
    [[nodiscard]] nlohmann::json to_json() const;
    static LawConfig from_json(const nlohmann::json& j);
    bool operator==(const LawConfig&) const = default;
};

struct DisorderConfig {
    std::string family = "iid";  // iid | finite_range | exp_decay | power_law
    std::vector<double> params = {1.0};
    std::string label = "iid-1";

    [[nodiscard]] CovarianceSpec build() const;
    [[nodiscard]] nlohmann::json to_json() const;
    static DisorderConfig from_json(const nlohmann::json& j);
    bool operator==(const DisorderConfig&) const = default;
};

enum class Command {
    FreeEnergy,
    Mu,
    Derivatives,
    Centering,
    Gap,
    Clt,
    Decay,
    Verify,
    SampleDisorder,
};

std::string to_string(Command c);
Command command_from_string(const std::string& s);

struct ExperimentConfig {
    LawConfig law;
    DisorderConfig disorder;
    Command command = Command::Verify;
    std::vector<double> h_grid = {1.0};
    std::vector<std::int64_t> n_list = {1024};
    std::int64_t replicas = 100;
    std::int64_t paths = 200;
    int derivative_order = 2;
    std::uint64_t seed = 0;
    bool seed_set = false;  // experiments never run with an implicit seed
    std::string output_dir = "out";
    std::int64_t approximate_cutoff = 0;

    [[nodiscard]] nlohmann::json to_json() const;
    static ExperimentConfig from_json(const nlohmann::json& j);
    static ExperimentConfig load(const std::filesystem::path& path);
    void validate() const;  // throws ConfigError / ValidationError with field paths
    bool operator==(const ExperimentConfig&) const = default;
};

struct RunManifest {
    nlohmann::json config_echo;
    std::string version;
    std::string started_at;
    std::string finished_at;
    std::map<std::string, std::uint64_t> stage_seeds;
    double normalization_error = 0.0;
    std::vector<std::string> fallback_events;
    std::map<std::string, std::string> output_digests;  // file name -> fnv1a-64 hex

    [[nodiscard]] nlohmann::json to_json() const;
    // written to a temporary name then renamed, after all outputs exist
    void write_atomic(const std::filesystem::path& path) const;
};

std::string utc_timestamp();
std::string fnv1a_hex(const std::filesystem::path& file);

}  // namespace pinlab
