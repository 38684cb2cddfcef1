#include "pinlab/config.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>

#include "pinlab/errors.hpp"

namespace pinlab {

using nlohmann::json;

InterArrivalLaw LawConfig::build() const { return InterArrivalLaw(alpha, ell, horizon, n_max); }

nlohmann::json LawConfig::to_json() const {
    json ell_j{{"kind", ell.kind == EllSpec::Kind::Constant ? "constant" : "log_power"},
               {"c", ell.c}};
    if (ell.kind == EllSpec::Kind::LogPower) ell_j["beta"] = ell.beta;
    return json{{"alpha", alpha}, {"ell", ell_j}, {"horizon", horizon}, {"n_max", n_max}};
}

LawConfig LawConfig::from_json(const nlohmann::json& j) {
    LawConfig c;
    try {
        c.alpha = j.at("alpha").get<double>();
        const auto& ell = j.at("ell");
        const std::string kind = ell.at("kind").get<std::string>();
        if (kind == "constant") {
            c.ell = EllSpec::constant(ell.at("c").get<double>());
        } else if (kind == "log_power") {
            c.ell = EllSpec::log_power(ell.at("c").get<double>(), ell.at("beta").get<double>());
        } else {
            throw ConfigError("law.ell.kind: unknown kind '" + kind + "'");
        }
        c.horizon = j.at("horizon").get<std::int64_t>();
        c.n_max = j.at("n_max").get<std::int64_t>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("law: ") + e.what());
    }
    return c;
}

CovarianceSpec DisorderConfig::build() const {
    if (family == "iid") {
        if (params.size() != 1) throw ValidationError("disorder.params: iid takes [sigma2]");
        return CovarianceSpec::iid(params[0], label);
    }
    if (family == "finite_range") {
        return CovarianceSpec::finite_range(params, label);
    }
    if (family == "exp_decay") {
        if (params.size() != 2)
            throw ValidationError("disorder.params: exp_decay takes [gamma0, rho]");
        return CovarianceSpec::exp_decay(params[0], params[1], label);
    }
    if (family == "power_law") {
        if (params.size() != 3)
            throw ValidationError("disorder.params: power_law takes [gamma0, C, a]");
        return CovarianceSpec::power_law(params[0], params[1], params[2], label);
    }
    throw ValidationError("disorder.family: unknown family '" + family + "'");
}

nlohmann::json DisorderConfig::to_json() const {
    return json{{"family", family}, {"params", params}, {"label", label}};
}

DisorderConfig DisorderConfig::from_json(const nlohmann::json& j) {
    DisorderConfig c;
    try {
        c.family = j.at("family").get<std::string>();
        c.params = j.at("params").get<std::vector<double>>();
        c.label = j.value("label", c.family);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("disorder: ") + e.what());
    }
    return c;
}

std::string to_string(Command c) {
    switch (c) {
        case Command::FreeEnergy: return "free-energy";
        case Command::Mu: return "mu";
        case Command::Derivatives: return "derivatives";
        case Command::Centering: return "centering";
        case Command::Gap: return "gap";
        case Command::Clt: return "clt";
        case Command::Decay: return "decay";
        case Command::Verify: return "verify";
        case Command::SampleDisorder: return "sample-disorder";
    }
    return "?";
}

Command command_from_string(const std::string& s) {
    if (s == "free-energy") return Command::FreeEnergy;
    if (s == "mu") return Command::Mu;
    if (s == "derivatives") return Command::Derivatives;
    if (s == "centering") return Command::Centering;
    if (s == "gap") return Command::Gap;
    if (s == "clt") return Command::Clt;
    if (s == "decay") return Command::Decay;
    if (s == "verify") return Command::Verify;
    if (s == "sample-disorder") return Command::SampleDisorder;
    throw ConfigError("command: unknown command '" + s + "'");
}

nlohmann::json ExperimentConfig::to_json() const {
    return json{{"law", law.to_json()},
                {"disorder", disorder.to_json()},
                {"command", to_string(command)},
                {"h_grid", h_grid},
                {"n_list", n_list},
                {"replicas", replicas},
                {"paths", paths},
                {"derivative_order", derivative_order},
                {"seed", seed},
                {"output_dir", output_dir},
                {"approximate_cutoff", approximate_cutoff}};
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
    ExperimentConfig c;
    try {
        c.law = LawConfig::from_json(j.at("law"));
        c.disorder = DisorderConfig::from_json(j.at("disorder"));
        c.command = command_from_string(j.at("command").get<std::string>());
        if (j.contains("h_grid")) {
            c.h_grid = j.at("h_grid").get<std::vector<double>>();
        } else if (j.contains("h")) {
            c.h_grid = {j.at("h").get<double>()};
        }
        if (j.contains("n_list")) {
            c.n_list = j.at("n_list").get<std::vector<std::int64_t>>();
        } else if (j.contains("n")) {
            c.n_list = {j.at("n").get<std::int64_t>()};
        }
        c.replicas = j.value("replicas", c.replicas);
        c.paths = j.value("paths", c.paths);
        c.derivative_order = j.value("derivative_order", c.derivative_order);
        if (j.contains("seed")) {
            c.seed = j.at("seed").get<std::uint64_t>();
            c.seed_set = true;
        }
        c.output_dir = j.value("output_dir", c.output_dir);
        c.approximate_cutoff = j.value("approximate_cutoff", c.approximate_cutoff);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open config file " + path.string());
    json j;
    try {
        f >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config parse error in " + path.string() + ": " + e.what());
    }
    return from_json(j);
}

void ExperimentConfig::validate() const {
    if (!seed_set) throw ConfigError("seed: required (wall-clock seeding is not supported)");
    if (h_grid.empty()) throw ConfigError("h_grid: at least one h value required");
    if (n_list.empty()) throw ConfigError("n_list: at least one n value required");
    for (const std::int64_t n : n_list) {
        if (n < 1) throw ConfigError("n_list: sizes must be positive");
        if (n > law.n_max)
            throw ConfigError("n_list: size " + std::to_string(n) + " exceeds law.n_max");
    }
    if (replicas < 1) throw ConfigError("replicas: must be >= 1");
    if (paths < 1) throw ConfigError("paths: must be >= 1");
    if (approximate_cutoff < 0) throw ConfigError("approximate_cutoff: must be >= 0");
    if (derivative_order < 1 || derivative_order > 3)
        throw ConfigError("derivative_order: must be in 1..3");
    // surface constructor-level failures with field paths
    try {
        law.build();
    } catch (const Error& e) {
        throw ValidationError(std::string("law: ") + e.what());
    }
    try {
        disorder.build();
    } catch (const Error& e) {
        throw ValidationError(std::string("disorder: ") + e.what());
    }
}

nlohmann::json RunManifest::to_json() const {
    return json{{"config", config_echo},
                {"version", version},
                {"started_at", started_at},
                {"finished_at", finished_at},
                {"stage_seeds", stage_seeds},
                {"normalization_error", normalization_error},
                {"fallback_events", fallback_events},
                {"output_digests", output_digests}};
}

void RunManifest::write_atomic(const std::filesystem::path& path) const {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream f(tmp, std::ios::trunc);
        if (!f) throw IoError("cannot write manifest " + tmp.string());
        f << to_json().dump(2) << "\n";
    }
    std::filesystem::rename(tmp, path);
}

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ", tm.tm_year + 1900,
                  tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec);
    return buf;
}

std::string fnv1a_hex(const std::filesystem::path& file) {
    std::ifstream f(file, std::ios::binary);
    if (!f) throw IoError("cannot digest " + file.string());
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    char buf[4096];
    while (f.read(buf, sizeof(buf)) || f.gcount() > 0) {
        for (std::streamsize i = 0; i < f.gcount(); ++i) {
            hash ^= static_cast<unsigned char>(buf[i]);
            hash *= 0x100000001b3ULL;
        }
        if (!f) break;
    }
    char out[17];
    std::snprintf(out, sizeof(out), "%016llx", static_cast<unsigned long long>(hash));
    return out;
}

}  // namespace pinlab
