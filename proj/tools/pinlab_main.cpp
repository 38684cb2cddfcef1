#include <CLI11.hpp>
#include <cstdio>
#include <string>
#include <vector>

#include "pinlab/config.hpp"
#include "pinlab/errors.hpp"
#include "pinlab/runner.hpp"
#include "pinlab/version.hpp"

namespace {

struct CliOverrides {
    std::string config_file;
    std::vector<double> h;
    std::vector<std::int64_t> n;
    std::int64_t replicas = -1;
    std::int64_t paths = -1;
    int order = -1;
    std::int64_t cutoff = -1;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_given = false;
};

void add_common(CLI::App* cmd, CliOverrides& o) {
    cmd->set_help_flag("--help", "print help");  // frees -h for the pinning parameter
    cmd->add_option("--config", o.config_file, "JSON experiment config");
    cmd->add_option("--h", o.h, "pinning parameter(s); overrides the config h grid");
    cmd->add_option("--n", o.n, "system size(s); overrides the config n list");
    cmd->add_option("--replicas", o.replicas, "disorder replicas");
    cmd->add_option("--paths", o.paths, "sampled paths per replica");
    cmd->add_option("--order", o.order, "derivative order (derivatives command)");
    cmd->add_option("--cutoff", o.cutoff,
                    "approximate kernel cutoff t_max (labels outputs approximate)");
    cmd->add_option("--out", o.out_dir, "output directory");
    cmd->add_option("--seed", o.seed, "base seed (required here or in the config)")
        ->each([&o](const std::string&) { o.seed_given = true; });
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pinlab: quenched pinning-model simulation and verification"};
    app.set_help_flag("--help", "print help");
    app.set_version_flag("--version", pinlab::kVersion);
    app.require_subcommand(1);

    CliOverrides o;
    const std::vector<std::string> commands = {"free-energy", "mu",    "derivatives",
                                               "centering",   "gap",   "clt",
                                               "decay",       "verify", "sample-disorder"};
    for (const auto& name : commands) {
        auto* sub = app.add_subcommand(name);
        add_common(sub, o);
    }

    CLI11_PARSE(app, argc, argv);

    try {
        pinlab::ExperimentConfig config;
        if (!o.config_file.empty()) config = pinlab::ExperimentConfig::load(o.config_file);
        config.command = pinlab::command_from_string(app.get_subcommands().front()->get_name());
        if (!o.h.empty()) config.h_grid = o.h;
        if (!o.n.empty()) config.n_list = o.n;
        if (o.replicas >= 0) config.replicas = o.replicas;
        if (o.paths >= 0) config.paths = o.paths;
        if (o.order >= 0) config.derivative_order = o.order;
        if (o.cutoff >= 0) config.approximate_cutoff = o.cutoff;
        if (!o.out_dir.empty()) config.output_dir = o.out_dir;
        if (o.seed_given) {
            config.seed = o.seed;
            config.seed_set = true;
        }
        return pinlab::run(config);
    } catch (const pinlab::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const pinlab::ValidationError& e) {
        std::fprintf(stderr, "validation error: %s\n", e.what());
        return 2;
    } catch (const pinlab::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
}
