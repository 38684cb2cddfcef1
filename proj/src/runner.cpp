#include "pinlab/runner.hpp"

#include <cstdio>
#include <fstream>

#include "pinlab/csv.hpp"
#include "pinlab/errors.hpp"
#include "pinlab/rng.hpp"
#include "pinlab/version.hpp"

namespace pinlab {

using nlohmann::json;

namespace {

void write_json_atomic(const json& j, const std::filesystem::path& path) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream f(tmp, std::ios::trunc);
        if (!f) throw IoError("cannot write " + tmp.string());
        f << j.dump(2) << "\n";
    }
    std::filesystem::rename(tmp, path);
}

struct OutputCollector {
    std::filesystem::path dir;
    RunManifest manifest;

    void note(const std::filesystem::path& file) {
        manifest.output_digests[file.filename().string()] = fnv1a_hex(file);
    }
    void csv(const std::vector<EstimateRecord>& records, const std::string& name) {
        const auto path = dir / name;
        emit_csv(records, path);
        note(path);
    }
    void report(const CheckReport& rep) {
        const auto path = dir / ("check_" + rep.check_name + ".json");
        write_json_atomic(rep.to_json(), path);
        note(path);
    }
    void details(const json& j, const std::string& name) {
        const auto path = dir / name;
        write_json_atomic(j, path);
        note(path);
    }
};

// The samplers constructed inside the estimators make the same
// embedding-vs-Cholesky decision; probe it once per size for the manifest.
void probe_fallbacks(const CovarianceSpec& spec, const std::vector<std::int64_t>& sizes,
                     RunManifest& manifest) {
    for (const std::int64_t n : sizes) {
        const DisorderSampler probe(spec, n);
        if (probe.fell_back_to_cholesky())
            manifest.fallback_events.push_back("embedding->cholesky at n=" + std::to_string(n) +
                                               " for " + spec.label());
    }
}

}  // namespace

std::vector<CheckReport> default_verify_suite(const InterArrivalLaw& law, std::uint64_t seed) {
    const CovarianceSpec iid = CovarianceSpec::iid(1.0, "iid-1");
    const CovarianceSpec exp_decay = CovarianceSpec::exp_decay(1.0, 0.5, "exp-decay-0.5");
    const MuRefOptions mu_ref_small{};  // defaults are sized for the reference suite

    std::vector<CheckReport> reports;
    reports.push_back(
        check_comparison_lemma(law, 1.0, 10, exp_decay, 3, 200000, derive_seed(seed, 1)));
    reports.push_back(check_endpoint_decay(law, iid, 2.0, {64, 128, 256, 512}, 200,
                                           derive_seed(seed, 2), true, mu_ref_small));
    reports.push_back(check_gibbs_decay(law, iid, 1.5, 256, 100, derive_seed(seed, 3)));
    const double eps_hat = -reports.back().statistic;
    reports.push_back(check_replica_decoupling(law, iid, 1.5, {16, 32, 64, 128}, 50, 200,
                                               derive_seed(seed, 4)));
    reports.push_back(check_largest_gap(law, iid, 1.5, {512, 1024, 2048}, 20, 100,
                                        derive_seed(seed, 5), mu_ref_small));
    reports.push_back(check_clt(law, iid, 1.5, 1024, 5, 2000, derive_seed(seed, 6)));
    reports.push_back(check_concentration(law, iid, 1.0, 128, 5000, derive_seed(seed, 7)));
    reports.push_back(
        check_concentration(law, exp_decay, 1.0, 128, 5000, derive_seed(seed, 8)));
    reports.push_back(
        check_hypercontractivity(iid, 64, 4, 200000, derive_seed(seed, 9)));
    reports.push_back(
        check_hypercontractivity(exp_decay, 64, 4, 200000, derive_seed(seed, 10)));
    reports.push_back(check_mu_sandwich(law, iid, {0.5, 1.0, 1.5, 2.0}, 512, 100,
                                        derive_seed(seed, 11)));
    reports.push_back(check_convolution_decay(0.5, 0.5, 0.4, 5000));
    reports.push_back(check_centering_variance(law, exp_decay, 1.5, 256, 150, eps_hat,
                                               derive_seed(seed, 12)));
    return reports;
}

int run(const ExperimentConfig& config) {
    config.validate();

    OutputCollector out;
    out.dir = config.output_dir;
    std::filesystem::create_directories(out.dir);
    out.manifest.config_echo = config.to_json();
    out.manifest.version = kVersion;
    out.manifest.started_at = utc_timestamp();
    out.manifest.stage_seeds["base"] = config.seed;

    const InterArrivalLaw law = config.law.build();
    const CovarianceSpec spec = config.disorder.build();
    out.manifest.normalization_error = law.normalization_error();

    const std::int64_t n = config.n_list.front();
    const std::int64_t n_big = config.n_list.back();
    const std::int64_t cutoff = config.approximate_cutoff;
    if (cutoff > 0 && config.command != Command::FreeEnergy && config.command != Command::Mu &&
        config.command != Command::Gap)
        throw ConfigError("approximate_cutoff: only supported for free-energy, mu and gap");

    int exit_code = 0;
    switch (config.command) {
        case Command::FreeEnergy: {
            probe_fallbacks(spec, {n_big}, out.manifest);
            std::vector<EstimateRecord> records;
            for (const double h : config.h_grid) {
                const auto est =
                    free_energy(law, spec, h, n_big, config.replicas, config.seed, cutoff);
                records.push_back(est.replica_mean);
                records.push_back(est.single_trajectory);
            }
            out.csv(records, "estimates.csv");
            break;
        }
        case Command::Mu: {
            probe_fallbacks(spec, {n_big}, out.manifest);
            std::vector<EstimateRecord> records;
            json ess = json::array();
            for (const double h : config.h_grid) {
                const auto est = mu_hat(law, spec, h, n_big, config.replicas, config.seed, cutoff);
                records.push_back(est.record);
                ess.push_back(json{{"h", h},
                                   {"ess", est.ess},
                                   {"ess_fraction",
                                    est.ess / static_cast<double>(config.replicas)},
                                   {"low_ess", est.low_ess}});
            }
            out.csv(records, "estimates.csv");
            out.details(json{{"ess", ess}}, "mu_details.json");
            break;
        }
        case Command::Derivatives: {
            probe_fallbacks(spec, {n_big}, out.manifest);
            std::vector<EstimateRecord> records;
            for (const double h : config.h_grid) {
                const auto recs = free_energy_derivatives(law, spec, h, n_big, config.replicas,
                                                          config.derivative_order, config.seed);
                records.insert(records.end(), recs.begin(), recs.end());
            }
            out.csv(records, "estimates.csv");
            break;
        }
        case Command::Centering: {
            probe_fallbacks(spec, {n_big}, out.manifest);
            std::vector<EstimateRecord> records;
            json defects = json::array();
            for (const double h : config.h_grid) {
                const auto cs =
                    centering_statistics(law, spec, h, n_big, config.replicas, config.seed);
                records.insert(records.end(), cs.rho.begin(), cs.rho.end());
                records.insert(records.end(), cs.w.begin(), cs.w.end());
                defects.push_back(json{{"h", h},
                                       {"halving_defect_small", cs.halving_defect_small},
                                       {"halving_defect_large", cs.halving_defect_large}});
            }
            out.csv(records, "estimates.csv");
            out.details(json{{"halving_defects", defects}}, "centering_details.json");
            break;
        }
        case Command::Gap: {
            probe_fallbacks(spec, config.n_list, out.manifest);
            const auto rep = check_largest_gap(law, spec, config.h_grid.front(), config.n_list,
                                               config.replicas, config.paths, config.seed, {},
                                               cutoff);
            out.report(rep);
            exit_code = rep.passed ? 0 : 1;
            break;
        }
        case Command::Clt: {
            probe_fallbacks(spec, {n_big}, out.manifest);
            const auto rep = check_clt(law, spec, config.h_grid.front(), n_big, config.replicas,
                                       config.paths, config.seed);
            out.report(rep);
            exit_code = rep.passed ? 0 : 1;
            break;
        }
        case Command::Decay: {
            probe_fallbacks(spec, config.n_list, out.manifest);
            const auto gibbs = check_gibbs_decay(law, spec, config.h_grid.front(), n_big,
                                                 config.replicas, config.seed);
            out.report(gibbs);
            bool ok = gibbs.passed;
            if (config.n_list.size() >= 4) {
                const auto endpoint = check_endpoint_decay(
                    law, spec, config.h_grid.front(), config.n_list, config.replicas, config.seed);
                out.report(endpoint);
                ok = ok && endpoint.passed;
            }
            exit_code = ok ? 0 : 1;
            break;
        }
        case Command::Verify: {
            const auto reports = default_verify_suite(law, config.seed);
            json summary = json::array();
            bool all_ok = true;
            for (const auto& rep : reports) {
                out.report(rep);
                summary.push_back(json{{"check", rep.check_name}, {"passed", rep.passed}});
                all_ok = all_ok && rep.passed;
            }
            out.details(json{{"all_passed", all_ok}, {"checks", summary}},
                        "verify_summary.json");
            exit_code = all_ok ? 0 : 1;
            break;
        }
        case Command::SampleDisorder: {
            const DisorderSampler sampler(spec, n_big);
            if (sampler.fell_back_to_cholesky())
                out.manifest.fallback_events.push_back("embedding->cholesky at n=" +
                                                       std::to_string(n_big) + " for " +
                                                       spec.label());
            for (std::int64_t r = 0; r < config.replicas; ++r) {
                const std::uint64_t s = derive_seed(config.seed, static_cast<std::uint64_t>(r));
                char name[64];
                std::snprintf(name, sizeof(name), "disorder_%04lld.bin",
                              static_cast<long long>(r));
                const auto path = out.dir / name;
                write_disorder_binary(sampler.sample(s), path);
                out.manifest.stage_seeds[name] = s;
                out.note(path);
            }
            break;
        }
    }

    out.manifest.finished_at = utc_timestamp();
    out.manifest.write_atomic(out.dir / "manifest.json");
    return exit_code;
}

}  // namespace pinlab
