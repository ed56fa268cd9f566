#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "kljnlab/experiments.hpp"

namespace {

constexpr int kExitPass = 0;
constexpr int kExitCheckFailure = 1;
constexpr int kExitUsage = 2;

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"kljnlab: noise-based key distribution on a wave-faithful line"};
    std::string config_path;
    std::string experiment;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool have_seed = false;
    bool dump_traces = false;

    app.add_option("--config", config_path, "JSON config file");
    app.add_option("--experiment", experiment,
                   "kljn | noiseless | attack-suite | markov-test | distill-sweep "
                   "(overrides the config file)");
    app.add_option("--out", out_dir, "output directory (overrides the config file)");
    app.add_option("--seed", seed, "rng seed (overrides the config file)")
        ->each([&](const std::string&) { have_seed = true; });
    app.add_flag("--dump-traces", dump_traces, "export first-cycle traces as CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    kljnlab::ExperimentConfig cfg;
    try {
        if (!config_path.empty())
            cfg = kljnlab::ExperimentConfig::from_json_file(config_path);
        else
            cfg = kljnlab::ExperimentConfig::defaults();
        if (!experiment.empty()) cfg.experiment = experiment;
        if (have_seed) cfg.seed = seed;
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        if (dump_traces) cfg.dump_traces = true;
        if (config_path.empty() && experiment.empty()) {
            std::fprintf(stderr, "error: need --experiment or a config file naming one\n");
            return kExitUsage;
        }
        if (cfg.out_dir.empty()) cfg.out_dir = "out-" + cfg.experiment;
        cfg.validate();
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    }

    try {
        const kljnlab::ExperimentOutput out = kljnlab::run_experiment(cfg);
        for (const auto& c : out.checks) {
            std::printf("%s %s", c.pass ? "PASS" : "FAIL", c.name.c_str());
            if (!c.detail.empty()) std::printf("  (%s)", c.detail.c_str());
            std::printf("\n");
        }
        for (const auto& m : out.metrics) std::printf("# %s\n", m.c_str());
        const bool ok = kljnlab::all_passed(out.checks);
        std::printf("%s\n", ok ? "ALL CHECKS PASSED" : "CHECKS FAILED");
        return ok ? kExitPass : kExitCheckFailure;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitCheckFailure;
    }
}
