#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "kljnlab/distill.hpp"
#include "kljnlab/protocols.hpp"
#include "kljnlab/report.hpp"

namespace kljnlab {

struct AttackSuiteConfig {
    double transient_threshold_sigmas = 5.0; // of the tap noise floor (KLJN runs)
    double shunt_r_over_z0 = 100.0;
    double i_min_amperes = 0.0; // 0 -> V0 / (2 R_s)
    std::size_t rms_cycles = 30000;
    std::size_t rms_samples_per_cycle = 4096;
    std::size_t matched_cycles = 1200;
    std::size_t shunt_cycles = 400;
    std::size_t monitor_cycles = 200;
};

struct MarkovConfig {
    std::size_t chain_samples = 20000;
    double chain_flip_probability = 0.1;
    std::size_t bins = 16;
    double tolerance_bits = 0.01;
    std::size_t protocol_cycles = 1500;
    std::size_t fig3_zero_eve_samples = 200000;
    std::size_t cross_check_samples = 10000000;
    std::size_t cross_check_bins = 64;
};

struct DistillConfig {
    Fig3Params params;
    std::vector<std::size_t> block_grid{1, 3, 5, 7, 9, 11, 13, 15};
    std::vector<double> re_grid_ohms{0.0, 100.0, 200.0, 430.0, 700.0, 1000.0};
};

struct ExperimentConfig {
    std::string experiment; // kljn | noiseless | attack-suite | markov-test | distill-sweep
    std::uint64_t seed = 1;
    std::filesystem::path out_dir; // empty -> no files written
    bool dump_traces = false;

    LineConfig line;
    KljnParams kljn;
    NoiselessParams noiseless;
    AttackSuiteConfig attacks;
    MarkovConfig markov;
    DistillConfig distill;

    static ExperimentConfig defaults();
    static ExperimentConfig from_json_text(const std::string& text);
    static ExperimentConfig from_json_file(const std::filesystem::path& path);
    std::string to_json_text() const;

    std::size_t eve_tap() const; // first configured tap
    void validate() const;
};

struct ExperimentOutput {
    std::vector<CheckResult> checks;
    std::vector<std::string> metrics;
};

ExperimentOutput experiment_kljn(const ExperimentConfig& cfg);
ExperimentOutput experiment_noiseless(const ExperimentConfig& cfg);
ExperimentOutput experiment_attack_suite(const ExperimentConfig& cfg);
ExperimentOutput experiment_markov_test(const ExperimentConfig& cfg);
ExperimentOutput experiment_distill_sweep(const ExperimentConfig& cfg);

// Dispatches on cfg.experiment, echoes the effective config and writes
// summary.txt when an output directory is set.
ExperimentOutput run_experiment(const ExperimentConfig& cfg);

// free-standing physics invariants (energy, causality, absorption, wave
// identity); used by the acceptance suite
std::vector<CheckResult> physics_invariant_checks();

} // namespace kljnlab
