// Acceptance suite: one pinned configuration per criterion, one PASS/FAIL
// line each, nonzero exit if anything fails.

#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "kljnlab/experiments.hpp"

using namespace kljnlab;

namespace {

struct Criterion {
    std::string id;
    std::string title;
    std::vector<std::string> check_names;
};

std::map<std::string, CheckResult> index_checks(const std::vector<CheckResult>& checks) {
    std::map<std::string, CheckResult> by_name;
    for (const auto& c : checks) by_name[c.name] = c;
    return by_name;
}

} // namespace

int main() {
    constexpr std::uint64_t kSeed = 20240811;

    ExperimentConfig cfg = ExperimentConfig::defaults();
    cfg.seed = kSeed;

    std::printf("running kljn experiment...\n");
    const ExperimentOutput kljn = experiment_kljn(cfg);
    std::printf("running attack suite...\n");
    const ExperimentOutput attacks = experiment_attack_suite(cfg);
    std::printf("running markov / information-theory experiment...\n");
    const ExperimentOutput markov = experiment_markov_test(cfg);
    std::printf("running distillation sweep...\n");
    const ExperimentOutput distill = experiment_distill_sweep(cfg);
    std::printf("running physics invariant checks...\n\n");
    const std::vector<CheckResult> physics = physics_invariant_checks();

    std::map<std::string, CheckResult> by_name;
    for (const auto* out : {&kljn, &attacks, &markov, &distill}) {
        for (const auto& c : out->checks) by_name[c.name] = c;
    }
    for (const auto& c : physics) by_name[c.name] = c;

    const std::vector<Criterion> criteria = {
        {"01", "KLJN indistinguishability and lumped MSV levels",
         {"keep-rate-binomial", "msv-lh-hl-symmetric", "msv-level-ordering",
          "msv-levels-lumped-10pct", "msv-ratios-lumped-10pct"}},
        {"02", "echo attack breaks KLJN; matched end is silent",
         {"echo-key-recovery", "echo-bob-matched-at-chance"}},
        {"03", "transient attack breaks the noiseless protocol",
         {"transient-noiseless-recovery"}},
        {"04", "forced RMS guessing stays at chance", {"rms-forced-at-chance"}},
        {"05", "Markov property and vanishing CMI",
         {"markov-synthetic-chain", "markov-detects-leak", "markov-noiseless-protocol",
          "eve-reconstructs-key-from-z", "fig3-zero-eve-cmi"}},
        {"06", "closed-form Gaussian CMI cross-validation",
         {"gaussian-cmi-cross-validation"}},
        {"07", "advantage distillation beats a better-informed Eve",
         {"raw-eve-ahead", "advantage-crossover-exists", "bob-error-matches-closed-form",
          "rate-below-cmi-bound"}},
        {"08", "R_E sweep: zero endpoint and monotone bound",
         {"sweep-zero-eve-endpoint", "sweep-gauss-bound-monotone",
          "sweep-rates-within-bound"}},
        {"09", "physics invariant suite",
         {"energy-conserved-open-ends", "matched-ends-full-absorption",
          "causality-one-way-delay", "wave-decompose-round-trip", "shunt-node-kcl"}},
        {"10", "shunt attack and the ammeter arms race",
         {"shunt-attack-recovery", "leakage-monitor-detects-shunt",
          "leakage-monitor-quiet-without-shunt", "arms-race-eve-wins"}},
    };

    int failures = 0;
    for (const auto& cr : criteria) {
        bool pass = true;
        std::string detail;
        for (const auto& name : cr.check_names) {
            const auto it = by_name.find(name);
            if (it == by_name.end()) {
                pass = false;
                detail += name + " [missing]; ";
                continue;
            }
            if (!it->second.pass) {
                pass = false;
                detail += name + ": " + it->second.detail + "; ";
            }
        }
        std::printf("[%s] criterion %s: %s%s%s\n", pass ? "PASS" : "FAIL", cr.id.c_str(),
                    cr.title.c_str(), detail.empty() ? "" : " -- ", detail.c_str());
        if (!pass) ++failures;
    }

    std::printf("\n%d/10 criteria passed\n", 10 - failures);
    return failures == 0 ? 0 : 1;
}
