#include "kljnlab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "kljnlab/attacks.hpp"
#include "kljnlab/infotheory.hpp"

namespace kljnlab {

using nlohmann::json;

namespace {

// fixed substream ids so sub-runs stay independent of each other
enum Substream : std::uint64_t {
    kStreamKljn = 1,
    kStreamBobMatched,
    kStreamRmsChance,
    kStreamNoiseless,
    kStreamShunt,
    kStreamMonitor,
    kStreamArmsRace,
    kStreamChain,
    kStreamLeak,
    kStreamProtocolSummaries,
    kStreamFig3ZeroEve,
    kStreamCrossCheck,
    kStreamPipeline,
    kStreamSweep,
    kStreamEveTies,
};

double mean_of(const std::vector<double>& v) {
    double acc = 0.0;
    for (double x : v) acc += x;
    return v.empty() ? 0.0 : acc / static_cast<double>(v.size());
}

double var_of(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double acc = 0.0;
    for (double x : v) acc += (x - m) * (x - m);
    return acc / static_cast<double>(v.size() - 1);
}

// two-sided binomial z statistic against p = 1/2
double binomial_z(std::size_t successes, std::size_t n) {
    if (n == 0) return 0.0;
    const double k = static_cast<double>(successes);
    const double dn = static_cast<double>(n);
    return (k - dn / 2.0) / (std::sqrt(dn) / 2.0);
}

constexpr double kZAlpha001 = 3.2905; // two-sided alpha = 0.001

std::string pct(double x) { return format_value(100.0 * x) + "%"; }

CheckResult check(std::string name, bool pass, std::string detail) {
    return CheckResult{std::move(name), pass, std::move(detail)};
}

struct KljnEveStats {
    std::vector<double> msv;
    std::vector<MsvClass> cls;
    std::vector<EveGuess> echo;
    std::vector<EveGuess> transient;
    std::vector<EveGuess> rms_forced;
    std::vector<double> c_alice, c_bob;
};

// one pass over a KLJN run collecting Eve's per-cycle attack statistics
KljnEveStats kljn_attack_pass(const ExperimentConfig& cfg, const KljnParams& params,
                              KljnRunResult& result, RngStream& rng,
                              const CycleSink& extra_sink = {}) {
    const LineConfig& line = cfg.line;
    const std::size_t tap = cfg.eve_tap();
    const std::size_t block = params.effective_block(line);
    RmsConfig rms_cfg;
    rms_cfg.thresholds = params.thresholds ? *params.thresholds : default_thresholds(params, line);
    rms_cfg.settle_samples = params.settle_samples;
    rms_cfg.block_samples = block;
    rms_cfg.forced = true;
    rms_cfg.mid_split = kljn_msv_level(parallel_resistance(params.r_low_ohms, params.r_high_ohms),
                                       params.temperature_kelvin, line.dt_seconds, block);
    const EchoConfig echo_cfg =
        EchoConfig::for_tap(line, tap, params.settle_samples, params.samples_per_cycle);
    TransientConfig tr_cfg;
    // 5x the full-band tap noise floor: the line carries k_B T Z0 f_N per
    // direction regardless of the termination choices
    const double sigma_v = std::sqrt(2.0 * constants::boltzmann * params.temperature_kelvin *
                                     line.z0_ohms * nyquist_frequency(line.dt_seconds));
    tr_cfg.threshold = cfg.attacks.transient_threshold_sigmas * sigma_v;
    tr_cfg.window_begin = 0;
    tr_cfg.window_end = params.samples_per_cycle;

    KljnEveStats stats;
    const CycleSink sink = [&](const CycleTraces& traces) {
        const TapRecord& rec = (*traces.taps)[0];
        const RmsStat rs = rms_statistic(rec, rms_cfg);
        stats.msv.push_back(rs.msv);
        stats.cls.push_back(rs.cls);
        EveGuess forced;
        forced.cycle = traces.cycle;
        forced.statistic = rs.msv;
        forced.guessed_bit =
            rs.cls == MsvClass::mid ? (rs.msv > rms_cfg.mid_split ? 1 : 0) : kAbstain;
        stats.rms_forced.push_back(forced);

        const EchoStats es = echo_statistics(rec, echo_cfg);
        stats.c_alice.push_back(es.c_alice);
        stats.c_bob.push_back(es.c_bob);
        EveGuess eg;
        eg.cycle = traces.cycle;
        eg.statistic = es.c_alice - es.c_bob;
        const bool alice_high = es.c_alice > 0.0;
        const bool bob_high = es.c_bob > 0.0;
        eg.guessed_bit =
            alice_high != bob_high ? (alice_high ? 1 : 0) : (eg.statistic > 0.0 ? 1 : 0);
        stats.echo.push_back(eg);

        const TransientHit hit = first_arrival(rec, tr_cfg);
        EveGuess tg;
        tg.cycle = traces.cycle;
        tg.statistic = static_cast<double>(hit.direction);
        tg.guessed_bit = hit.direction == 0 ? kAbstain : (hit.direction > 0 ? 1 : 0);
        stats.transient.push_back(tg);
        if (extra_sink) extra_sink(traces);
    };
    result = run_kljn(params, line, rng, sink);
    return stats;
}

std::vector<bool> kept_flags(const KljnRunResult& r) {
    std::vector<bool> kept;
    kept.reserve(r.cycles.size());
    for (const auto& c : r.cycles) kept.push_back(c.kept);
    return kept;
}

std::vector<int> truth_bits(const KljnRunResult& r) {
    std::vector<int> bits;
    bits.reserve(r.cycles.size());
    for (const auto& c : r.cycles) bits.push_back(c.kept ? *c.alice_bit : -1);
    return bits;
}

std::vector<bool> kept_flags(const NoiselessRunResult& r) {
    std::vector<bool> kept;
    kept.reserve(r.cycles.size());
    for (const auto& c : r.cycles) kept.push_back(c.kept);
    return kept;
}

std::vector<int> truth_bits(const NoiselessRunResult& r) {
    std::vector<int> bits;
    bits.reserve(r.cycles.size());
    for (const auto& c : r.cycles) bits.push_back(c.kept ? *c.alice_bit : -1);
    return bits;
}

void append_attack_rows(std::vector<AttackReportRow>& rows, const std::string& name,
                        const std::vector<EveGuess>& guesses, const std::vector<int>& truth) {
    for (std::size_t i = 0; i < guesses.size(); ++i) {
        AttackReportRow r;
        r.cycle = guesses[i].cycle;
        r.attack = name;
        r.statistic = guesses[i].statistic;
        r.guess = guesses[i].guessed_bit;
        r.truth = truth[i];
        r.correct = r.truth >= 0 && r.guess == r.truth;
        rows.push_back(r);
    }
}

} // namespace

std::size_t ExperimentConfig::eve_tap() const {
    if (line.tap_positions.empty())
        throw std::domain_error("ExperimentConfig: no tap positions configured");
    return line.tap_positions[0];
}

void ExperimentConfig::validate() const {
    line.validate();
    if (experiment != "kljn" && experiment != "noiseless" && experiment != "attack-suite" &&
        experiment != "markov-test" && experiment != "distill-sweep")
        throw std::domain_error("unknown experiment: " + experiment);
}

ExperimentConfig ExperimentConfig::defaults() {
    ExperimentConfig cfg;
    cfg.experiment = "kljn";
    cfg.seed = 1;
    cfg.line.z0_ohms = 3000.0;
    cfg.line.delay_samples = 8;
    cfg.line.dt_seconds = 5e-6;
    cfg.line.tap_positions = {4};
    cfg.kljn.cycles = 4400;
    cfg.noiseless.cycles = 2200;
    return cfg;
}

// ---------------------------------------------------------------- kljn ----

ExperimentOutput experiment_kljn(const ExperimentConfig& cfg) {
    ExperimentOutput out;
    RngStream rng = RngStream(cfg.seed).derive(kStreamKljn);
    KljnRunResult result;
    std::vector<std::pair<std::string, SampledTrace>> first_cycle;
    CycleSink dump_sink;
    if (cfg.dump_traces && !cfg.out_dir.empty()) {
        dump_sink = [&](const CycleTraces& traces) {
            if (traces.cycle != 0) return;
            for (const auto& tp : *traces.taps) {
                first_cycle.emplace_back("tap" + std::to_string(tp.position) + "_v_plus",
                                         tp.v_plus);
                first_cycle.emplace_back("tap" + std::to_string(tp.position) + "_v_minus",
                                         tp.v_minus);
            }
            first_cycle.emplace_back("alice_v", traces.alice->voltage);
            first_cycle.emplace_back("alice_i", traces.alice->current);
            first_cycle.emplace_back("bob_v", traces.bob->voltage);
            first_cycle.emplace_back("bob_i", traces.bob->current);
        };
    }
    const KljnEveStats stats = kljn_attack_pass(cfg, cfg.kljn, result, rng, dump_sink);
    const std::size_t n = result.cycles.size();

    // keep rate: Binomial(n, 1/2) within 5 sigma
    const double kz = binomial_z(result.kept_count, n);
    out.checks.push_back(check("keep-rate-binomial", std::fabs(kz) < 5.0,
                               "kept " + std::to_string(result.kept_count) + "/" +
                                   std::to_string(n) + ", z = " + format_value(kz)));

    // group Eve's band-limited MSV by the true resistor combination
    std::vector<double> ll, lh, hl, hh;
    for (std::size_t c = 0; c < n; ++c) {
        const auto& cy = result.cycles[c];
        const double v = stats.msv[c];
        if (cy.alice == KljnChoice::low && cy.bob == KljnChoice::low)
            ll.push_back(v);
        else if (cy.alice == KljnChoice::high && cy.bob == KljnChoice::high)
            hh.push_back(v);
        else if (cy.alice == KljnChoice::low)
            lh.push_back(v);
        else
            hl.push_back(v);
    }
    const double m_lh = mean_of(lh), m_hl = mean_of(hl);
    const double se = std::sqrt(var_of(lh) / static_cast<double>(lh.size()) +
                                var_of(hl) / static_cast<double>(hl.size()));
    out.checks.push_back(check(
        "msv-lh-hl-symmetric", std::fabs(m_lh - m_hl) < 2.0 * se,
        "|dMSV| = " + format_value(std::fabs(m_lh - m_hl)) + ", 2se = " + format_value(2.0 * se)));

    std::vector<double> mixed(lh);
    mixed.insert(mixed.end(), hl.begin(), hl.end());
    const double m_ll = mean_of(ll), m_mid = mean_of(mixed), m_hh = mean_of(hh);
    out.checks.push_back(check("msv-level-ordering", m_ll < m_mid && m_mid < m_hh,
                               format_value(m_ll) + " < " + format_value(m_mid) + " < " +
                                   format_value(m_hh)));

    const std::size_t block = cfg.kljn.effective_block(cfg.line);
    const double t = cfg.kljn.temperature_kelvin;
    const double dt = cfg.line.dt_seconds;
    const double lev_ll = kljn_msv_level(
        parallel_resistance(cfg.kljn.r_low_ohms, cfg.kljn.r_low_ohms), t, dt, block);
    const double lev_mid = kljn_msv_level(
        parallel_resistance(cfg.kljn.r_low_ohms, cfg.kljn.r_high_ohms), t, dt, block);
    const double lev_hh = kljn_msv_level(
        parallel_resistance(cfg.kljn.r_high_ohms, cfg.kljn.r_high_ohms), t, dt, block);
    const double d_ll = m_ll / lev_ll - 1.0;
    const double d_mid = m_mid / lev_mid - 1.0;
    const double d_hh = m_hh / lev_hh - 1.0;
    const bool levels_ok =
        std::fabs(d_ll) <= 0.10 && std::fabs(d_mid) <= 0.10 && std::fabs(d_hh) <= 0.10;
    out.checks.push_back(check("msv-levels-lumped-10pct", levels_ok,
                               "rel dev LL " + pct(d_ll) + ", MID " + pct(d_mid) + ", HH " +
                                   pct(d_hh)));
    const double r_low_ratio = (m_ll / m_mid) / (lev_ll / lev_mid) - 1.0;
    const double r_high_ratio = (m_hh / m_mid) / (lev_hh / lev_mid) - 1.0;
    out.checks.push_back(check("msv-ratios-lumped-10pct",
                               std::fabs(r_low_ratio) <= 0.10 && std::fabs(r_high_ratio) <= 0.10,
                               "LL/MID dev " + pct(r_low_ratio) + ", HH/MID dev " +
                                   pct(r_high_ratio)));

    out.metrics.push_back("cycles: " + std::to_string(n));
    out.metrics.push_back("kept: " + std::to_string(result.kept_count));
    out.metrics.push_back("alice misclassified: " + std::to_string(result.misclassified_alice));
    out.metrics.push_back("bob misclassified: " + std::to_string(result.misclassified_bob));
    out.metrics.push_back("key lengths: alice " + std::to_string(result.key_alice.size()) +
                          ", bob " + std::to_string(result.key_bob.size()));
    out.metrics.push_back("thresholds: " + format_value(result.thresholds.low) + " / " +
                          format_value(result.thresholds.high) + " V^2");

    if (!cfg.out_dir.empty()) {
        write_run_summary_csv(cfg.out_dir / "kljn_run.csv", result);
        for (const auto& [name, trace] : first_cycle)
            write_trace_csv(cfg.out_dir / ("trace_" + name + ".csv"), {{name, &trace}});
    }
    return out;
}

// ----------------------------------------------------------- noiseless ----

ExperimentOutput experiment_noiseless(const ExperimentConfig& cfg) {
    ExperimentOutput out;
    RngStream rng = RngStream(cfg.seed).derive(kStreamNoiseless);
    std::vector<std::vector<std::pair<std::string, SampledTrace>>> first_cycle;
    CycleSink sink;
    if (cfg.dump_traces && !cfg.out_dir.empty()) {
        sink = [&](const CycleTraces& traces) {
            if (traces.cycle != 0) return;
            std::vector<std::pair<std::string, SampledTrace>> dump;
            for (const auto& tp : *traces.taps) {
                dump.emplace_back("tap" + std::to_string(tp.position) + "_v_plus", tp.v_plus);
                dump.emplace_back("tap" + std::to_string(tp.position) + "_v_minus", tp.v_minus);
            }
            dump.emplace_back("alice_v", traces.alice->voltage);
            dump.emplace_back("alice_i", traces.alice->current);
            dump.emplace_back("bob_v", traces.bob->voltage);
            dump.emplace_back("bob_i", traces.bob->current);
            first_cycle.push_back(std::move(dump));
        };
    }
    const NoiselessRunResult result = run_noiseless(cfg.noiseless, cfg.line, rng, sink);
    const std::size_t n = result.cycles.size();
    const double v0 = cfg.noiseless.v0_volts;

    bool kept_matches = true, zero_half_ok = true, kept_levels_ok = true;
    for (const auto& cy : result.cycles) {
        if (cy.kept != (cy.alice != cy.bob)) kept_matches = false;
        const double a1 = cy.mean_v_alice_h1, a2 = cy.mean_v_alice_h2;
        if (!cy.kept) {
            // one half is dead: both open over a grounded line
            const bool h1_zero = a1 == 0.0 && cy.mean_v_bob_h1 == 0.0;
            const bool h2_zero = a2 == 0.0 && cy.mean_v_bob_h2 == 0.0;
            if (!(h1_zero || h2_zero)) zero_half_ok = false;
        } else {
            for (double v : {a1, a2, cy.mean_v_bob_h1, cy.mean_v_bob_h2}) {
                if (std::fabs(v - v0) > 1e-9 * v0) kept_levels_ok = false;
            }
        }
    }
    out.checks.push_back(check("kept-iff-choices-differ", kept_matches, ""));
    out.checks.push_back(
        check("discarded-cycles-have-a-zero-half", zero_half_ok, "mean V exactly 0"));
    out.checks.push_back(check("kept-halves-average-v0", kept_levels_ok,
                               "per-half mean V within 1e-9 of V0 at both ends"));
    out.checks.push_back(check("keys-identical", result.key_alice == result.key_bob,
                               std::to_string(result.key_alice.size()) + " bits"));
    const double kz = binomial_z(result.kept_count, n);
    out.checks.push_back(check("keep-rate-binomial", std::fabs(kz) < 5.0,
                               "kept " + std::to_string(result.kept_count) + "/" +
                                   std::to_string(n) + ", z = " + format_value(kz)));

    out.metrics.push_back("cycles: " + std::to_string(n));
    out.metrics.push_back("kept: " + std::to_string(result.kept_count));

    if (!cfg.out_dir.empty()) {
        write_run_summary_csv(cfg.out_dir / "noiseless_run.csv", result);
        for (const auto& dump : first_cycle) {
            for (const auto& [name, trace] : dump)
                write_trace_csv(cfg.out_dir / ("trace_" + name + ".csv"), {{name, &trace}});
        }
    }
    return out;
}

// -------------------------------------------------------- attack suite ----

ExperimentOutput experiment_attack_suite(const ExperimentConfig& cfg) {
    ExperimentOutput out;
    std::vector<AttackReportRow> report_rows;
    const double z0 = cfg.line.z0_ohms;

    // --- KLJN run: echo and transient attacks, RMS identification ---
    {
        RngStream rng = RngStream(cfg.seed).derive(kStreamKljn);
        KljnRunResult result;
        const KljnEveStats stats = kljn_attack_pass(cfg, cfg.kljn, result, rng);
        const auto kept = kept_flags(result);
        const auto truth = truth_bits(result);

        const AttackAccuracy echo_acc = attack_accuracy(stats.echo, kept, truth);
        out.checks.push_back(check("echo-key-recovery",
                                   echo_acc.defined && echo_acc.accuracy >= 0.99 &&
                                       echo_acc.abstain_rate == 0.0,
                                   "accuracy " + pct(echo_acc.accuracy) + " on " +
                                       std::to_string(echo_acc.scored) + " kept cycles"));

        const auto combined = combine_guesses(stats.echo, stats.transient);
        const AttackAccuracy comb_acc = attack_accuracy(combined, kept, truth);
        out.checks.push_back(check("transient-plus-echo-recovery",
                                   comb_acc.defined && comb_acc.accuracy >= 0.99,
                                   "accuracy " + pct(comb_acc.accuracy)));

        // the transient attack on continuous thermal noise abstains: the 5
        // sigma threshold is never crossed
        const AttackAccuracy tr_acc = attack_accuracy(stats.transient, kept, truth);
        out.checks.push_back(check("transient-abstains-on-kljn", tr_acc.abstain_rate > 0.99,
                                   "abstain rate " + pct(tr_acc.abstain_rate)));

        // RMS attack identifies the discarded LL/HH cycles
        std::size_t discarded = 0, identified = 0;
        for (std::size_t c = 0; c < result.cycles.size(); ++c) {
            const auto& cy = result.cycles[c];
            if (cy.kept) continue;
            ++discarded;
            const MsvClass want =
                cy.alice == KljnChoice::low ? MsvClass::low : MsvClass::high;
            if (stats.cls[c] == want) ++identified;
        }
        const double ident = discarded == 0 ? 0.0
                                            : static_cast<double>(identified) /
                                                  static_cast<double>(discarded);
        out.checks.push_back(check("rms-identifies-discarded", ident >= 0.99,
                                   "accuracy " + pct(ident) + " on " +
                                       std::to_string(discarded) + " discarded cycles"));

        append_attack_rows(report_rows, "echo", stats.echo, truth);
        append_attack_rows(report_rows, "transient", stats.transient, truth);
        out.metrics.push_back("kljn kept cycles: " + std::to_string(result.kept_count));
    }

    // --- Bob impedance matched: his echo statistic carries nothing ---
    {
        KljnParams params = cfg.kljn;
        params.cycles = cfg.attacks.matched_cycles;
        params.bob_resistors = std::make_pair(z0, z0);
        RngStream rng = RngStream(cfg.seed).derive(kStreamBobMatched);
        KljnRunResult result;
        const KljnEveStats stats = kljn_attack_pass(cfg, params, result, rng);
        std::size_t correct = 0;
        for (std::size_t c = 0; c < result.cycles.size(); ++c) {
            const bool guess_high = stats.c_bob[c] > 0.0;
            if (guess_high == (result.cycles[c].bob == KljnChoice::high)) ++correct;
        }
        const double bz = binomial_z(correct, result.cycles.size());
        out.checks.push_back(check("echo-bob-matched-at-chance", std::fabs(bz) < kZAlpha001,
                                   "bob-side sign accuracy " +
                                       pct(static_cast<double>(correct) /
                                           static_cast<double>(result.cycles.size())) +
                                       ", z = " + format_value(bz)));
    }

    // --- forced RMS guesses on kept cycles are at chance ---
    {
        KljnParams params = cfg.kljn;
        params.cycles = cfg.attacks.rms_cycles;
        params.samples_per_cycle = cfg.attacks.rms_samples_per_cycle;
        RngStream rng = RngStream(cfg.seed).derive(kStreamRmsChance);
        KljnRunResult result;
        const KljnEveStats stats = kljn_attack_pass(cfg, params, result, rng);
        const auto truth = truth_bits(result);
        std::size_t scored = 0, correct = 0;
        for (std::size_t c = 0; c < result.cycles.size(); ++c) {
            if (!result.cycles[c].kept) continue;
            if (stats.rms_forced[c].guessed_bit == kAbstain) continue;
            ++scored;
            if (stats.rms_forced[c].guessed_bit == truth[c]) ++correct;
        }
        const double rz = binomial_z(correct, scored);
        out.checks.push_back(check("rms-forced-at-chance",
                                   scored >= 10000 && std::fabs(rz) < kZAlpha001,
                                   "accuracy " +
                                       pct(scored ? static_cast<double>(correct) /
                                                        static_cast<double>(scored)
                                                  : 0.0) +
                                       " on " + std::to_string(scored) +
                                       " scored kept cycles, z = " + format_value(rz)));
    }

    // --- noiseless protocol: transient attack reads the key exactly ---
    {
        RngStream rng = RngStream(cfg.seed).derive(kStreamNoiseless);
        std::vector<EveGuess> guesses;
        TransientConfig tr_cfg;
        tr_cfg.threshold = 0.0;
        tr_cfg.window_begin = 0;
        tr_cfg.window_end = cfg.noiseless.samples_per_half; // first half only
        const CycleSink sink = [&](const CycleTraces& traces) {
            const TapRecord& rec = (*traces.taps)[0];
            const TransientHit hit = first_arrival(rec, tr_cfg);
            EveGuess g;
            g.cycle = traces.cycle;
            g.statistic = static_cast<double>(hit.direction);
            g.guessed_bit = hit.direction == 0 ? kAbstain : (hit.direction > 0 ? 1 : 0);
            guesses.push_back(g);
        };
        const NoiselessRunResult result = run_noiseless(cfg.noiseless, cfg.line, rng, sink);
        const auto kept = kept_flags(result);
        const auto truth = truth_bits(result);
        const AttackAccuracy acc = attack_accuracy(guesses, kept, truth);
        out.checks.push_back(check("transient-noiseless-recovery",
                                   acc.kept >= 1000 && acc.scored == acc.kept &&
                                       acc.accuracy == 1.0,
                                   "accuracy " + pct(acc.accuracy) + " on " +
                                       std::to_string(acc.kept) + " kept cycles"));
        append_attack_rows(report_rows, "transient-noiseless", guesses, truth);
    }

    // --- active shunt attack and the ammeter arms race ---
    const double r_shunt = cfg.attacks.shunt_r_over_z0 * z0;
    const double v0 = cfg.noiseless.v0_volts;
    const double i_min = cfg.attacks.i_min_amperes > 0.0 ? cfg.attacks.i_min_amperes
                                                         : v0 / (2.0 * r_shunt);
    const ShuntAttackConfig sa_cfg{cfg.noiseless.samples_per_half, cfg.noiseless.ground_samples};
    const LeakageMonitorConfig mon_cfg{cfg.noiseless.samples_per_half,
                                       cfg.noiseless.ground_samples, cfg.line.delay_samples,
                                       i_min};

    auto run_shunted = [&](double rs, std::size_t cycles, std::uint64_t stream,
                           std::vector<EveGuess>& guesses, double& max_disc, bool& abort,
                           NoiselessRunResult& result) {
        LineConfig line = cfg.line;
        line.shunt = ShuntConfig{cfg.eve_tap(), rs};
        NoiselessParams params = cfg.noiseless;
        params.cycles = cycles;
        RngStream rng = RngStream(cfg.seed).derive(stream);
        RngStream ties = RngStream(cfg.seed).derive(kStreamEveTies);
        std::vector<ShuntRecord> records;
        std::vector<EndRecord> alice_ends, bob_ends;
        const CycleSink sink = [&](const CycleTraces& traces) {
            records.push_back(*traces.shunt);
            alice_ends.push_back(*traces.alice);
            bob_ends.push_back(*traces.bob);
        };
        result = run_noiseless(params, line, rng, sink);
        guesses = shunt_attack(records, sa_cfg, ties);
        const LeakageReport rep =
            leakage_monitor(alice_ends, bob_ends, result.cycles, mon_cfg);
        max_disc = rep.max_discrepancy;
        abort = rep.abort;
    };

    {
        std::vector<EveGuess> guesses;
        double max_disc = 0.0;
        bool abort = false;
        NoiselessRunResult result;
        run_shunted(r_shunt, cfg.attacks.shunt_cycles, kStreamShunt, guesses, max_disc, abort,
                    result);
        const AttackAccuracy acc =
            attack_accuracy(guesses, kept_flags(result), truth_bits(result));
        out.checks.push_back(check("shunt-attack-recovery",
                                   acc.defined && acc.accuracy == 1.0 && acc.scored == acc.kept,
                                   "accuracy " + pct(acc.accuracy) + " at R_s = " +
                                       format_value(r_shunt) + " ohm"));
        out.checks.push_back(check("leakage-monitor-detects-shunt", abort,
                                   "max discrepancy " + format_value(max_disc) +
                                       " A vs I_min " + format_value(i_min) + " A"));
        append_attack_rows(report_rows, "shunt", guesses, truth_bits(result));
    }

    {
        // no shunt: the monitor must stay quiet for any positive threshold
        NoiselessParams params = cfg.noiseless;
        params.cycles = cfg.attacks.monitor_cycles;
        RngStream rng = RngStream(cfg.seed).derive(kStreamMonitor);
        std::vector<EndRecord> alice_ends, bob_ends;
        const CycleSink sink = [&](const CycleTraces& traces) {
            alice_ends.push_back(*traces.alice);
            bob_ends.push_back(*traces.bob);
        };
        const NoiselessRunResult result = run_noiseless(params, cfg.line, rng, sink);
        LeakageMonitorConfig quiet_cfg = mon_cfg;
        quiet_cfg.i_min_amperes = 0.0; // even a perfect ammeter sees nothing
        const LeakageReport rep = leakage_monitor(alice_ends, bob_ends, result.cycles, quiet_cfg);
        out.checks.push_back(check("leakage-monitor-quiet-without-shunt", !rep.abort,
                                   "max discrepancy " + format_value(rep.max_discrepancy) +
                                       " A"));
    }

    {
        // arms race: raising R_s hides the leakage below any fixed I_min
        const double rs_big = 4.0 * v0 / i_min; // leakage V0/R_s = I_min / 4
        std::vector<EveGuess> guesses;
        double max_disc = 0.0;
        bool abort = false;
        NoiselessRunResult result;
        run_shunted(rs_big, cfg.attacks.monitor_cycles, kStreamArmsRace, guesses, max_disc,
                    abort, result);
        const AttackAccuracy acc =
            attack_accuracy(guesses, kept_flags(result), truth_bits(result));
        out.checks.push_back(check("arms-race-eve-wins", !abort && acc.accuracy == 1.0,
                                   "monitor quiet at R_s = " + format_value(rs_big) +
                                       " ohm, attack accuracy " + pct(acc.accuracy)));
    }

    if (!cfg.out_dir.empty())
        write_attack_report_csv(cfg.out_dir / "attack_report.csv", report_rows);
    return out;
}

// --------------------------------------------------------- markov test ----

namespace {

// per-cycle summary columns of a noiseless run seen from Eve's tap
struct ProtocolSummaries {
    std::vector<std::int64_t> x, y;
    std::vector<std::int64_t> za_arr1, za_arr2, za_mag1, za_mag2;
    std::vector<std::int64_t> zb_arr1, zb_arr2, zb_mag1, zb_mag2;
    std::vector<bool> kept;
    std::vector<int> truth;
};

ProtocolSummaries collect_noiseless_summaries(const ExperimentConfig& cfg,
                                              const NoiselessParams& params, RngStream& rng) {
    ProtocolSummaries s;
    const std::size_t half = params.samples_per_half;
    const std::size_t g = params.ground_samples;
    const double v0 = params.v0_volts;
    const CycleSink sink = [&](const CycleTraces& traces) {
        const TapRecord& rec = (*traces.taps)[0];
        for (int h = 0; h < 2; ++h) {
            const std::size_t begin = static_cast<std::size_t>(h) * half;
            const std::size_t end = begin + half;
            auto arrival = [&](const SampledTrace& tr) -> std::int64_t {
                for (std::size_t i = begin + g; i < end; ++i) {
                    if (std::fabs(tr.samples[i]) > 0.0)
                        return static_cast<std::int64_t>(i - begin - g);
                }
                return -1;
            };
            auto magnitude = [&](const SampledTrace& tr) {
                double acc = 0.0;
                for (std::size_t i = begin + g; i < end; ++i) acc += std::fabs(tr.samples[i]);
                return static_cast<std::int64_t>(
                    std::lround(8.0 * acc / (static_cast<double>(end - begin - g) * v0)));
            };
            (h == 0 ? s.za_arr1 : s.za_arr2).push_back(arrival(rec.v_minus));
            (h == 0 ? s.za_mag1 : s.za_mag2).push_back(magnitude(rec.v_minus));
            (h == 0 ? s.zb_arr1 : s.zb_arr2).push_back(arrival(rec.v_plus));
            (h == 0 ? s.zb_mag1 : s.zb_mag2).push_back(magnitude(rec.v_plus));
        }
    };
    const NoiselessRunResult result = run_noiseless(params, cfg.line, rng, sink);
    for (const auto& cy : result.cycles) {
        s.x.push_back(cy.alice == NoiselessChoice::high_first ? 1 : 0);
        s.y.push_back(cy.bob == NoiselessChoice::high_first ? 1 : 0);
        s.kept.push_back(cy.kept);
        s.truth.push_back(cy.kept ? *cy.alice_bit : -1);
    }
    return s;
}

} // namespace

ExperimentOutput experiment_markov_test(const ExperimentConfig& cfg) {
    ExperimentOutput out;
    std::vector<InfoReportRow> rows;
    const double tol = cfg.markov.tolerance_bits;
    BinningSpec binning;
    binning.default_bins = cfg.markov.bins;

    auto push_markov_rows = [&](const std::string& tag, const MarkovReport& rep, std::size_t n) {
        rows.push_back({tag + ":H(X|Z_A)", rep.h_x_given_za, 0.0, n, cfg.markov.bins, rep.pass});
        rows.push_back({tag + ":H(X|Z)", rep.h_x_given_z, 0.0, n, cfg.markov.bins, rep.pass});
        rows.push_back({tag + ":H(X|Z,Y)", rep.h_x_given_zy, 0.0, n, cfg.markov.bins, rep.pass});
        rows.push_back({tag + ":I(X:Y|Z)", rep.cmi_bits, rep.cmi_baseline_bits, n,
                        cfg.markov.bins, rep.pass});
    };

    // synthetic Markov chain X -> Z_A -> Z_B -> Y
    {
        RngStream rng = RngStream(cfg.seed).derive(kStreamChain);
        const std::size_t n = cfg.markov.chain_samples;
        const double p = cfg.markov.chain_flip_probability;
        std::vector<std::int64_t> x(n), za(n), zb(n), y(n);
        auto flip = [&](std::int64_t b) { return rng.uniform() < p ? 1 - b : b; };
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = rng.coin() ? 1 : 0;
            za[i] = flip(x[i]);
            zb[i] = flip(za[i]);
            y[i] = flip(zb[i]);
        }
        JointSamples samples;
        samples.add_discrete("X", std::move(x));
        samples.add_discrete("Z_A", std::move(za));
        samples.add_discrete("Z_B", std::move(zb));
        samples.add_discrete("Y", std::move(y));
        const MarkovReport rep =
            markov_test(samples, {"X"}, {"Y"}, {"Z_A"}, {"Z_B"}, binning, tol, rng);
        out.checks.push_back(check("markov-synthetic-chain", rep.pass,
                                   "I(X:Y|Z) = " + format_value(rep.cmi_bits) + " bits"));
        push_markov_rows("chain", rep, n);
    }

    // direct leak: Y copies X while Z is independent; the test must fail
    {
        RngStream rng = RngStream(cfg.seed).derive(kStreamLeak);
        const std::size_t n = cfg.markov.chain_samples;
        std::vector<std::int64_t> x(n), za(n), zb(n), y(n);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = rng.coin() ? 1 : 0;
            za[i] = rng.coin() ? 1 : 0;
            zb[i] = rng.coin() ? 1 : 0;
            y[i] = x[i];
        }
        JointSamples samples;
        samples.add_discrete("X", std::move(x));
        samples.add_discrete("Z_A", std::move(za));
        samples.add_discrete("Z_B", std::move(zb));
        samples.add_discrete("Y", std::move(y));
        const MarkovReport rep =
            markov_test(samples, {"X"}, {"Y"}, {"Z_A"}, {"Z_B"}, binning, tol, rng);
        out.checks.push_back(check("markov-detects-leak",
                                   !rep.pass && std::fabs(rep.cmi_bits - 1.0) < 0.05,
                                   "I(X:Y|Z) = " + format_value(rep.cmi_bits) + " bits"));
        push_markov_rows("leak", rep, n);
    }

    // noiseless protocol: per-cycle summaries of Eve's record
    {
        RngStream rng = RngStream(cfg.seed).derive(kStreamProtocolSummaries);
        NoiselessParams params = cfg.noiseless;
        params.cycles = cfg.markov.protocol_cycles;
        params.samples_per_half = 256;
        params.ground_samples = 16;
        const ProtocolSummaries s = collect_noiseless_summaries(cfg, params, rng);
        const std::size_t n = s.x.size();

        JointSamples samples;
        samples.add_discrete("X", s.x);
        samples.add_discrete("Y", s.y);
        samples.add_discrete("ZA_arr1", s.za_arr1);
        samples.add_discrete("ZA_arr2", s.za_arr2);
        samples.add_discrete("ZA_mag1", s.za_mag1);
        samples.add_discrete("ZA_mag2", s.za_mag2);
        samples.add_discrete("ZB_arr1", s.zb_arr1);
        samples.add_discrete("ZB_arr2", s.zb_arr2);
        samples.add_discrete("ZB_mag1", s.zb_mag1);
        samples.add_discrete("ZB_mag2", s.zb_mag2);
        const MarkovReport rep = markov_test(
            samples, {"X"}, {"Y"}, {"ZA_arr1", "ZA_arr2", "ZA_mag1", "ZA_mag2"},
            {"ZB_arr1", "ZB_arr2", "ZB_mag1", "ZB_mag2"}, binning, tol, rng);
        out.checks.push_back(check("markov-noiseless-protocol", rep.pass,
                                   "H(X|Z_A) = " + format_value(rep.h_x_given_za) +
                                       ", I(X:Y|Z) = " + format_value(rep.cmi_bits)));
        push_markov_rows("noiseless", rep, n);

        // given Z, Eve reconstructs every kept bit: a first-half arrival of
        // the Alice-bound wave at 2D - tap is Alice's own echo off Bob's end
        const auto d = static_cast<std::int64_t>(cfg.line.delay_samples);
        const auto tap = static_cast<std::int64_t>(cfg.eve_tap());
        bool reconstructed = true;
        std::size_t kept_cycles = 0;
        for (std::size_t c = 0; c < n; ++c) {
            if (!s.kept[c]) continue;
            ++kept_cycles;
            int bit;
            if (s.za_arr1[c] == 2 * d - tap)
                bit = 1; // Alice fired the first half
            else if (s.za_arr1[c] == d - tap)
                bit = 0; // Bob fired
            else {
                reconstructed = false;
                break;
            }
            if (bit != s.truth[c]) reconstructed = false;
        }
        out.checks.push_back(check("eve-reconstructs-key-from-z", reconstructed,
                                   std::to_string(kept_cycles) + " kept cycles"));
    }

    // Fig. 3 model with a noiseless Eve: conditioning on E kills I(A;B|E)
    {
        RngStream rng = RngStream(cfg.seed).derive(kStreamFig3ZeroEve);
        Fig3Params params = cfg.distill.params;
        params.r_eve_ohms = 0.0;
        params.n_samples = cfg.markov.fig3_zero_eve_samples;
        const JointSamples samples = fig3_sample(params, rng);
        const CmiResult c = cmi(samples, {"A"}, {"B"}, {"E"}, binning, rng);
        out.checks.push_back(check("fig3-zero-eve-cmi",
                                   c.estimate_bits <= c.baseline_bits + tol,
                                   "estimate " + format_value(c.estimate_bits) + ", baseline " +
                                       format_value(c.baseline_bits)));
        rows.push_back({"fig3-R_E=0:I(A:B|E)", c.estimate_bits, c.baseline_bits, c.n,
                        cfg.markov.bins, c.estimate_bits <= c.baseline_bits + tol});
    }

    // closed-form Gaussian CMI against the binned Monte Carlo estimator
    {
        RngStream rng = RngStream(cfg.seed).derive(kStreamCrossCheck);
        const std::size_t n = cfg.markov.cross_check_samples;
        std::vector<double> a(n), b(n), e(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double u = rng.gaussian();
            a[i] = u + rng.gaussian();
            b[i] = u + rng.gaussian();
            e[i] = u + rng.gaussian();
        }
        JointSamples samples;
        samples.add_real("A", std::move(a));
        samples.add_real("B", std::move(b));
        samples.add_real("E", std::move(e));
        BinningSpec fine;
        fine.default_bins = cfg.markov.cross_check_bins;
        const CmiResult c = cmi(samples, {"A"}, {"B"}, {"E"}, fine, rng);
        const double closed = gaussian_cmi(fig3_gaussian_surrogate(1.0, 1.0, 1.0, 1.0),
                                           {"A"}, {"B"}, {"E"});
        const double debiased = c.estimate_bits - c.baseline_bits;
        const double rel = std::fabs(debiased - closed) / closed;
        out.checks.push_back(check("gaussian-cmi-cross-validation", rel <= 0.05,
                                   "closed " + format_value(closed) + ", MC " +
                                       format_value(debiased) + ", rel err " + pct(rel)));
        rows.push_back({"gauss-surrogate:I(A:B|E)", c.estimate_bits, c.baseline_bits, n,
                        cfg.markov.cross_check_bins, rel <= 0.05});
        out.metrics.push_back("gaussian closed form: " + format_value(closed) + " bits");
    }

    if (!cfg.out_dir.empty()) write_infotheory_csv(cfg.out_dir / "infotheory_report.csv", rows);
    return out;
}

// -------------------------------------------------------- distill sweep ----

ExperimentOutput experiment_distill_sweep(const ExperimentConfig& cfg) {
    ExperimentOutput out;
    const DistillConfig& dc = cfg.distill;

    RngStream rng = RngStream(cfg.seed).derive(kStreamPipeline);
    const PipelineReport rep = key_rate_pipeline(dc.params, dc.block_grid, rng);

    out.checks.push_back(check("raw-eve-ahead", rep.raw.ae < rep.raw.ab,
                               "eps_AE " + format_value(rep.raw.ae) + " < eps_AB " +
                                   format_value(rep.raw.ab)));

    bool crossover = false;
    std::size_t crossover_n = 0;
    for (const auto& row : rep.rows) {
        if (row.block_length <= 15 && row.accepted > 0 && row.eps_bob < row.eps_eve &&
            row.rate_per_pair > 0.0) {
            crossover = true;
            crossover_n = row.block_length;
            break;
        }
    }
    out.checks.push_back(check("advantage-crossover-exists", crossover,
                               crossover ? "first at N = " + std::to_string(crossover_n)
                                         : "no block length beat Eve"));

    bool closed_form_ok = true;
    std::string closed_detail;
    for (const auto& row : rep.rows) {
        if (row.accepted < 50) continue;
        const double predicted = repetition_error(rep.raw.ab, row.block_length);
        const double se =
            std::sqrt(std::max(predicted * (1.0 - predicted), 1e-12) /
                      static_cast<double>(row.accepted));
        if (std::fabs(row.eps_bob - predicted) > 5.0 * se) {
            closed_form_ok = false;
            closed_detail = "N = " + std::to_string(row.block_length) + ": " +
                            format_value(row.eps_bob) + " vs " + format_value(predicted);
        }
    }
    out.checks.push_back(
        check("bob-error-matches-closed-form", closed_form_ok, closed_detail));

    out.checks.push_back(check("rate-below-cmi-bound", rep.rate_within_bound,
                               "best rate/sample " + format_value(rep.best_rate_per_sample) +
                                   " vs MC bound " + format_value(rep.cmi_mc_bits) + " +- " +
                                   format_value(rep.cmi_mc_stderr)));

    out.metrics.push_back("analytic eps: A " + format_value(rep.analytic_eps_a) + ", B " +
                          format_value(rep.analytic_eps_b) + ", E " +
                          format_value(rep.analytic_eps_e));
    out.metrics.push_back("raw pair errors: AB " + format_value(rep.raw.ab) + ", AE " +
                          format_value(rep.raw.ae) + ", BE " + format_value(rep.raw.be));
    out.metrics.push_back("cmi bounds: MC " + format_value(rep.cmi_mc_bits) + ", gaussian " +
                          format_value(rep.cmi_gauss_bits));
    out.metrics.push_back("best N = " + std::to_string(rep.best_block) + ", rate/sample " +
                          format_value(rep.best_rate_per_sample));

    // R_E sweep down to a noiseless Eve
    RngStream sweep_rng = RngStream(cfg.seed).derive(kStreamSweep);
    const std::vector<SweepRow> sweep =
        sweep_re(dc.params, dc.re_grid_ohms, dc.block_grid, sweep_rng);

    const SweepRow* zero_row = nullptr;
    for (const auto& row : sweep)
        if (row.r_eve_ohms == 0.0) zero_row = &row;
    out.checks.push_back(check("sweep-zero-eve-endpoint",
                               zero_row != nullptr && zero_row->rate_per_sample == 0.0 &&
                                   zero_row->cmi_gauss_bits == 0.0,
                               zero_row ? "rate " + format_value(zero_row->rate_per_sample) +
                                              ", gaussian bound " +
                                              format_value(zero_row->cmi_gauss_bits)
                                        : "grid lacks R_E = 0"));

    bool monotone = true;
    for (std::size_t i = 1; i < sweep.size(); ++i) {
        if (sweep[i].r_eve_ohms > sweep[i - 1].r_eve_ohms &&
            sweep[i].cmi_gauss_bits < sweep[i - 1].cmi_gauss_bits)
            monotone = false;
    }
    out.checks.push_back(check("sweep-gauss-bound-monotone", monotone, ""));

    bool within = true;
    for (const auto& row : sweep) {
        if (row.rate_per_sample > row.cmi_mc_bits + 3.0 * row.cmi_mc_stderr) within = false;
    }
    out.checks.push_back(check("sweep-rates-within-bound", within, ""));

    if (!cfg.out_dir.empty()) write_sweep_csv(cfg.out_dir / "distill_sweep.csv", sweep);
    return out;
}

// ------------------------------------------------- physics invariants ----

std::vector<CheckResult> physics_invariant_checks() {
    std::vector<CheckResult> checks;
    LineConfig cfg;
    cfg.z0_ohms = 3000.0;
    cfg.delay_samples = 8;
    cfg.dt_seconds = 5e-6;
    cfg.tap_positions = {4};

    // energy conservation with both ends open
    {
        Line line(cfg);
        RngStream rng(99);
        const Termination th = Termination::thermal_resistor(1000.0, 300.0);
        for (int i = 0; i < 64; ++i) line.step(th, th, rng);
        const Termination open = Termination::open();
        const double e0 = line.wave_energy();
        double max_rel = 0.0;
        for (int i = 0; i < 4096; ++i) {
            line.step(open, open, rng);
            max_rel = std::max(max_rel, std::fabs(line.wave_energy() - e0) / e0);
        }
        checks.push_back(check("energy-conserved-open-ends", max_rel < 1e-12,
                               "max rel drift " + format_value(max_rel)));
    }

    // matched ends absorb everything within 2D of silencing the sources
    {
        Line line(cfg);
        RngStream rng(100);
        const Termination th = Termination::thermal_resistor(cfg.z0_ohms, 300.0);
        for (int i = 0; i < 200; ++i) line.step(th, th, rng);
        const Termination matched = Termination::resistor(cfg.z0_ohms);
        for (std::size_t i = 0; i < 2 * cfg.delay_samples; ++i) line.step(matched, matched, rng);
        checks.push_back(check("matched-ends-full-absorption", line.wave_energy() == 0.0,
                               "residual energy " + format_value(line.wave_energy())));
    }

    // causality: the switching front needs exactly `distance` samples
    {
        RngStream rng(101);
        TerminationSchedule alice = TerminationSchedule::fixed(Termination::battery(1.0));
        TerminationSchedule bob = TerminationSchedule::fixed(Termination::open());
        const RunRecord rec = run(cfg, alice, bob, 2 * cfg.delay_samples, rng);
        const std::size_t tap = cfg.tap_positions[0];
        bool ok = true;
        for (std::size_t s = 0; s < tap; ++s)
            if (rec.taps[0].v_plus.samples[s] != 0.0 || rec.taps[0].v_minus.samples[s] != 0.0)
                ok = false;
        if (rec.taps[0].v_plus.samples[tap] != 1.0) ok = false;
        checks.push_back(check("causality-one-way-delay", ok,
                               "front crosses tap " + std::to_string(tap) + " at sample " +
                                   std::to_string(tap)));
    }

    // wave decomposition round trip is exact
    {
        bool ok = true;
        for (double z0 : {50.0, 3000.0}) {
            for (double v : {-2.0, 0.0, 1.5}) {
                for (double i : {-1e-3, 0.0, 2e-3}) {
                    const auto [vp, vm] = wave_decompose(v, i, z0);
                    if (vp + vm != v || (vp - vm) / z0 != i) ok = false;
                }
            }
        }
        checks.push_back(check("wave-decompose-round-trip", ok, "exact"));
    }

    // interior shunt obeys node KCL sample by sample
    {
        LineConfig shunted = cfg;
        shunted.shunt = ShuntConfig{4, 10.0 * cfg.z0_ohms};
        Line line(shunted);
        RngStream rng(103);
        const Termination th = Termination::thermal_resistor(1000.0, 300.0);
        bool ok = true;
        for (int i = 0; i < 500; ++i) {
            line.step(th, th, rng);
            const double lhs = line.shunt_current_alice_side() - line.shunt_current_bob_side();
            const double rhs = line.shunt_node_voltage() / shunted.shunt->resistance_ohms;
            if (std::fabs(lhs - rhs) > 1e-18 + 1e-12 * std::fabs(rhs)) ok = false;
        }
        checks.push_back(check("shunt-node-kcl", ok, "I_left - I_right == V/R_s"));
    }

    return checks;
}

// ------------------------------------------------------------- config ----

namespace {

json line_to_json(const LineConfig& line) {
    json j;
    j["z0_ohms"] = line.z0_ohms;
    j["delay_samples"] = line.delay_samples;
    j["dt_seconds"] = line.dt_seconds;
    j["tap_positions"] = line.tap_positions;
    if (line.shunt) {
        j["shunt"] = {{"position", line.shunt->position},
                      {"resistance_ohms", line.shunt->resistance_ohms}};
    }
    return j;
}

void line_from_json(const json& j, LineConfig& line) {
    line.z0_ohms = j.value("z0_ohms", line.z0_ohms);
    line.delay_samples = j.value("delay_samples", line.delay_samples);
    line.dt_seconds = j.value("dt_seconds", line.dt_seconds);
    if (j.contains("tap_positions"))
        line.tap_positions = j.at("tap_positions").get<std::vector<std::size_t>>();
    if (j.contains("shunt")) {
        ShuntConfig s;
        s.position = j.at("shunt").at("position").get<std::size_t>();
        s.resistance_ohms = j.at("shunt").at("resistance_ohms").get<double>();
        line.shunt = s;
    }
}

} // namespace

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw std::domain_error(std::string("config parse error: ") + e.what());
    }
    ExperimentConfig cfg = defaults();
    try {
        cfg.experiment = j.value("experiment", cfg.experiment);
        cfg.seed = j.value("seed", cfg.seed);
        cfg.out_dir = j.value("out_dir", cfg.out_dir.string());
        cfg.dump_traces = j.value("dump_traces", cfg.dump_traces);
        if (j.contains("line")) line_from_json(j.at("line"), cfg.line);
        if (j.contains("kljn")) {
            const json& k = j.at("kljn");
            cfg.kljn.r_low_ohms = k.value("r_low_ohms", cfg.kljn.r_low_ohms);
            cfg.kljn.r_high_ohms = k.value("r_high_ohms", cfg.kljn.r_high_ohms);
            cfg.kljn.temperature_kelvin = k.value("t_kelvin", cfg.kljn.temperature_kelvin);
            cfg.kljn.cycles = k.value("cycles", cfg.kljn.cycles);
            cfg.kljn.samples_per_cycle = k.value("samples_per_cycle", cfg.kljn.samples_per_cycle);
            cfg.kljn.settle_samples = k.value("settle_samples", cfg.kljn.settle_samples);
            cfg.kljn.msv_block_samples =
                k.value("msv_block_samples", cfg.kljn.msv_block_samples);
            if (k.contains("theta_low_v2") != k.contains("theta_high_v2"))
                throw std::domain_error("config: thresholds need both theta_low_v2 and theta_high_v2");
            if (k.contains("theta_low_v2"))
                cfg.kljn.thresholds = MsvThresholds{k.at("theta_low_v2").get<double>(),
                                                    k.at("theta_high_v2").get<double>()};
        }
        if (j.contains("noiseless")) {
            const json& k = j.at("noiseless");
            cfg.noiseless.v0_volts = k.value("v0_volts", cfg.noiseless.v0_volts);
            cfg.noiseless.cycles = k.value("cycles", cfg.noiseless.cycles);
            cfg.noiseless.samples_per_half =
                k.value("samples_per_half", cfg.noiseless.samples_per_half);
            cfg.noiseless.ground_samples =
                k.value("ground_samples", cfg.noiseless.ground_samples);
        }
        if (j.contains("attacks")) {
            const json& k = j.at("attacks");
            cfg.attacks.transient_threshold_sigmas =
                k.value("transient_threshold_sigmas", cfg.attacks.transient_threshold_sigmas);
            cfg.attacks.shunt_r_over_z0 = k.value("shunt_r_over_z0", cfg.attacks.shunt_r_over_z0);
            cfg.attacks.i_min_amperes = k.value("i_min_amperes", cfg.attacks.i_min_amperes);
            cfg.attacks.rms_cycles = k.value("rms_cycles", cfg.attacks.rms_cycles);
            cfg.attacks.rms_samples_per_cycle =
                k.value("rms_samples_per_cycle", cfg.attacks.rms_samples_per_cycle);
            cfg.attacks.matched_cycles = k.value("matched_cycles", cfg.attacks.matched_cycles);
            cfg.attacks.shunt_cycles = k.value("shunt_cycles", cfg.attacks.shunt_cycles);
            cfg.attacks.monitor_cycles = k.value("monitor_cycles", cfg.attacks.monitor_cycles);
        }
        if (j.contains("markov")) {
            const json& k = j.at("markov");
            cfg.markov.chain_samples = k.value("chain_samples", cfg.markov.chain_samples);
            cfg.markov.chain_flip_probability =
                k.value("chain_flip_probability", cfg.markov.chain_flip_probability);
            cfg.markov.bins = k.value("bins", cfg.markov.bins);
            cfg.markov.tolerance_bits = k.value("tolerance_bits", cfg.markov.tolerance_bits);
            cfg.markov.protocol_cycles = k.value("protocol_cycles", cfg.markov.protocol_cycles);
            cfg.markov.fig3_zero_eve_samples =
                k.value("fig3_zero_eve_samples", cfg.markov.fig3_zero_eve_samples);
            cfg.markov.cross_check_samples =
                k.value("cross_check_samples", cfg.markov.cross_check_samples);
            cfg.markov.cross_check_bins =
                k.value("cross_check_bins", cfg.markov.cross_check_bins);
        }
        if (j.contains("distill")) {
            const json& k = j.at("distill");
            Fig3Params& p = cfg.distill.params;
            p.v0_volts = k.value("v0_volts", p.v0_volts);
            p.r_alice_ohms = k.value("r_alice_ohms", p.r_alice_ohms);
            p.r_bob_ohms = k.value("r_bob_ohms", p.r_bob_ohms);
            p.r_eve_ohms = k.value("r_eve_ohms", p.r_eve_ohms);
            p.temperature_kelvin = k.value("t_kelvin", p.temperature_kelvin);
            p.dt_seconds = k.value("dt_seconds", p.dt_seconds);
            p.n_samples = k.value("n_samples", p.n_samples);
            if (k.contains("block_grid"))
                cfg.distill.block_grid = k.at("block_grid").get<std::vector<std::size_t>>();
            if (k.contains("re_grid_ohms"))
                cfg.distill.re_grid_ohms = k.at("re_grid_ohms").get<std::vector<double>>();
        }
    } catch (const json::exception& e) {
        throw std::domain_error(std::string("config field error: ") + e.what());
    }
    return cfg;
}

ExperimentConfig ExperimentConfig::from_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::domain_error("cannot read config file " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return from_json_text(buf.str());
}

std::string ExperimentConfig::to_json_text() const {
    json j;
    j["experiment"] = experiment;
    j["seed"] = seed;
    j["out_dir"] = out_dir.string();
    j["dump_traces"] = dump_traces;
    j["line"] = line_to_json(line);
    j["kljn"] = {{"r_low_ohms", kljn.r_low_ohms},
                 {"r_high_ohms", kljn.r_high_ohms},
                 {"t_kelvin", kljn.temperature_kelvin},
                 {"cycles", kljn.cycles},
                 {"samples_per_cycle", kljn.samples_per_cycle},
                 {"settle_samples", kljn.settle_samples},
                 {"msv_block_samples", kljn.msv_block_samples}};
    if (kljn.thresholds) {
        j["kljn"]["theta_low_v2"] = kljn.thresholds->low;
        j["kljn"]["theta_high_v2"] = kljn.thresholds->high;
    }
    j["noiseless"] = {{"v0_volts", noiseless.v0_volts},
                      {"cycles", noiseless.cycles},
                      {"samples_per_half", noiseless.samples_per_half},
                      {"ground_samples", noiseless.ground_samples}};
    j["attacks"] = {{"transient_threshold_sigmas", attacks.transient_threshold_sigmas},
                    {"shunt_r_over_z0", attacks.shunt_r_over_z0},
                    {"i_min_amperes", attacks.i_min_amperes},
                    {"rms_cycles", attacks.rms_cycles},
                    {"rms_samples_per_cycle", attacks.rms_samples_per_cycle},
                    {"matched_cycles", attacks.matched_cycles},
                    {"shunt_cycles", attacks.shunt_cycles},
                    {"monitor_cycles", attacks.monitor_cycles}};
    j["markov"] = {{"chain_samples", markov.chain_samples},
                   {"chain_flip_probability", markov.chain_flip_probability},
                   {"bins", markov.bins},
                   {"tolerance_bits", markov.tolerance_bits},
                   {"protocol_cycles", markov.protocol_cycles},
                   {"fig3_zero_eve_samples", markov.fig3_zero_eve_samples},
                   {"cross_check_samples", markov.cross_check_samples},
                   {"cross_check_bins", markov.cross_check_bins}};
    j["distill"] = {{"v0_volts", distill.params.v0_volts},
                    {"r_alice_ohms", distill.params.r_alice_ohms},
                    {"r_bob_ohms", distill.params.r_bob_ohms},
                    {"r_eve_ohms", distill.params.r_eve_ohms},
                    {"t_kelvin", distill.params.temperature_kelvin},
                    {"dt_seconds", distill.params.dt_seconds},
                    {"n_samples", distill.params.n_samples},
                    {"block_grid", distill.block_grid},
                    {"re_grid_ohms", distill.re_grid_ohms}};
    return j.dump(2) + "\n";
}

ExperimentOutput run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    if (!cfg.out_dir.empty()) {
        std::filesystem::create_directories(cfg.out_dir);
        std::ofstream echo(cfg.out_dir / "config.json");
        echo << cfg.to_json_text();
    }
    ExperimentOutput out;
    if (cfg.experiment == "kljn")
        out = experiment_kljn(cfg);
    else if (cfg.experiment == "noiseless")
        out = experiment_noiseless(cfg);
    else if (cfg.experiment == "attack-suite")
        out = experiment_attack_suite(cfg);
    else if (cfg.experiment == "markov-test")
        out = experiment_markov_test(cfg);
    else if (cfg.experiment == "distill-sweep")
        out = experiment_distill_sweep(cfg);
    if (!cfg.out_dir.empty())
        write_summary(cfg.out_dir / "summary.txt", cfg.experiment, out.checks, out.metrics);
    return out;
}

} // namespace kljnlab
