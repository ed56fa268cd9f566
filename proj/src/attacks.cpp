#include "kljnlab/attacks.hpp"

#include <cmath>
#include <stdexcept>

namespace kljnlab {

EchoConfig EchoConfig::for_tap(const LineConfig& line, std::size_t tap, std::size_t window_begin,
                               std::size_t window_end) {
    if (tap < 1 || tap > line.delay_samples - 1)
        throw std::domain_error("EchoConfig: tap outside [1, D-1]");
    EchoConfig cfg;
    cfg.lag_alice = 2 * tap;
    cfg.lag_bob = 2 * (line.delay_samples - tap);
    cfg.window_begin = window_begin;
    cfg.window_end = window_end;
    cfg.validate();
    return cfg;
}

void EchoConfig::validate() const {
    if (lag_alice == 0 || lag_bob == 0) throw std::domain_error("EchoConfig: lags must be positive");
    if (window_begin >= window_end) throw std::domain_error("EchoConfig: empty window");
    const std::size_t len = window_end - window_begin;
    if (len <= lag_alice || len <= lag_bob)
        throw std::domain_error("EchoConfig: window shorter than lag");
}

EchoStats echo_statistics(const TapRecord& cycle_tap, const EchoConfig& cfg) {
    cfg.validate();
    if (cfg.window_end > cycle_tap.v_plus.size())
        throw std::domain_error("echo_statistics: window beyond trace");
    const auto vp = std::span<const double>(cycle_tap.v_plus.samples)
                        .subspan(cfg.window_begin, cfg.window_end - cfg.window_begin);
    const auto vm = std::span<const double>(cycle_tap.v_minus.samples)
                        .subspan(cfg.window_begin, cfg.window_end - cfg.window_begin);
    EchoStats s;
    s.c_bob = cross_correlation(vp, vm, static_cast<std::ptrdiff_t>(cfg.lag_bob));
    s.c_alice = cross_correlation(vm, vp, static_cast<std::ptrdiff_t>(cfg.lag_alice));
    return s;
}

RmsStat rms_statistic(const TapRecord& cycle_tap, const RmsConfig& cfg) {
    const std::size_t n = cycle_tap.v_plus.size();
    if (cfg.settle_samples >= n) throw std::domain_error("rms_statistic: settle beyond trace");
    std::vector<double> v(n - cfg.settle_samples);
    for (std::size_t i = 0; i < v.size(); ++i) {
        const std::size_t j = i + cfg.settle_samples;
        v[i] = cycle_tap.v_plus.samples[j] + cycle_tap.v_minus.samples[j];
    }
    RmsStat st;
    st.msv = band_mean_square(v, cfg.block_samples);
    st.cls = classify_msv(st.msv, cfg.thresholds);
    return st;
}

TransientHit first_arrival(const TapRecord& cycle_tap, const TransientConfig& cfg) {
    if (cfg.window_begin >= cfg.window_end || cfg.window_end > cycle_tap.v_plus.size())
        throw std::domain_error("first_arrival: bad window");
    TransientHit hit;
    for (std::size_t i = cfg.window_begin; i < cfg.window_end; ++i) {
        const bool from_alice = std::fabs(cycle_tap.v_plus.samples[i]) > cfg.threshold;
        const bool from_bob = std::fabs(cycle_tap.v_minus.samples[i]) > cfg.threshold;
        if (from_alice || from_bob) {
            hit.sample = static_cast<std::ptrdiff_t>(i);
            hit.direction = from_alice ? +1 : -1; // same-sample tie cannot occur off-center
            if (from_alice && from_bob) hit.direction = 0;
            return hit;
        }
    }
    return hit;
}

std::vector<EveGuess> rms_attack(const std::vector<TapRecord>& cycle_taps, const RmsConfig& cfg) {
    std::vector<EveGuess> out;
    out.reserve(cycle_taps.size());
    for (std::size_t c = 0; c < cycle_taps.size(); ++c) {
        const RmsStat st = rms_statistic(cycle_taps[c], cfg);
        EveGuess g;
        g.cycle = c;
        g.statistic = st.msv;
        if (st.cls == MsvClass::mid) {
            g.guessed_bit = cfg.forced ? (st.msv > cfg.mid_split ? 1 : 0) : kAbstain;
        } else {
            // LL/HH cycles are identified, not guessed; they carry no key bit
            g.guessed_bit = kAbstain;
        }
        out.push_back(g);
    }
    return out;
}

std::vector<EveGuess> echo_attack(const std::vector<TapRecord>& cycle_taps,
                                  const EchoConfig& cfg) {
    std::vector<EveGuess> out;
    out.reserve(cycle_taps.size());
    for (std::size_t c = 0; c < cycle_taps.size(); ++c) {
        const EchoStats s = echo_statistics(cycle_taps[c], cfg);
        EveGuess g;
        g.cycle = c;
        g.statistic = s.c_alice - s.c_bob;
        const bool alice_high = s.c_alice > 0.0;
        const bool bob_high = s.c_bob > 0.0;
        if (alice_high != bob_high) {
            g.guessed_bit = alice_high ? 1 : 0;
        } else {
            // inferred HH/LL is inconsistent with a kept cycle; take the
            // stronger correlation's side
            g.guessed_bit = g.statistic > 0.0 ? 1 : 0;
        }
        out.push_back(g);
    }
    return out;
}

std::vector<EveGuess> transient_attack(const std::vector<TapRecord>& cycle_taps,
                                       const TransientConfig& cfg) {
    std::vector<EveGuess> out;
    out.reserve(cycle_taps.size());
    for (std::size_t c = 0; c < cycle_taps.size(); ++c) {
        const TransientHit hit = first_arrival(cycle_taps[c], cfg);
        EveGuess g;
        g.cycle = c;
        g.statistic = static_cast<double>(hit.direction);
        g.guessed_bit = hit.direction == 0 ? kAbstain : (hit.direction > 0 ? 1 : 0);
        out.push_back(g);
    }
    return out;
}

std::vector<EveGuess> shunt_attack(const std::vector<ShuntRecord>& cycle_records,
                                   const ShuntAttackConfig& cfg, RngStream& tie_rng) {
    if (cfg.samples_per_half == 0 || cfg.ground_samples >= cfg.samples_per_half)
        throw std::domain_error("shunt_attack: bad half structure");
    std::vector<EveGuess> out;
    out.reserve(cycle_records.size());
    for (std::size_t c = 0; c < cycle_records.size(); ++c) {
        const ShuntRecord& rec = cycle_records[c];
        if (rec.current_alice_side.size() < cfg.samples_per_half)
            throw std::domain_error("shunt_attack: record shorter than a half");
        double ia = 0.0, ib = 0.0;
        const std::size_t begin = cfg.ground_samples;
        const std::size_t end = cfg.samples_per_half;
        for (std::size_t i = begin; i < end; ++i) {
            ia += rec.current_alice_side.samples[i];
            ib += rec.current_bob_side.samples[i];
        }
        ia /= static_cast<double>(end - begin);
        ib /= static_cast<double>(end - begin);
        EveGuess g;
        g.cycle = c;
        g.statistic = std::fabs(ia) - std::fabs(ib);
        if (g.statistic > 0.0)
            g.guessed_bit = 1; // Alice's side feeds the shunt in the first half
        else if (g.statistic < 0.0)
            g.guessed_bit = 0;
        else
            g.guessed_bit = tie_rng.coin() ? 1 : 0;
        out.push_back(g);
    }
    return out;
}

double terminal_discrepancy(const SampledTrace& current, std::size_t half_begin,
                            std::size_t half_end, std::size_t ground_samples,
                            std::size_t delay_samples) {
    const std::size_t active_begin = half_begin + ground_samples;
    if (active_begin >= half_end || half_end > current.size())
        throw std::domain_error("terminal_discrepancy: bad window");
    const std::size_t active = half_end - active_begin;
    const std::size_t period = 4 * delay_samples;
    // average the late half of the active window, trimmed to whole ring
    // periods so the lossless ringing cancels exactly
    std::size_t len = (active / 2 / period) * period;
    if (len == 0) len = active;
    const std::size_t begin = half_end - len;
    double acc = 0.0;
    for (std::size_t i = begin; i < half_end; ++i) acc += current.samples[i];
    return std::fabs(acc / static_cast<double>(len));
}

LeakageReport leakage_monitor(const std::vector<EndRecord>& alice_cycles,
                              const std::vector<EndRecord>& bob_cycles,
                              const std::vector<NoiselessCycle>& outcomes,
                              const LeakageMonitorConfig& cfg) {
    if (alice_cycles.size() != outcomes.size() || bob_cycles.size() != outcomes.size())
        throw std::domain_error("leakage_monitor: cycle count mismatch");
    LeakageReport report;
    for (std::size_t c = 0; c < outcomes.size(); ++c) {
        for (int party = 0; party < 2; ++party) {
            const bool high_first = party == 0
                                        ? outcomes[c].alice == NoiselessChoice::high_first
                                        : outcomes[c].bob == NoiselessChoice::high_first;
            const std::size_t h = high_first ? 0 : 1; // the party's battery half
            const SampledTrace& current =
                party == 0 ? alice_cycles[c].current : bob_cycles[c].current;
            const double d =
                terminal_discrepancy(current, h * cfg.samples_per_half,
                                     (h + 1) * cfg.samples_per_half, cfg.ground_samples,
                                     cfg.delay_samples);
            if (d > report.max_discrepancy) report.max_discrepancy = d;
            if (d > cfg.i_min_amperes && !report.abort) {
                report.abort = true;
                report.first_abort_cycle = c;
            }
        }
    }
    return report;
}

std::vector<EveGuess> combine_guesses(const std::vector<EveGuess>& primary,
                                      const std::vector<EveGuess>& fallback) {
    if (primary.size() != fallback.size())
        throw std::domain_error("combine_guesses: length mismatch");
    std::vector<EveGuess> out = primary;
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (out[i].guessed_bit == kAbstain) out[i] = fallback[i];
    }
    return out;
}

AttackAccuracy attack_accuracy(const std::vector<EveGuess>& guesses,
                               const std::vector<bool>& kept,
                               const std::vector<int>& true_bits) {
    if (guesses.size() != kept.size() || kept.size() != true_bits.size())
        throw std::domain_error("attack_accuracy: length mismatch");
    AttackAccuracy acc;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < guesses.size(); ++i) {
        if (!kept[i]) continue;
        ++acc.kept;
        if (guesses[i].guessed_bit == kAbstain) continue;
        ++acc.scored;
        if (guesses[i].guessed_bit == true_bits[i]) ++correct;
    }
    acc.abstain_rate =
        acc.kept == 0 ? 0.0
                      : static_cast<double>(acc.kept - acc.scored) / static_cast<double>(acc.kept);
    acc.defined = acc.scored > 0;
    acc.accuracy = acc.defined ? static_cast<double>(correct) / static_cast<double>(acc.scored) : 0.0;
    return acc;
}

} // namespace kljnlab
