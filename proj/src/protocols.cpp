#include "kljnlab/protocols.hpp"

#include <cmath>
#include <stdexcept>

namespace kljnlab {

MsvClass classify_msv(double msv, const MsvThresholds& thresholds) {
    // degenerate thresholds (low == high) give a binary classifier
    if (thresholds.low > thresholds.high)
        throw std::domain_error("classify_msv: theta_low must not exceed theta_high");
    if (msv < thresholds.low) return MsvClass::low;
    if (msv > thresholds.high) return MsvClass::high;
    return MsvClass::mid;
}

double parallel_resistance(double ra_ohms, double rb_ohms) {
    return ra_ohms * rb_ohms / (ra_ohms + rb_ohms);
}

double kljn_msv_level(double r_parallel_ohms, double t_kelvin, double dt_seconds,
                      std::size_t block) {
    if (block == 0) throw std::domain_error("kljn_msv_level: block must be positive");
    return 4.0 * constants::boltzmann * t_kelvin * r_parallel_ohms *
           nyquist_frequency(dt_seconds) / static_cast<double>(block);
}

std::size_t KljnParams::effective_block(const LineConfig& line) const {
    return msv_block_samples != 0 ? msv_block_samples : 64 * line.delay_samples;
}

void KljnParams::validate(const LineConfig& line) const {
    line.validate();
    if (!(0.0 < r_low_ohms && r_low_ohms < r_high_ohms))
        throw std::domain_error("KljnParams: need 0 < R_L < R_H");
    if (temperature_kelvin < 0.0) throw std::domain_error("KljnParams: negative temperature");
    if (cycles == 0) throw std::domain_error("KljnParams: need at least one cycle");
    if (settle_samples >= samples_per_cycle)
        throw std::domain_error("KljnParams: settle must be shorter than the cycle");
    if (samples_per_cycle - settle_samples < effective_block(line))
        throw std::domain_error("KljnParams: measurement window shorter than the MSV block");
    if (thresholds && !(thresholds->low < thresholds->high))
        throw std::domain_error("KljnParams: theta_low must be below theta_high");
}

MsvThresholds default_thresholds(const KljnParams& params, const LineConfig& line) {
    const std::size_t block = params.effective_block(line);
    const double t = params.temperature_kelvin;
    const double dt = line.dt_seconds;
    const double ll = kljn_msv_level(parallel_resistance(params.r_low_ohms, params.r_low_ohms),
                                     t, dt, block);
    const double mid = kljn_msv_level(parallel_resistance(params.r_low_ohms, params.r_high_ohms),
                                      t, dt, block);
    const double hh = kljn_msv_level(parallel_resistance(params.r_high_ohms, params.r_high_ohms),
                                     t, dt, block);
    return {std::sqrt(ll * mid), std::sqrt(mid * hh)};
}

void NoiselessParams::validate(const LineConfig& line) const {
    line.validate();
    if (!(v0_volts > 0.0)) throw std::domain_error("NoiselessParams: V0 must be positive");
    if (cycles == 0) throw std::domain_error("NoiselessParams: need at least one cycle");
    if (ground_samples >= samples_per_half)
        throw std::domain_error("NoiselessParams: grounding must be shorter than a half cycle");
    if (samples_per_half <= 4 * line.delay_samples)
        throw std::domain_error("NoiselessParams: half cycle must exceed the ring period 4D");
}

namespace {

struct CycleBuffers {
    std::vector<TapRecord> taps;
    EndRecord alice, bob;
    ShuntRecord shunt;
    bool has_shunt = false;

    void init(const LineConfig& line, std::size_t n) {
        const double dt = line.dt_seconds;
        taps.clear();
        for (std::size_t p : line.tap_positions) {
            TapRecord t;
            t.position = p;
            t.v_plus.dt = t.v_minus.dt = dt;
            t.v_plus.samples.reserve(n);
            t.v_minus.samples.reserve(n);
            taps.push_back(std::move(t));
        }
        alice.voltage.dt = alice.current.dt = dt;
        bob.voltage.dt = bob.current.dt = dt;
        alice.voltage.samples.reserve(n);
        alice.current.samples.reserve(n);
        bob.voltage.samples.reserve(n);
        bob.current.samples.reserve(n);
        has_shunt = line.shunt.has_value();
        if (has_shunt) {
            shunt.node_voltage.dt = dt;
            shunt.current_alice_side.dt = dt;
            shunt.current_bob_side.dt = dt;
            shunt.node_voltage.samples.reserve(n);
            shunt.current_alice_side.samples.reserve(n);
            shunt.current_bob_side.samples.reserve(n);
        }
    }

    void clear() {
        for (auto& t : taps) {
            t.v_plus.samples.clear();
            t.v_minus.samples.clear();
        }
        alice.voltage.samples.clear();
        alice.current.samples.clear();
        bob.voltage.samples.clear();
        bob.current.samples.clear();
        if (has_shunt) {
            shunt.node_voltage.samples.clear();
            shunt.current_alice_side.samples.clear();
            shunt.current_bob_side.samples.clear();
        }
    }

    void record(const Line& line) {
        for (auto& t : taps) {
            t.v_plus.samples.push_back(line.tap_v_plus(t.position));
            t.v_minus.samples.push_back(line.tap_v_minus(t.position));
        }
        alice.voltage.samples.push_back(line.end_voltage_alice());
        alice.current.samples.push_back(line.end_current_alice());
        bob.voltage.samples.push_back(line.end_voltage_bob());
        bob.current.samples.push_back(line.end_current_bob());
        if (has_shunt) {
            shunt.node_voltage.samples.push_back(line.shunt_node_voltage());
            shunt.current_alice_side.samples.push_back(line.shunt_current_alice_side());
            shunt.current_bob_side.samples.push_back(line.shunt_current_bob_side());
        }
    }

    CycleTraces view(std::size_t cycle) const {
        CycleTraces v;
        v.cycle = cycle;
        v.taps = &taps;
        v.alice = &alice;
        v.bob = &bob;
        v.shunt = has_shunt ? &shunt : nullptr;
        return v;
    }
};

} // namespace

KljnRunResult run_kljn(const KljnParams& params, const LineConfig& line, RngStream& rng,
                       const CycleSink& sink) {
    params.validate(line);
    const std::size_t w = params.samples_per_cycle;
    const std::size_t block = params.effective_block(line);
    const auto [ra_low, ra_high] =
        params.alice_resistors.value_or(std::make_pair(params.r_low_ohms, params.r_high_ohms));
    const auto [rb_low, rb_high] =
        params.bob_resistors.value_or(std::make_pair(params.r_low_ohms, params.r_high_ohms));

    KljnRunResult result;
    result.thresholds = params.thresholds ? *params.thresholds : default_thresholds(params, line);
    result.cycles.reserve(params.cycles);

    Line sim(line);
    CycleBuffers buf;
    buf.init(line, w);

    for (std::size_t c = 0; c < params.cycles; ++c) {
        KljnCycle cy;
        cy.alice = rng.coin() ? KljnChoice::high : KljnChoice::low;
        cy.bob = rng.coin() ? KljnChoice::high : KljnChoice::low;
        const double ra = cy.alice == KljnChoice::high ? ra_high : ra_low;
        const double rb = cy.bob == KljnChoice::high ? rb_high : rb_low;
        const Termination ta = Termination::thermal_resistor(ra, params.temperature_kelvin);
        const Termination tb = Termination::thermal_resistor(rb, params.temperature_kelvin);

        buf.clear();
        for (std::size_t s = 0; s < w; ++s) {
            sim.step(ta, tb, rng);
            buf.record(sim);
        }

        const auto window = [&](const SampledTrace& tr) {
            return std::span<const double>(tr.samples).subspan(params.settle_samples,
                                                               w - params.settle_samples);
        };
        cy.msv_alice = band_mean_square(window(buf.alice.voltage), block);
        cy.msv_bob = band_mean_square(window(buf.bob.voltage), block);
        cy.class_alice = classify_msv(cy.msv_alice, result.thresholds);
        cy.class_bob = classify_msv(cy.msv_bob, result.thresholds);

        cy.kept = cy.alice != cy.bob;
        if (cy.kept) {
            cy.alice_bit = cy.alice == KljnChoice::high ? 1 : 0;
            cy.bob_bit = cy.bob == KljnChoice::low ? 1 : 0;
            ++result.kept_count;
        }
        const MsvClass truth = !cy.kept
                                   ? (cy.alice == KljnChoice::low ? MsvClass::low : MsvClass::high)
                                   : MsvClass::mid;
        if (cy.class_alice != truth) ++result.misclassified_alice;
        if (cy.class_bob != truth) ++result.misclassified_bob;

        // each party keeps the cycles it classified as intermediate; a
        // misclassification desynchronizes the keys and is reported, not fixed
        if (cy.class_alice == MsvClass::mid)
            result.key_alice.push_back(cy.alice == KljnChoice::high ? 1 : 0);
        if (cy.class_bob == MsvClass::mid)
            result.key_bob.push_back(cy.bob == KljnChoice::low ? 1 : 0);

        result.cycles.push_back(cy);
        if (sink) sink(buf.view(c));
    }
    return result;
}

NoiselessRunResult run_noiseless(const NoiselessParams& params, const LineConfig& line,
                                 RngStream& rng, const CycleSink& sink) {
    params.validate(line);
    const std::size_t half = params.samples_per_half;
    const std::size_t g = params.ground_samples;
    const Termination open = Termination::open();
    const Termination battery = Termination::battery(params.v0_volts);

    NoiselessRunResult result;
    result.cycles.reserve(params.cycles);

    Line sim(line);
    CycleBuffers buf;
    buf.init(line, 2 * half);

    for (std::size_t c = 0; c < params.cycles; ++c) {
        NoiselessCycle cy;
        cy.alice = rng.coin() ? NoiselessChoice::high_first : NoiselessChoice::low_first;
        cy.bob = rng.coin() ? NoiselessChoice::high_first : NoiselessChoice::low_first;

        buf.clear();
        for (int h = 0; h < 2; ++h) {
            const bool alice_on = (cy.alice == NoiselessChoice::high_first) == (h == 0);
            const bool bob_on = (cy.bob == NoiselessChoice::high_first) == (h == 0);
            for (std::size_t s = 0; s < g; ++s) {
                sim.ground();
                sim.step(open, open, rng);
                buf.record(sim);
            }
            const Termination& ta = alice_on ? battery : open;
            const Termination& tb = bob_on ? battery : open;
            for (std::size_t s = g; s < half; ++s) {
                sim.step(ta, tb, rng);
                buf.record(sim);
            }
        }

        const auto half_mean = [&](const SampledTrace& tr, int h) {
            const std::size_t begin = static_cast<std::size_t>(h) * half + g;
            const std::size_t end = static_cast<std::size_t>(h + 1) * half;
            double acc = 0.0;
            for (std::size_t i = begin; i < end; ++i) acc += tr.samples[i];
            return acc / static_cast<double>(end - begin);
        };
        cy.mean_v_alice_h1 = half_mean(buf.alice.voltage, 0);
        cy.mean_v_alice_h2 = half_mean(buf.alice.voltage, 1);
        cy.mean_v_bob_h1 = half_mean(buf.bob.voltage, 0);
        cy.mean_v_bob_h2 = half_mean(buf.bob.voltage, 1);

        cy.kept = cy.alice != cy.bob;
        if (cy.kept) {
            const int bit = cy.alice == NoiselessChoice::high_first ? 1 : 0;
            cy.alice_bit = bit;
            cy.bob_bit = bit;
            result.key_alice.push_back(bit);
            result.key_bob.push_back(bit);
            ++result.kept_count;
        }
        result.cycles.push_back(cy);
        if (sink) sink(buf.view(c));
    }
    return result;
}

} // namespace kljnlab
