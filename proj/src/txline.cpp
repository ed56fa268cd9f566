#include "kljnlab/txline.hpp"

#include <cmath>
#include <stdexcept>

namespace kljnlab {

void LineConfig::validate() const {
    if (!(z0_ohms > 0.0)) throw std::domain_error("LineConfig: Z0 must be positive");
    if (delay_samples < 2) throw std::domain_error("LineConfig: delay must be at least 2 samples");
    if (!(dt_seconds > 0.0)) throw std::domain_error("LineConfig: dt must be positive");
    for (std::size_t p : tap_positions) {
        if (p < 1 || p > delay_samples - 1)
            throw std::domain_error("LineConfig: tap position outside [1, D-1]");
    }
    if (shunt) {
        if (shunt->position < 1 || shunt->position > delay_samples - 1)
            throw std::domain_error("LineConfig: shunt position outside [1, D-1]");
        if (!(shunt->resistance_ohms > 0.0))
            throw std::domain_error("LineConfig: shunt resistance must be positive");
    }
}

Termination Termination::open() {
    return Termination{};
}

Termination Termination::resistor(double r_ohms) {
    Termination t;
    t.resistance_ohms = r_ohms;
    t.validate();
    return t;
}

Termination Termination::battery(double volts) {
    Termination t;
    t.resistance_ohms = 0.0;
    t.bias_volts = volts;
    return t;
}

Termination Termination::thermal_resistor(double r_ohms, double t_kelvin) {
    Termination t;
    t.resistance_ohms = r_ohms;
    t.thermal = true;
    t.temperature_kelvin = t_kelvin;
    t.validate();
    return t;
}

void Termination::validate() const {
    if (resistance_ohms && *resistance_ohms < 0.0)
        throw std::domain_error("Termination: negative resistance");
    if (thermal && (!resistance_ohms || !(*resistance_ohms > 0.0)))
        throw std::domain_error("Termination: thermal requires finite positive resistance");
    if (thermal && temperature_kelvin < 0.0)
        throw std::domain_error("Termination: negative temperature");
}

double reflection_coefficient(std::optional<double> r_ohms, double z0_ohms) {
    if (!(z0_ohms > 0.0)) throw std::domain_error("reflection_coefficient: Z0 must be positive");
    if (!r_ohms) return 1.0;
    if (*r_ohms < 0.0) throw std::domain_error("reflection_coefficient: negative resistance");
    return (*r_ohms - z0_ohms) / (*r_ohms + z0_ohms);
}

double terminate_scatter(double incident, const Termination& term, double source_sample,
                         double z0_ohms) {
    if (term.is_open()) return incident;
    const double r = *term.resistance_ohms;
    const double gamma = (r - z0_ohms) / (r + z0_ohms);
    const double tau = z0_ohms / (r + z0_ohms);
    return gamma * incident + tau * source_sample;
}

std::pair<double, double> shunt_scatter(double incident_left, double incident_right,
                                        double r_shunt_ohms, double z0_ohms) {
    if (!(r_shunt_ohms > 0.0)) throw std::domain_error("shunt_scatter: R_s must be positive");
    const double rho = -z0_ohms / (z0_ohms + 2.0 * r_shunt_ohms);
    const double out_left = rho * incident_left + (1.0 + rho) * incident_right;
    const double out_right = (1.0 + rho) * incident_left + rho * incident_right;
    return {out_left, out_right};
}

std::pair<double, double> wave_decompose(double voltage, double current, double z0_ohms) {
    if (!(z0_ohms > 0.0)) throw std::domain_error("wave_decompose: Z0 must be positive");
    return {(voltage + z0_ohms * current) / 2.0, (voltage - z0_ohms * current) / 2.0};
}

Line::Line(LineConfig cfg) : cfg_(std::move(cfg)), depth_(cfg_.delay_samples) {
    cfg_.validate();
    right_.assign(depth_, 0.0);
    left_.assign(depth_, 0.0);
}

double Line::source_sample(const Termination& term, int side, RngStream& rng) const {
    double e = term.bias_volts;
    if (term.source && t_ < term.source->samples.size()) e += term.source->samples[t_];
    if (term.thermal) {
        const double r = *term.resistance_ohms;
        if (cache_r_[side] != r || cache_t_[side] != term.temperature_kelvin) {
            cache_r_[side] = r;
            cache_t_[side] = term.temperature_kelvin;
            cache_sigma_[side] = johnson_sigma(r, term.temperature_kelvin, cfg_.dt_seconds);
        }
        e += cache_sigma_[side] * rng.gaussian();
    }
    return e;
}

void Line::step(const Termination& alice, const Termination& bob, RngStream& rng) {
    const double z0 = cfg_.z0_ohms;
    const double in_alice = left_wave(0);
    const double in_bob = right_wave(depth_ - 1);
    const double ea = source_sample(alice, 0, rng);
    const double eb = source_sample(bob, 1, rng);
    const double out_alice = terminate_scatter(in_alice, alice, ea, z0);
    const double out_bob = terminate_scatter(in_bob, bob, eb, z0);

    va_ = in_alice + out_alice;
    ia_ = (out_alice - in_alice) / z0;
    vb_ = in_bob + out_bob;
    ib_ = (in_bob - out_bob) / z0;

    double sl = 0.0, sr = 0.0;
    if (cfg_.shunt) {
        const std::size_t m = cfg_.shunt->position;
        const double al = right_wave(m - 1); // arrives at node m from the left
        const double ar = left_wave(m);      // arrives at node m from the right
        auto [bl, br] = shunt_scatter(al, ar, cfg_.shunt->resistance_ohms, z0);
        sl = bl;
        sr = br;
        shunt_out_left_ = al;
        sv_ = al + bl;
        sia_ = (al - bl) / z0;
        sib_ = (br - ar) / z0;
    }

    // shift right-movers one cell toward Bob, left-movers toward Alice
    rh_ = (rh_ + depth_ - 1) % depth_;
    right_[rh_] = out_alice;
    lh_ = (lh_ + 1) % depth_;
    left_[(lh_ + depth_ - 1) % depth_] = out_bob;
    if (cfg_.shunt) {
        const std::size_t m = cfg_.shunt->position;
        right_[(rh_ + m) % depth_] = sr;
        left_[(lh_ + m - 1) % depth_] = sl;
    }

    ++t_;
}

void Line::ground() {
    right_.assign(depth_, 0.0);
    left_.assign(depth_, 0.0);
}

double Line::wave_energy() const {
    double acc = 0.0;
    for (double v : right_) acc += v * v;
    for (double v : left_) acc += v * v;
    return acc / cfg_.z0_ohms;
}

double Line::tap_v_plus(std::size_t node) const {
    if (node < 1 || node > depth_ - 1) throw std::domain_error("tap position outside [1, D-1]");
    if (cfg_.shunt && node == cfg_.shunt->position) return shunt_out_left_;
    return right_wave(node);
}

double Line::tap_v_minus(std::size_t node) const {
    if (node < 1 || node > depth_ - 1) throw std::domain_error("tap position outside [1, D-1]");
    return left_wave(node - 1);
}

double Line::node_voltage(std::size_t node) const {
    return tap_v_plus(node) + tap_v_minus(node);
}

double Line::node_current(std::size_t node) const {
    return (tap_v_plus(node) - tap_v_minus(node)) / cfg_.z0_ohms;
}

TerminationSchedule TerminationSchedule::fixed(Termination term) {
    TerminationSchedule s;
    s.add(0, std::move(term));
    return s;
}

void TerminationSchedule::add(std::size_t from, Termination term) {
    if (!segments_.empty() && from <= segments_.back().first)
        throw std::domain_error("TerminationSchedule: segments must be appended in order");
    if (segments_.empty() && from != 0)
        throw std::domain_error("TerminationSchedule: first segment must start at 0");
    term.validate();
    segments_.emplace_back(from, std::move(term));
}

const Termination& TerminationSchedule::at(std::size_t sample) const {
    if (segments_.empty()) throw std::domain_error("TerminationSchedule: empty");
    std::size_t i = segments_.size();
    while (i > 0 && segments_[i - 1].first > sample) --i;
    return segments_[i - 1].second;
}

RunRecord run(const LineConfig& cfg, const TerminationSchedule& alice,
              const TerminationSchedule& bob, std::size_t n, RngStream& rng) {
    if (n < 1) throw std::domain_error("run: need at least one sample");
    Line line(cfg);
    RunRecord rec;
    const double dt = cfg.dt_seconds;
    rec.taps.reserve(cfg.tap_positions.size());
    for (std::size_t p : cfg.tap_positions) {
        TapRecord t;
        t.position = p;
        t.v_plus.dt = dt;
        t.v_minus.dt = dt;
        t.v_plus.samples.reserve(n);
        t.v_minus.samples.reserve(n);
        rec.taps.push_back(std::move(t));
    }
    rec.alice.voltage.dt = rec.alice.current.dt = dt;
    rec.bob.voltage.dt = rec.bob.current.dt = dt;
    if (cfg.shunt) {
        rec.shunt.emplace();
        rec.shunt->node_voltage.dt = dt;
        rec.shunt->current_alice_side.dt = dt;
        rec.shunt->current_bob_side.dt = dt;
    }

    for (std::size_t s = 0; s < n; ++s) {
        line.step(alice.at(s), bob.at(s), rng);
        for (std::size_t i = 0; i < rec.taps.size(); ++i) {
            rec.taps[i].v_plus.samples.push_back(line.tap_v_plus(rec.taps[i].position));
            rec.taps[i].v_minus.samples.push_back(line.tap_v_minus(rec.taps[i].position));
        }
        rec.alice.voltage.samples.push_back(line.end_voltage_alice());
        rec.alice.current.samples.push_back(line.end_current_alice());
        rec.bob.voltage.samples.push_back(line.end_voltage_bob());
        rec.bob.current.samples.push_back(line.end_current_bob());
        if (rec.shunt) {
            rec.shunt->node_voltage.samples.push_back(line.shunt_node_voltage());
            rec.shunt->current_alice_side.samples.push_back(line.shunt_current_alice_side());
            rec.shunt->current_bob_side.samples.push_back(line.shunt_current_bob_side());
        }
    }
    return rec;
}

} // namespace kljnlab
