#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "kljnlab/signal.hpp"

namespace kljnlab {

// Lossless bidirectional delay line, one cell per sample. Nodes are numbered
// 0..D with Alice terminating node 0 and Bob node D; interior nodes 1..D-1
// can carry observation taps and at most one resistive shunt to ground.
//
// Wave bookkeeping: sample s records the waves that crossed each node during
// step s+1, so a front launched by Alice at t=0 shows up at node k at sample
// index k, and Bob's at sample D-k. The round trip from a tap at node k to
// Bob and back is exactly 2*(D-k) samples, to Alice and back 2*k.

struct ShuntConfig {
    std::size_t position = 0; // interior node index
    double resistance_ohms = 0.0;
};

struct LineConfig {
    double z0_ohms = 50.0;
    std::size_t delay_samples = 8; // one-way delay D
    double dt_seconds = 1.0;
    std::vector<std::size_t> tap_positions; // interior nodes, in [1, D-1]
    std::optional<ShuntConfig> shunt;

    void validate() const;
};

// Thevenin termination. Open circuit is represented explicitly so the
// reflection coefficient stays exactly +1.
struct Termination {
    std::optional<double> resistance_ohms;    // nullopt = open circuit
    double bias_volts = 0.0;                  // constant series source
    std::optional<SampledTrace> source;       // per-sample series source
    bool thermal = false;                     // Johnson noise from (R, T)
    double temperature_kelvin = 0.0;

    static Termination open();
    static Termination resistor(double r_ohms);
    static Termination battery(double volts); // R = 0, constant source
    static Termination thermal_resistor(double r_ohms, double t_kelvin);

    bool is_open() const noexcept { return !resistance_ohms.has_value(); }
    void validate() const;
};

// Gamma = (R - Z0)/(R + Z0); open -> +1, short -> -1.
double reflection_coefficient(std::optional<double> r_ohms, double z0_ohms);

// Outgoing wave at a Thevenin termination: b = Gamma*a + (Z0/(R+Z0))*e.
// Open: b = a. Ideal source (R = 0): b = e - a.
double terminate_scatter(double incident, const Termination& term, double source_sample,
                         double z0_ohms);

// Scattering at an interior shunt R_s to ground. rho = -Z0/(Z0 + 2 R_s);
// returns (outgoing-left, outgoing-right).
std::pair<double, double> shunt_scatter(double incident_left, double incident_right,
                                        double r_shunt_ohms, double z0_ohms);

// v_plus = (V + Z0 I)/2, v_minus = (V - Z0 I)/2.
std::pair<double, double> wave_decompose(double voltage, double current, double z0_ohms);

// wave decomposition of a node cross-section (v_plus toward Bob, v_minus
// toward Alice); reconstructed V = v_plus + v_minus, I = (v_plus - v_minus)/Z0
struct TapRecord {
    std::size_t position = 0;
    SampledTrace v_plus;
    SampledTrace v_minus;
};

struct EndRecord {
    SampledTrace voltage;
    SampledTrace current; // positive toward Bob
};

struct ShuntRecord {
    SampledTrace node_voltage;
    SampledTrace current_alice_side; // line current just left of the node
    SampledTrace current_bob_side;   // line current just right of the node
};

class Line {
public:
    explicit Line(LineConfig cfg);

    const LineConfig& config() const noexcept { return cfg_; }

    // advance one sample interval; thermal terminations draw from rng
    void step(const Termination& alice, const Termination& bob, RngStream& rng);

    // force all wave state to zero (the idealized grounding switch)
    void ground();

    std::size_t steps() const noexcept { return t_; }

    // wave state accessors; i indexes cells 0..D-1
    double right_wave(std::size_t i) const { return right_[(rh_ + i) % depth_]; }
    double left_wave(std::size_t i) const { return left_[(lh_ + i) % depth_]; }
    // sum of squared wave amplitudes (proportional to stored energy)
    double wave_energy() const;

    // records of the most recent step
    double tap_v_plus(std::size_t node) const;
    double tap_v_minus(std::size_t node) const;
    double node_voltage(std::size_t node) const;
    double node_current(std::size_t node) const;
    double end_voltage_alice() const noexcept { return va_; }
    double end_current_alice() const noexcept { return ia_; }
    double end_voltage_bob() const noexcept { return vb_; }
    double end_current_bob() const noexcept { return ib_; }
    double shunt_node_voltage() const noexcept { return sv_; }
    double shunt_current_alice_side() const noexcept { return sia_; }
    double shunt_current_bob_side() const noexcept { return sib_; }

private:
    LineConfig cfg_;
    std::size_t depth_;
    std::vector<double> right_, left_;
    std::size_t rh_ = 0, lh_ = 0;
    std::size_t t_ = 0;
    double va_ = 0, ia_ = 0, vb_ = 0, ib_ = 0;
    double sv_ = 0, sia_ = 0, sib_ = 0;
    // incident-from-left capture so taps on the shunt node stay consistent
    double shunt_out_left_ = 0;
    // per-side thermal sigma cache keyed on (R, T)
    mutable double cache_r_[2] = {-1.0, -1.0};
    mutable double cache_t_[2] = {-1.0, -1.0};
    mutable double cache_sigma_[2] = {0.0, 0.0};

    double source_sample(const Termination& term, int side, RngStream& rng) const;
};

// Piecewise-constant termination over time; switching is instantaneous at the
// given sample indices.
class TerminationSchedule {
public:
    TerminationSchedule() = default;
    static TerminationSchedule fixed(Termination term);

    // term applies from sample `from` onward (must be appended in order)
    void add(std::size_t from, Termination term);
    const Termination& at(std::size_t sample) const;

private:
    std::vector<std::pair<std::size_t, Termination>> segments_;
};

struct RunRecord {
    std::vector<TapRecord> taps;
    EndRecord alice;
    EndRecord bob;
    std::optional<ShuntRecord> shunt;
};

// Iterate `n` steps recording every configured tap and both end nodes.
RunRecord run(const LineConfig& cfg, const TerminationSchedule& alice,
              const TerminationSchedule& bob, std::size_t n, RngStream& rng);

} // namespace kljnlab
