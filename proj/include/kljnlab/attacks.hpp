#pragma once

#include <cstddef>
#include <vector>

#include "kljnlab/protocols.hpp"
#include "kljnlab/txline.hpp"

namespace kljnlab {

inline constexpr int kAbstain = -1;

struct EveGuess {
    std::size_t cycle = 0;
    int guessed_bit = kAbstain; // 0, 1, or kAbstain
    double statistic = 0.0;
};

// Round-trip lags of the echo statistic: a right-mover passing the tap
// returns in the left-moving field exactly 2*(D - tap) samples later with
// amplitude Gamma_Bob, and symmetrically 2*tap for Alice.
struct EchoConfig {
    std::size_t lag_alice = 0; // 2 * tap
    std::size_t lag_bob = 0;   // 2 * (D - tap)
    std::size_t window_begin = 0;
    std::size_t window_end = 0; // cycle-local sample range

    static EchoConfig for_tap(const LineConfig& line, std::size_t tap, std::size_t window_begin,
                              std::size_t window_end);
    void validate() const;
};

struct EchoStats {
    double c_alice = 0.0; // cross_correlation(v_minus, v_plus, lag_alice)
    double c_bob = 0.0;   // cross_correlation(v_plus, v_minus, lag_bob)
};

EchoStats echo_statistics(const TapRecord& cycle_tap, const EchoConfig& cfg);

struct RmsConfig {
    MsvThresholds thresholds;
    std::size_t settle_samples = 0;
    std::size_t block_samples = 1;
    bool forced = false;      // emit a bit on MID cycles instead of abstaining
    double mid_split = 0.0;   // forced decision boundary (analytic MID level)
};

struct RmsStat {
    MsvClass cls = MsvClass::mid;
    double msv = 0.0;
};

RmsStat rms_statistic(const TapRecord& cycle_tap, const RmsConfig& cfg);

struct TransientConfig {
    double threshold = 0.0;          // strict |v| > threshold detection
    std::size_t window_begin = 0;    // cycle-local range to scan (first half)
    std::size_t window_end = 0;
};

struct TransientHit {
    int direction = 0;         // +1 wavefront from Alice's side, -1 from Bob's, 0 none
    std::ptrdiff_t sample = -1; // cycle-local index of the first crossing
};

TransientHit first_arrival(const TapRecord& cycle_tap, const TransientConfig& cfg);

// --- whole-run attacks over per-cycle records ---

// Classifies each cycle from the tap mean-square voltage. MID cycles abstain
// (the kept set carries no MSV information) unless cfg.forced is set, in
// which case the guess is the sign of msv - mid_split.
std::vector<EveGuess> rms_attack(const std::vector<TapRecord>& cycle_taps, const RmsConfig& cfg);

// Sign tests on the two echo correlations; on kept cycles emits the bit of
// the implied HL/LH assignment (bit = 1 iff Alice inferred H).
std::vector<EveGuess> echo_attack(const std::vector<TapRecord>& cycle_taps,
                                  const EchoConfig& cfg);

// First-threshold-crossing direction in the scan window; the earlier arrival
// names the party that connected first (bit = 1 iff that is Alice).
std::vector<EveGuess> transient_attack(const std::vector<TapRecord>& cycle_taps,
                                       const TransientConfig& cfg);

struct ShuntAttackConfig {
    std::size_t samples_per_half = 0;
    std::size_t ground_samples = 0;
};

// Compares the sustained line current on the Alice side of the shunt node
// with the Bob side during the first half; the feeding side identifies the
// connected battery. Exact ties (no shunt current) fall back to a coin.
std::vector<EveGuess> shunt_attack(const std::vector<ShuntRecord>& cycle_records,
                                   const ShuntAttackConfig& cfg, RngStream& tie_rng);

struct LeakageMonitorConfig {
    std::size_t samples_per_half = 0;
    std::size_t ground_samples = 0;
    std::size_t delay_samples = 0; // line D; averaging aligns to the 4D ring period
    double i_min_amperes = 0.0;
};

struct LeakageReport {
    bool abort = false;
    double max_discrepancy = 0.0;      // amperes
    std::size_t first_abort_cycle = 0; // valid when abort
};

// |mean terminal current| over the late whole-period window of a battery
// half; zero without a shunt, ~V0/R_s with one.
double terminal_discrepancy(const SampledTrace& current, std::size_t half_begin,
                            std::size_t half_end, std::size_t ground_samples,
                            std::size_t delay_samples);

// Each party checks its own battery half of every cycle against the no-shunt
// prediction (zero sustained current) and aborts past i_min.
LeakageReport leakage_monitor(const std::vector<EndRecord>& alice_cycles,
                              const std::vector<EndRecord>& bob_cycles,
                              const std::vector<NoiselessCycle>& outcomes,
                              const LeakageMonitorConfig& cfg);

// primary guess unless it abstained, else fallback
std::vector<EveGuess> combine_guesses(const std::vector<EveGuess>& primary,
                                      const std::vector<EveGuess>& fallback);

struct AttackAccuracy {
    bool defined = false;   // false when every kept cycle was abstained
    double accuracy = 0.0;  // over scored kept cycles
    double abstain_rate = 0.0;
    std::size_t scored = 0;
    std::size_t kept = 0;
};

AttackAccuracy attack_accuracy(const std::vector<EveGuess>& guesses,
                               const std::vector<bool>& kept,
                               const std::vector<int>& true_bits);

} // namespace kljnlab
