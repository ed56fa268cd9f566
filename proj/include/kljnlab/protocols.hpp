#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "kljnlab/txline.hpp"

namespace kljnlab {

enum class KljnChoice : std::uint8_t { low, high };
enum class NoiselessChoice : std::uint8_t { low_first, high_first };
enum class MsvClass : std::uint8_t { low, mid, high };

struct MsvThresholds {
    double low = 0.0;  // volts^2
    double high = 0.0; // volts^2
};

// LOW below theta_low, HIGH above theta_high, MID between.
MsvClass classify_msv(double msv, const MsvThresholds& thresholds);

double parallel_resistance(double ra_ohms, double rb_ohms);

// Lumped-circuit mean square of the block-averaged node voltage:
// 4 kB T (Ra || Rb) f_N / block. The moving-average block sets the
// measurement bandwidth f_N / block, well below the line's free spectral
// range, where the wave simulation reduces to the lumped circuit.
double kljn_msv_level(double r_parallel_ohms, double t_kelvin, double dt_seconds,
                      std::size_t block);

struct KljnParams {
    double r_low_ohms = 1000.0;
    double r_high_ohms = 9000.0;
    double temperature_kelvin = 300.0;
    std::size_t cycles = 400;
    std::size_t samples_per_cycle = 32768;
    std::size_t settle_samples = 160;      // excluded from the measurement window
    std::size_t msv_block_samples = 0;     // 0 -> 32 * delay_samples
    std::optional<MsvThresholds> thresholds; // default: geometric midpoints
    // test hook: per-party (low, high) resistor overrides
    std::optional<std::pair<double, double>> alice_resistors;
    std::optional<std::pair<double, double>> bob_resistors;

    std::size_t effective_block(const LineConfig& line) const;
    void validate(const LineConfig& line) const;
};

MsvThresholds default_thresholds(const KljnParams& params, const LineConfig& line);

struct NoiselessParams {
    double v0_volts = 1.0;
    std::size_t cycles = 200;
    std::size_t samples_per_half = 1024;
    std::size_t ground_samples = 32;

    void validate(const LineConfig& line) const;
};

struct KljnCycle {
    KljnChoice alice = KljnChoice::low;
    KljnChoice bob = KljnChoice::low;
    bool kept = false; // choices differ
    std::optional<int> alice_bit, bob_bit; // present iff kept; 1 iff Alice chose H
    double msv_alice = 0.0, msv_bob = 0.0; // band-limited own-end MSV, volts^2
    MsvClass class_alice = MsvClass::mid, class_bob = MsvClass::mid;
};

struct KljnRunResult {
    std::vector<KljnCycle> cycles;
    std::vector<int> key_alice, key_bob; // bits of cycles each party classified MID
    MsvThresholds thresholds;
    std::size_t misclassified_alice = 0; // own classification disagrees with truth
    std::size_t misclassified_bob = 0;
    std::size_t kept_count = 0;
};

struct NoiselessCycle {
    NoiselessChoice alice = NoiselessChoice::low_first;
    NoiselessChoice bob = NoiselessChoice::low_first;
    bool kept = false; // choices differ
    std::optional<int> alice_bit, bob_bit; // 1 iff Alice chose H-first
    // mean node voltage per half at each party's end (settled part)
    double mean_v_alice_h1 = 0.0, mean_v_alice_h2 = 0.0;
    double mean_v_bob_h1 = 0.0, mean_v_bob_h2 = 0.0;
};

struct NoiselessRunResult {
    std::vector<NoiselessCycle> cycles;
    std::vector<int> key_alice, key_bob;
    std::size_t kept_count = 0;
};

// Per-cycle trace view handed to a sink while the cycle buffers are alive.
struct CycleTraces {
    std::size_t cycle = 0;
    const std::vector<TapRecord>* taps = nullptr;
    const EndRecord* alice = nullptr;
    const EndRecord* bob = nullptr;
    const ShuntRecord* shunt = nullptr; // only when the line has a shunt
};

using CycleSink = std::function<void(const CycleTraces&)>;

// Fig.-1 style protocol: both parties terminate with a thermal resistor of
// their choice each cycle; kept cycles are those where the choices differ.
// Switching is instantaneous at cycle boundaries and the line state carries
// over, so Eve's record contains the switching transients.
KljnRunResult run_kljn(const KljnParams& params, const LineConfig& line, RngStream& rng,
                       const CycleSink& sink = {});

// Noiseless variant: per half-cycle each party either connects an ideal
// battery V0 (H phase) or leaves its end open (L phase); the line is
// re-grounded for ground_samples at the start of every half.
NoiselessRunResult run_noiseless(const NoiselessParams& params, const LineConfig& line,
                                 RngStream& rng, const CycleSink& sink = {});

} // namespace kljnlab
