#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "kljnlab/infotheory.hpp"
#include "kljnlab/rng.hpp"

namespace kljnlab {

// binary entropy h(p) in bits, h(0) = h(1) = 0
double binary_entropy(double p);

// standard normal upper tail P(Z > x)
double normal_upper_tail(double x);

// Static lumped circuit: a central node flipped between ground and V0 each
// sample; Alice, Bob and Eve observe it through independent thermal
// resistors, i.e. with independent Gaussian offsets of standard deviation
// johnson_sigma(R_i, T, dt).
struct Fig3Params {
    double v0_volts = 2.2e-6;
    double r_alice_ohms = 1000.0;
    double r_bob_ohms = 1000.0;
    double r_eve_ohms = 430.0;
    double temperature_kelvin = 300.0;
    double dt_seconds = 5e-6;
    std::size_t n_samples = 2'000'000;

    void validate() const;
    double sigma_alice() const;
    double sigma_bob() const;
    double sigma_eve() const;
};

// columns U, A, B, E; U uniform on {0, V0}
JointSamples fig3_sample(const Fig3Params& params, RngStream& rng);

// Gaussian surrogate of the same circuit (U ~ N(V0/2, (V0/2)^2))
GaussianModel fig3_gaussian_surrogate(double sigma_u, double sigma_a, double sigma_b,
                                      double sigma_e);
GaussianModel fig3_gaussian_surrogate(const Fig3Params& params);

struct HardDecision {
    std::vector<int> bits;
    double analytic_error = 0.0; // Phi_bar(threshold / sigma)
};

// bit = 1 iff sample > threshold; with the symmetric threshold V0/2 the
// per-bit error is Phi_bar(V0 / (2 sigma))
HardDecision hard_decision(std::span<const double> column, double threshold, double noise_sigma);

struct PairwiseErrors {
    double ab = 0.0, ae = 0.0, be = 0.0;
};

PairwiseErrors pairwise_error_rates(std::span<const int> bits_a, std::span<const int> bits_b,
                                    std::span<const int> bits_e);

struct DistillBlock {
    std::size_t index = 0;
    bool accepted = false;
    int bob_bit = -1; // present iff accepted
    int eve_bit = -1;
    int true_bit = -1;
};

struct DistillResult {
    std::size_t block_length = 1;
    std::size_t blocks = 0;
    std::size_t accepted = 0;
    std::size_t bob_errors = 0; // on accepted blocks
    std::size_t eve_errors = 0;
    std::vector<DistillBlock> detail;

    double accept_rate() const;
    double eps_bob() const; // accepted-block error rates
    double eps_eve() const;
};

// One round of repetition-block advantage distillation: Alice publishes
// M_i = A_i xor C over each block; Bob accepts when B_i xor M_i is constant,
// Eve takes the majority of E_i xor M_i (ties by coin).
DistillResult advantage_distill(std::span<const int> bits_a, std::span<const int> bits_b,
                                std::span<const int> bits_e, std::size_t block_length,
                                RngStream& rng);

// Bob's accepted-block error for i.i.d. disagreement rate eps:
// eps^N / (eps^N + (1-eps)^N); acceptance probability eps^N + (1-eps)^N.
double repetition_error(double eps, std::size_t block_length);
double repetition_accept_probability(double eps, std::size_t block_length);

// distilled-pair secrecy figure of merit h(eps_eve) - h(eps_bob), clamped at 0
double ck_rate(double eps_bob, double eps_eve);

struct PipelineRow {
    std::size_t block_length = 1;
    std::size_t blocks = 0;
    std::size_t accepted = 0;
    double accept_rate = 0.0;
    double eps_bob = 0.0;
    double eps_eve = 0.0;
    double rate_per_pair = 0.0;   // ck_rate on accepted pairs
    double rate_per_sample = 0.0; // x accepted blocks / source samples
};

struct PipelineReport {
    double analytic_eps_a = 0.0, analytic_eps_b = 0.0, analytic_eps_e = 0.0;
    PairwiseErrors raw;
    std::vector<PipelineRow> rows;
    double cmi_mc_bits = 0.0;      // binned I(A;B|E) on the true model, debiased
    double cmi_mc_stderr = 0.0;
    double cmi_gauss_bits = 0.0;   // closed form on the Gaussian surrogate
    std::size_t best_block = 1;
    double best_rate_per_sample = 0.0;
    bool rate_within_bound = true; // every row respects the MC CMI bound
};

PipelineReport key_rate_pipeline(const Fig3Params& params,
                                 std::span<const std::size_t> block_grid, RngStream& rng,
                                 std::size_t cmi_bins = 16);

struct SweepRow {
    double r_eve_ohms = 0.0;
    std::size_t best_block = 1;
    double accept_rate = 0.0;
    double eps_bob = 0.0;
    double eps_eve = 0.0;
    double rate_per_sample = 0.0;
    double cmi_mc_bits = 0.0;
    double cmi_mc_stderr = 0.0; // not part of the CSV schema
    double cmi_gauss_bits = 0.0;
};

// one pipeline per R_E grid point, each on its own rng substream
std::vector<SweepRow> sweep_re(const Fig3Params& base, std::span<const double> re_grid,
                               std::span<const std::size_t> block_grid, RngStream& rng);

} // namespace kljnlab
