#include "kljnlab/distill.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "kljnlab/signal.hpp"

namespace kljnlab {

double binary_entropy(double p) {
    if (p < 0.0 || p > 1.0) throw std::domain_error("binary_entropy: p outside [0, 1]");
    if (p == 0.0 || p == 1.0) return 0.0;
    return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

double normal_upper_tail(double x) {
    return 0.5 * std::erfc(x / std::sqrt(2.0));
}

void Fig3Params::validate() const {
    if (!(v0_volts > 0.0)) throw std::domain_error("Fig3Params: V0 must be positive");
    if (!(r_alice_ohms > 0.0) || !(r_bob_ohms > 0.0))
        throw std::domain_error("Fig3Params: R_A and R_B must be positive");
    if (r_eve_ohms < 0.0) throw std::domain_error("Fig3Params: R_E must be nonnegative");
    if (temperature_kelvin < 0.0) throw std::domain_error("Fig3Params: negative temperature");
    if (!(dt_seconds > 0.0)) throw std::domain_error("Fig3Params: dt must be positive");
    if (n_samples < 1) throw std::domain_error("Fig3Params: need at least one sample");
}

double Fig3Params::sigma_alice() const {
    return johnson_sigma(r_alice_ohms, temperature_kelvin, dt_seconds);
}
double Fig3Params::sigma_bob() const {
    return johnson_sigma(r_bob_ohms, temperature_kelvin, dt_seconds);
}
double Fig3Params::sigma_eve() const {
    return johnson_sigma(r_eve_ohms, temperature_kelvin, dt_seconds);
}

JointSamples fig3_sample(const Fig3Params& params, RngStream& rng) {
    params.validate();
    const double sa = params.sigma_alice();
    const double sb = params.sigma_bob();
    const double se = params.sigma_eve();
    std::vector<double> u(params.n_samples), a(params.n_samples), b(params.n_samples),
        e(params.n_samples);
    for (std::size_t i = 0; i < params.n_samples; ++i) {
        u[i] = rng.coin() ? params.v0_volts : 0.0;
        a[i] = u[i] + sa * rng.gaussian();
        b[i] = u[i] + sb * rng.gaussian();
        e[i] = u[i] + se * rng.gaussian();
    }
    JointSamples s;
    s.add_real("U", std::move(u));
    s.add_real("A", std::move(a));
    s.add_real("B", std::move(b));
    s.add_real("E", std::move(e));
    return s;
}

GaussianModel fig3_gaussian_surrogate(double sigma_u, double sigma_a, double sigma_b,
                                      double sigma_e) {
    GaussianModel m;
    m.names = {"A", "B", "E"};
    m.mean = {0.0, 0.0, 0.0};
    const double vu = sigma_u * sigma_u;
    const double diag[3] = {sigma_a * sigma_a, sigma_b * sigma_b, sigma_e * sigma_e};
    m.covariance.assign(9, vu);
    for (int i = 0; i < 3; ++i) m.covariance[i * 3 + i] += diag[i];
    return m;
}

GaussianModel fig3_gaussian_surrogate(const Fig3Params& params) {
    return fig3_gaussian_surrogate(params.v0_volts / 2.0, params.sigma_alice(),
                                   params.sigma_bob(), params.sigma_eve());
}

HardDecision hard_decision(std::span<const double> column, double threshold, double noise_sigma) {
    if (!std::isfinite(threshold)) throw std::domain_error("hard_decision: threshold not finite");
    if (noise_sigma < 0.0) throw std::domain_error("hard_decision: negative sigma");
    HardDecision d;
    d.bits.resize(column.size());
    for (std::size_t i = 0; i < column.size(); ++i) d.bits[i] = column[i] > threshold ? 1 : 0;
    d.analytic_error = noise_sigma > 0.0 ? normal_upper_tail(threshold / noise_sigma) : 0.0;
    return d;
}

PairwiseErrors pairwise_error_rates(std::span<const int> bits_a, std::span<const int> bits_b,
                                    std::span<const int> bits_e) {
    if (bits_a.size() != bits_b.size() || bits_b.size() != bits_e.size())
        throw std::domain_error("pairwise_error_rates: length mismatch");
    if (bits_a.empty()) throw std::domain_error("pairwise_error_rates: empty input");
    std::size_t ab = 0, ae = 0, be = 0;
    for (std::size_t i = 0; i < bits_a.size(); ++i) {
        ab += bits_a[i] != bits_b[i];
        ae += bits_a[i] != bits_e[i];
        be += bits_b[i] != bits_e[i];
    }
    const double n = static_cast<double>(bits_a.size());
    return {ab / n, ae / n, be / n};
}

double DistillResult::accept_rate() const {
    return blocks == 0 ? 0.0 : static_cast<double>(accepted) / static_cast<double>(blocks);
}
double DistillResult::eps_bob() const {
    return accepted == 0 ? 0.0 : static_cast<double>(bob_errors) / static_cast<double>(accepted);
}
double DistillResult::eps_eve() const {
    return accepted == 0 ? 0.0 : static_cast<double>(eve_errors) / static_cast<double>(accepted);
}

DistillResult advantage_distill(std::span<const int> bits_a, std::span<const int> bits_b,
                                std::span<const int> bits_e, std::size_t block_length,
                                RngStream& rng) {
    if (block_length < 1) throw std::domain_error("advantage_distill: block length must be >= 1");
    if (bits_a.size() != bits_b.size() || bits_b.size() != bits_e.size())
        throw std::domain_error("advantage_distill: length mismatch");
    DistillResult res;
    res.block_length = block_length;
    res.blocks = bits_a.size() / block_length;
    res.detail.reserve(res.blocks);
    for (std::size_t blk = 0; blk < res.blocks; ++blk) {
        const std::size_t base = blk * block_length;
        const int secret = rng.coin() ? 1 : 0;
        DistillBlock d;
        d.index = blk;
        d.true_bit = secret;
        // Bob accepts iff B_i xor M_i is constant over the block
        bool accept = true;
        const int first = bits_b[base] ^ bits_a[base] ^ secret;
        std::size_t eve_ones = 0;
        for (std::size_t i = 0; i < block_length; ++i) {
            const int m = bits_a[base + i] ^ secret; // the published symbol
            if ((bits_b[base + i] ^ m) != first) accept = false;
            eve_ones += static_cast<std::size_t>(bits_e[base + i] ^ m);
        }
        if (accept) {
            d.accepted = true;
            d.bob_bit = first;
            if (2 * eve_ones > block_length)
                d.eve_bit = 1;
            else if (2 * eve_ones < block_length)
                d.eve_bit = 0;
            else
                d.eve_bit = rng.coin() ? 1 : 0;
            ++res.accepted;
            res.bob_errors += d.bob_bit != secret;
            res.eve_errors += d.eve_bit != secret;
        }
        res.detail.push_back(d);
    }
    return res;
}

double repetition_error(double eps, std::size_t block_length) {
    const double en = std::pow(eps, static_cast<double>(block_length));
    const double qn = std::pow(1.0 - eps, static_cast<double>(block_length));
    return en / (en + qn);
}

double repetition_accept_probability(double eps, std::size_t block_length) {
    return std::pow(eps, static_cast<double>(block_length)) +
           std::pow(1.0 - eps, static_cast<double>(block_length));
}

double ck_rate(double eps_bob, double eps_eve) {
    return std::max(0.0, binary_entropy(eps_eve) - binary_entropy(eps_bob));
}

PipelineReport key_rate_pipeline(const Fig3Params& params,
                                 std::span<const std::size_t> block_grid, RngStream& rng,
                                 std::size_t cmi_bins) {
    if (block_grid.empty()) throw std::domain_error("key_rate_pipeline: empty block grid");
    PipelineReport rep;
    const JointSamples samples = fig3_sample(params, rng);
    const double th = params.v0_volts / 2.0;
    const HardDecision da = hard_decision(samples.column("A").real, th, params.sigma_alice());
    const HardDecision db = hard_decision(samples.column("B").real, th, params.sigma_bob());
    const HardDecision de = hard_decision(samples.column("E").real, th, params.sigma_eve());
    rep.analytic_eps_a = da.analytic_error;
    rep.analytic_eps_b = db.analytic_error;
    rep.analytic_eps_e = de.analytic_error;
    rep.raw = pairwise_error_rates(da.bits, db.bits, de.bits);

    const double n = static_cast<double>(params.n_samples);
    for (std::size_t blk : block_grid) {
        DistillResult d = advantage_distill(da.bits, db.bits, de.bits, blk, rng);
        PipelineRow row;
        row.block_length = blk;
        row.blocks = d.blocks;
        row.accepted = d.accepted;
        row.accept_rate = d.accept_rate();
        row.eps_bob = d.eps_bob();
        row.eps_eve = d.eps_eve();
        row.rate_per_pair = d.accepted == 0 ? 0.0 : ck_rate(row.eps_bob, row.eps_eve);
        row.rate_per_sample = row.rate_per_pair * static_cast<double>(d.accepted) / n;
        rep.rows.push_back(row);
        if (row.rate_per_sample > rep.best_rate_per_sample) {
            rep.best_rate_per_sample = row.rate_per_sample;
            rep.best_block = blk;
        }
    }

    BinningSpec binning;
    binning.default_bins = cmi_bins;
    const CmiResult c = cmi(samples, {"A"}, {"B"}, {"E"}, binning, rng);
    rep.cmi_mc_bits = std::max(0.0, c.estimate_bits - c.baseline_bits);
    rep.cmi_mc_stderr = c.stderr_bits;
    rep.cmi_gauss_bits = gaussian_cmi(fig3_gaussian_surrogate(params), {"A"}, {"B"}, {"E"});

    for (const auto& row : rep.rows) {
        if (row.rate_per_sample > rep.cmi_mc_bits + 3.0 * rep.cmi_mc_stderr)
            rep.rate_within_bound = false;
    }
    return rep;
}

std::vector<SweepRow> sweep_re(const Fig3Params& base, std::span<const double> re_grid,
                               std::span<const std::size_t> block_grid, RngStream& rng) {
    if (re_grid.empty()) throw std::domain_error("sweep_re: empty grid");
    std::vector<SweepRow> rows;
    for (std::size_t k = 0; k < re_grid.size(); ++k) {
        Fig3Params p = base;
        p.r_eve_ohms = re_grid[k];
        RngStream sub = rng.derive(k);
        const PipelineReport rep = key_rate_pipeline(p, block_grid, sub);
        SweepRow row;
        row.r_eve_ohms = re_grid[k];
        row.best_block = rep.best_block;
        row.rate_per_sample = rep.best_rate_per_sample;
        for (const auto& r : rep.rows) {
            if (r.block_length == rep.best_block) {
                row.accept_rate = r.accept_rate;
                row.eps_bob = r.eps_bob;
                row.eps_eve = r.eps_eve;
            }
        }
        row.cmi_mc_bits = rep.cmi_mc_bits;
        row.cmi_mc_stderr = rep.cmi_mc_stderr;
        row.cmi_gauss_bits = rep.cmi_gauss_bits;
        rows.push_back(row);
    }
    return rows;
}

} // namespace kljnlab
