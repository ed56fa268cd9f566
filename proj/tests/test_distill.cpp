#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "kljnlab/distill.hpp"

using namespace kljnlab;

namespace {

// independent quadrature oracle for the standard normal upper tail
double tail_by_simpson(double x) {
    const double hi = x + 12.0;
    const int n = 200000; // even
    const double h = (hi - x) / n;
    auto pdf = [](double t) { return std::exp(-0.5 * t * t) / std::sqrt(2.0 * M_PI); };
    double acc = pdf(x) + pdf(hi);
    for (int i = 1; i < n; ++i) acc += pdf(x + i * h) * (i % 2 ? 4.0 : 2.0);
    return acc * h / 3.0;
}

// synthetic observer bits: U uniform, each party flips with its own epsilon
struct SyntheticBits {
    std::vector<int> a, b, e;
};

SyntheticBits synthetic_bits(std::size_t n, double eps_a, double eps_b, double eps_e,
                             std::uint64_t seed) {
    SyntheticBits s;
    s.a.resize(n);
    s.b.resize(n);
    s.e.resize(n);
    RngStream rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        const int u = rng.coin();
        s.a[i] = rng.uniform() < eps_a ? 1 - u : u;
        s.b[i] = rng.uniform() < eps_b ? 1 - u : u;
        s.e[i] = rng.uniform() < eps_e ? 1 - u : u;
    }
    return s;
}

} // namespace

TEST_CASE("binary_entropy: endpoints and known values") {
    CHECK(binary_entropy(0.0) == 0.0);
    CHECK(binary_entropy(1.0) == 0.0);
    CHECK(binary_entropy(0.5) == doctest::Approx(1.0).epsilon(1e-12));
    const double h02 = -0.2 * std::log2(0.2) - 0.8 * std::log2(0.8);
    CHECK(binary_entropy(0.2) == doctest::Approx(h02).epsilon(1e-12));
    CHECK_THROWS_AS(binary_entropy(-0.1), std::domain_error);
}

TEST_CASE("normal_upper_tail: agrees with numerical integration") {
    for (double x : {0.0, 0.5, 1.0, 2.0, 3.5}) {
        CHECK(normal_upper_tail(x) == doctest::Approx(tail_by_simpson(x)).epsilon(1e-9));
    }
    CHECK(normal_upper_tail(1.0) == doctest::Approx(0.158655).epsilon(1e-5));
}

TEST_CASE("fig3_sample: construction statistics") {
    Fig3Params p;
    p.n_samples = 200000;
    RngStream rng(51);
    const JointSamples s = fig3_sample(p, rng);
    const auto& u = s.column("U").real;
    const auto& a = s.column("A").real;
    const auto& b = s.column("B").real;

    const double sa = p.sigma_alice();
    const std::size_t n = p.n_samples;
    double va = 0.0, cov = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double da = a[i] - u[i];
        const double db = b[i] - u[i];
        va += da * da;
        cov += da * db;
    }
    va /= static_cast<double>(n);
    cov /= static_cast<double>(n);
    CHECK(std::fabs(va - sa * sa) < 5.0 * sa * sa * std::sqrt(2.0 / static_cast<double>(n)));
    // independent observer noises decorrelate
    CHECK(std::fabs(cov / (sa * p.sigma_bob())) < 5.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("fig3_sample: a noiseless Eve sees the switch exactly") {
    Fig3Params p;
    p.r_eve_ohms = 0.0;
    p.n_samples = 5000;
    RngStream rng(52);
    const JointSamples s = fig3_sample(p, rng);
    const auto& u = s.column("U").real;
    const auto& e = s.column("E").real;
    for (std::size_t i = 0; i < p.n_samples; ++i) CHECK(e[i] == u[i]);
}

TEST_CASE("hard_decision: threshold and analytic error") {
    const std::vector<double> column{-0.1, 0.4, 0.6, 1.2};
    const HardDecision d = hard_decision(column, 0.5, 0.0);
    CHECK(d.bits == std::vector<int>{0, 0, 1, 1});
    CHECK(d.analytic_error == 0.0); // sigma -> 0

    const HardDecision d2 = hard_decision(column, 0.5, 0.5); // threshold/sigma = 1
    CHECK(d2.analytic_error == doctest::Approx(0.158655).epsilon(1e-5));
}

TEST_CASE("hard_decision: empirical error matches the analytic rate") {
    Fig3Params p;
    p.n_samples = 400000;
    RngStream rng(53);
    const JointSamples s = fig3_sample(p, rng);
    const HardDecision d =
        hard_decision(s.column("A").real, p.v0_volts / 2.0, p.sigma_alice());
    const auto& u = s.column("U").real;
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < p.n_samples; ++i) {
        const int ubit = u[i] > p.v0_volts / 2.0 ? 1 : 0;
        wrong += d.bits[i] != ubit;
    }
    const double emp = static_cast<double>(wrong) / static_cast<double>(p.n_samples);
    const double eps = d.analytic_error;
    CHECK(std::fabs(emp - eps) <
          5.0 * std::sqrt(eps * (1.0 - eps) / static_cast<double>(p.n_samples)));
}

TEST_CASE("pairwise_error_rates: identities and composition") {
    const std::vector<int> ones(1000, 1);
    const PairwiseErrors same = pairwise_error_rates(ones, ones, ones);
    CHECK(same.ab == 0.0);

    const std::size_t n = 400000;
    const SyntheticBits s = synthetic_bits(n, 0.2, 0.15, 0.1, 54);
    const PairwiseErrors pe = pairwise_error_rates(s.a, s.b, s.e);
    // independent flips compose: eps_xy = ex(1-ey) + ey(1-ex)
    auto compose = [](double ex, double ey) { return ex * (1 - ey) + ey * (1 - ex); };
    CHECK(pe.ab == doctest::Approx(compose(0.2, 0.15)).epsilon(0.02));
    CHECK(pe.ae == doctest::Approx(compose(0.2, 0.1)).epsilon(0.02));
    CHECK(pe.be == doctest::Approx(compose(0.15, 0.1)).epsilon(0.02));

    CHECK_THROWS_AS(pairwise_error_rates(ones, ones, std::vector<int>{1}), std::domain_error);
}

TEST_CASE("advantage_distill: N = 1 accepts everything and changes nothing") {
    const std::size_t n = 100000;
    const SyntheticBits s = synthetic_bits(n, 0.2, 0.2, 0.1, 55);
    RngStream rng(56);
    const DistillResult d = advantage_distill(s.a, s.b, s.e, 1, rng);
    CHECK(d.blocks == n);
    CHECK(d.accepted == n);
    const PairwiseErrors pe = pairwise_error_rates(s.a, s.b, s.e);
    CHECK(d.eps_bob() == doctest::Approx(pe.ab).epsilon(1e-12));
    CHECK(d.eps_eve() == doctest::Approx(pe.ae).epsilon(1e-12));
}

TEST_CASE("advantage_distill: repetition closed forms") {
    // flat disagreement rate 0.2 between Alice and Bob
    const std::size_t n = 2000000;
    RngStream gen(57);
    std::vector<int> a(n), b(n), e(n);
    for (std::size_t i = 0; i < n; ++i) {
        a[i] = gen.coin();
        b[i] = gen.uniform() < 0.2 ? 1 - a[i] : a[i];
        e[i] = gen.coin();
    }
    RngStream rng(58);
    const DistillResult d = advantage_distill(a, b, e, 5, rng);

    const double eps_closed = repetition_error(0.2, 5);
    CHECK(eps_closed == doctest::Approx(9.7561e-4).epsilon(1e-4));
    const double acc_closed = repetition_accept_probability(0.2, 5);
    CHECK(acc_closed == doctest::Approx(std::pow(0.2, 5) + std::pow(0.8, 5)).epsilon(1e-12));

    const double se_eps = std::sqrt(eps_closed * (1 - eps_closed) /
                                    static_cast<double>(d.accepted));
    CHECK(std::fabs(d.eps_bob() - eps_closed) < 5.0 * se_eps);
    const double se_acc = std::sqrt(acc_closed * (1 - acc_closed) /
                                    static_cast<double>(d.blocks));
    CHECK(std::fabs(d.accept_rate() - acc_closed) < 5.0 * se_acc);
}

TEST_CASE("advantage_distill: crossover where Eve starts ahead") {
    // sigma_E < sigma_A = sigma_B: Eve's raw channel beats the users' pair
    const std::size_t n = 800000;
    const SyntheticBits s = synthetic_bits(n, 0.2, 0.2, 0.1, 59);
    const PairwiseErrors pe = pairwise_error_rates(s.a, s.b, s.e);
    REQUIRE(pe.ae < pe.ab);

    RngStream rng(60);
    bool crossed = false;
    for (std::size_t blk : {1u, 3u, 5u, 7u, 9u, 11u, 13u, 15u}) {
        const DistillResult d = advantage_distill(s.a, s.b, s.e, blk, rng);
        if (d.accepted > 100 && d.eps_bob() < d.eps_eve() &&
            ck_rate(d.eps_bob(), d.eps_eve()) > 0.0) {
            crossed = true;
            break;
        }
    }
    CHECK(crossed);
}

TEST_CASE("advantage_distill: a noiseless Eve decodes every accepted block") {
    const std::size_t n = 200000;
    const SyntheticBits s = synthetic_bits(n, 0.2, 0.2, 0.0, 61); // E == U
    RngStream rng(62);
    for (std::size_t blk : {3u, 7u}) {
        const DistillResult d = advantage_distill(s.a, s.b, s.e, blk, rng);
        // Eve's majority can still miss when Alice's own errors dominate a
        // block, but she always beats Bob: no distillable advantage remains
        CHECK(d.eps_eve() < d.eps_bob());
        CHECK(ck_rate(d.eps_bob(), d.eps_eve()) == 0.0);
    }
}

TEST_CASE("ck_rate: values") {
    CHECK(ck_rate(0.1, 0.1) == 0.0);
    CHECK(ck_rate(0.0, 0.5) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(ck_rate(0.5, 0.0) == 0.0); // clamped below at zero
    const double expected = binary_entropy(0.2) - binary_entropy(9.7561e-4);
    CHECK(expected == doctest::Approx(0.711).epsilon(1e-3));
    CHECK(ck_rate(9.7561e-4, 0.2) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("key_rate_pipeline: bound holds and the zero-Eve limit is dead") {
    Fig3Params p;
    p.n_samples = 300000;
    const std::vector<std::size_t> grid{1, 3, 5, 7, 9, 11, 13, 15};

    SUBCASE("default parameters distill through the crossover") {
        RngStream rng(63);
        const PipelineReport rep = key_rate_pipeline(p, grid, rng);
        CHECK(rep.raw.ae < rep.raw.ab);
        CHECK(rep.best_rate_per_sample > 0.0);
        CHECK(rep.rate_within_bound);
        CHECK(rep.cmi_gauss_bits > 0.0);
    }

    SUBCASE("R_E = 0 kills both the rate and the bound") {
        p.r_eve_ohms = 0.0;
        RngStream rng(64);
        const PipelineReport rep = key_rate_pipeline(p, grid, rng);
        CHECK(rep.best_rate_per_sample == 0.0);
        CHECK(rep.cmi_gauss_bits == 0.0);
        CHECK(rep.cmi_mc_bits <= 0.01);
    }
}

TEST_CASE("sweep_re: endpoint and monotone gaussian bound") {
    Fig3Params p;
    p.n_samples = 150000;
    const std::vector<std::size_t> grid{1, 5, 9, 13};
    const std::vector<double> re{0.0, 200.0, 430.0, 1000.0};
    RngStream rng(65);
    const auto rows = sweep_re(p, re, grid, rng);
    REQUIRE(rows.size() == re.size());
    CHECK(rows[0].rate_per_sample == 0.0);
    CHECK(rows[0].cmi_gauss_bits == 0.0);
    for (std::size_t i = 1; i < rows.size(); ++i)
        CHECK(rows[i].cmi_gauss_bits >= rows[i - 1].cmi_gauss_bits);
}

TEST_CASE("distill: input validation") {
    Fig3Params p;
    p.v0_volts = -1.0;
    CHECK_THROWS_AS(p.validate(), std::domain_error);
    RngStream rng(66);
    const std::vector<int> bits{0, 1};
    CHECK_THROWS_AS(advantage_distill(bits, bits, std::vector<int>{0}, 1, rng),
                    std::domain_error);
    CHECK_THROWS_AS(advantage_distill(bits, bits, bits, 0, rng), std::domain_error);
}
