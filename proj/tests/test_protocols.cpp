#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "kljnlab/protocols.hpp"

using namespace kljnlab;

namespace {

LineConfig test_line() {
    LineConfig cfg;
    cfg.z0_ohms = 3000.0;
    cfg.delay_samples = 8;
    cfg.dt_seconds = 5e-6;
    cfg.tap_positions = {4};
    return cfg;
}

KljnParams small_kljn() {
    KljnParams p;
    p.cycles = 400;
    p.samples_per_cycle = 8192;
    p.settle_samples = 160;
    return p;
}

} // namespace

TEST_CASE("classify_msv: threshold logic") {
    const MsvThresholds th{1.0, 4.0};
    CHECK(classify_msv(0.5, th) == MsvClass::low);
    CHECK(classify_msv(2.0, th) == MsvClass::mid);
    CHECK(classify_msv(5.0, th) == MsvClass::high);
    CHECK(classify_msv(1.0, th) == MsvClass::mid); // boundary is inclusive
    // degenerate thresholds act as a binary classifier
    const MsvThresholds bin{2.0, 2.0};
    CHECK(classify_msv(1.9, bin) == MsvClass::low);
    CHECK(classify_msv(2.1, bin) == MsvClass::high);
    CHECK_THROWS_AS(classify_msv(0.0, MsvThresholds{3.0, 1.0}), std::domain_error);
}

TEST_CASE("classify_msv: misclassification on the lumped oracle is below 1%") {
    // white lumped-circuit windows of 1e4 samples, raw mean square (block 1)
    RngStream rng(31);
    const double t_kelvin = 300.0, dt = 5e-6;
    const double rl = 1000.0, rh = 9000.0;
    const double fn = nyquist_frequency(dt);
    auto level = [&](double ra, double rb) {
        return kljn_msv_level(parallel_resistance(ra, rb), t_kelvin, dt, 1);
    };
    const MsvThresholds th{std::sqrt(level(rl, rl) * level(rl, rh)),
                           std::sqrt(level(rl, rh) * level(rh, rh))};
    const std::size_t window = 10000;
    std::size_t errors = 0, trials = 0;
    for (int combo = 0; combo < 3; ++combo) {
        const double ra = combo == 2 ? rh : rl;
        const double rb = combo == 0 ? rl : rh;
        const MsvClass want = combo == 0 ? MsvClass::low
                              : combo == 2 ? MsvClass::high
                                           : MsvClass::mid;
        const double sa = johnson_sigma(ra, t_kelvin, dt);
        const double sb = johnson_sigma(rb, t_kelvin, dt);
        for (int trial = 0; trial < 120; ++trial) {
            double acc = 0.0;
            for (std::size_t i = 0; i < window; ++i) {
                const double v =
                    (rb * sa * rng.gaussian() + ra * sb * rng.gaussian()) / (ra + rb);
                acc += v * v;
            }
            ++trials;
            if (classify_msv(acc / window, th) != want) ++errors;
        }
    }
    CHECK(static_cast<double>(errors) / static_cast<double>(trials) < 0.01);
    (void)fn;
}

TEST_CASE("default thresholds sit between the analytic levels") {
    const LineConfig line = test_line();
    const KljnParams p = small_kljn();
    const MsvThresholds th = default_thresholds(p, line);
    const std::size_t block = p.effective_block(line);
    const double ll = kljn_msv_level(parallel_resistance(p.r_low_ohms, p.r_low_ohms),
                                     p.temperature_kelvin, line.dt_seconds, block);
    const double mid = kljn_msv_level(parallel_resistance(p.r_low_ohms, p.r_high_ohms),
                                      p.temperature_kelvin, line.dt_seconds, block);
    const double hh = kljn_msv_level(parallel_resistance(p.r_high_ohms, p.r_high_ohms),
                                     p.temperature_kelvin, line.dt_seconds, block);
    CHECK(ll < th.low);
    CHECK(th.low < mid);
    CHECK(mid < th.high);
    CHECK(th.high < hh);
    // geometric midpoints
    CHECK(th.low == doctest::Approx(std::sqrt(ll * mid)).epsilon(1e-12));
    CHECK(th.high == doctest::Approx(std::sqrt(mid * hh)).epsilon(1e-12));
}

TEST_CASE("kljn run: determinism, keep rule and key agreement") {
    const LineConfig line = test_line();
    const KljnParams p = small_kljn();
    RngStream rng1(77), rng2(77);
    const KljnRunResult r1 = run_kljn(p, line, rng1);
    const KljnRunResult r2 = run_kljn(p, line, rng2);

    REQUIRE(r1.cycles.size() == p.cycles);
    CHECK(r1.key_alice == r2.key_alice);
    CHECK(r1.key_bob == r2.key_bob);
    for (std::size_t c = 0; c < p.cycles; ++c) {
        CHECK(r1.cycles[c].alice == r2.cycles[c].alice);
        CHECK(r1.cycles[c].msv_alice == r2.cycles[c].msv_alice);
        const auto& cy = r1.cycles[c];
        CHECK(cy.kept == (cy.alice != cy.bob));
        if (cy.kept) {
            REQUIRE(cy.alice_bit.has_value());
            REQUIRE(cy.bob_bit.has_value());
            CHECK(*cy.alice_bit == *cy.bob_bit); // bits come from own switch settings
            CHECK(*cy.alice_bit == (cy.alice == KljnChoice::high ? 1 : 0));
        } else {
            CHECK(!cy.alice_bit.has_value());
        }
    }
    const double z =
        (static_cast<double>(r1.kept_count) - p.cycles / 2.0) / (std::sqrt(p.cycles) / 2.0);
    CHECK(std::fabs(z) < 5.0);
}

TEST_CASE("kljn run: own-end MSV levels order and agree across the kept pair") {
    const LineConfig line = test_line();
    KljnParams p = small_kljn();
    p.cycles = 600;
    RngStream rng(78);
    const KljnRunResult r = run_kljn(p, line, rng);

    double sum[3] = {0, 0, 0};
    std::size_t cnt[3] = {0, 0, 0};
    for (const auto& cy : r.cycles) {
        const int g = cy.kept ? 1 : (cy.alice == KljnChoice::low ? 0 : 2);
        sum[g] += cy.msv_alice + cy.msv_bob;
        cnt[g] += 2;
    }
    const double ll = sum[0] / cnt[0], mid = sum[1] / cnt[1], hh = sum[2] / cnt[2];
    CHECK(ll < mid);
    CHECK(mid < hh);

    // quasi-static regime: measured levels approach the lumped prediction
    const std::size_t block = p.effective_block(line);
    auto level = [&](double ra, double rb) {
        return kljn_msv_level(parallel_resistance(ra, rb), p.temperature_kelvin,
                              line.dt_seconds, block);
    };
    CHECK(std::fabs(ll / level(1000.0, 1000.0) - 1.0) < 0.10);
    CHECK(std::fabs(mid / level(1000.0, 9000.0) - 1.0) < 0.10);
    CHECK(std::fabs(hh / level(9000.0, 9000.0) - 1.0) < 0.10);

    // misclassification shows up as reported key desynchronization, not as
    // silently corrected bits
    CHECK(r.key_alice.size() + r.misclassified_alice >= r.kept_count);
}

TEST_CASE("kljn run: validation rejects broken parameter sets") {
    const LineConfig line = test_line();
    KljnParams p = small_kljn();
    p.r_low_ohms = 9000.0;
    p.r_high_ohms = 1000.0;
    CHECK_THROWS_AS(p.validate(line), std::domain_error);
    p = small_kljn();
    p.settle_samples = p.samples_per_cycle;
    CHECK_THROWS_AS(p.validate(line), std::domain_error);
    p = small_kljn();
    p.samples_per_cycle = 256; // smaller than the MSV block
    CHECK_THROWS_AS(p.validate(line), std::domain_error);
}

TEST_CASE("noiseless run: exact keep rule, voltages and keys") {
    const LineConfig line = test_line();
    NoiselessParams p;
    p.cycles = 300;
    p.samples_per_half = 1024;
    p.ground_samples = 32;
    RngStream rng(79);
    const NoiselessRunResult r = run_noiseless(p, line, rng);

    REQUIRE(r.cycles.size() == p.cycles);
    CHECK(r.key_alice == r.key_bob);
    for (const auto& cy : r.cycles) {
        CHECK(cy.kept == (cy.alice != cy.bob));
        if (cy.kept) {
            // every settled half averages exactly V0 at both ends
            CHECK(cy.mean_v_alice_h1 == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(cy.mean_v_alice_h2 == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(cy.mean_v_bob_h1 == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(cy.mean_v_bob_h2 == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(*cy.alice_bit == (cy.alice == NoiselessChoice::high_first ? 1 : 0));
        } else {
            // the half where both stayed open is identically dead
            const bool h1_dead = cy.mean_v_alice_h1 == 0.0 && cy.mean_v_bob_h1 == 0.0;
            const bool h2_dead = cy.mean_v_alice_h2 == 0.0 && cy.mean_v_bob_h2 == 0.0;
            CHECK((h1_dead || h2_dead));
        }
    }

    RngStream rng2(79);
    const NoiselessRunResult r2 = run_noiseless(p, line, rng2);
    CHECK(r.key_alice == r2.key_alice);
}

TEST_CASE("noiseless run: wavefront timing at the tap identifies the firing side") {
    const LineConfig line = test_line(); // D = 8, tap at 4
    NoiselessParams p;
    p.cycles = 40;
    p.samples_per_half = 256;
    p.ground_samples = 16;
    RngStream rng(80);
    std::vector<std::pair<std::ptrdiff_t, std::ptrdiff_t>> first_hits; // (v_plus, v_minus)
    const CycleSink sink = [&](const CycleTraces& traces) {
        const TapRecord& tap = (*traces.taps)[0];
        std::ptrdiff_t hp = -1, hm = -1;
        for (std::size_t i = 0; i < p.samples_per_half; ++i) {
            if (hp < 0 && tap.v_plus.samples[i] != 0.0) hp = static_cast<std::ptrdiff_t>(i);
            if (hm < 0 && tap.v_minus.samples[i] != 0.0) hm = static_cast<std::ptrdiff_t>(i);
        }
        first_hits.emplace_back(hp, hm);
    };
    const NoiselessRunResult r = run_noiseless(p, line, rng, sink);
    for (std::size_t c = 0; c < r.cycles.size(); ++c) {
        const auto& cy = r.cycles[c];
        const auto [hp, hm] = first_hits[c];
        const std::ptrdiff_t g = static_cast<std::ptrdiff_t>(p.ground_samples);
        const bool alice_on_h1 = cy.alice == NoiselessChoice::high_first;
        const bool bob_on_h1 = cy.bob == NoiselessChoice::high_first;
        if (alice_on_h1)
            CHECK(hp == g + 4); // direct wave from Alice crosses tap 4
        if (bob_on_h1)
            CHECK(hm == g + 4); // direct wave from Bob, D - tap = 4
        if (!alice_on_h1 && !bob_on_h1) {
            CHECK(hp == -1); // nothing moves in a dead half
            CHECK(hm == -1);
        }
        if (alice_on_h1 && !bob_on_h1)
            CHECK(hm == g + 12); // Alice's echo off Bob's open end: 2D - tap
        if (bob_on_h1 && !alice_on_h1)
            CHECK(hp == g + 12); // Bob's echo off Alice's open end: D + tap
    }
}

TEST_CASE("noiseless params validation") {
    const LineConfig line = test_line();
    NoiselessParams p;
    p.v0_volts = 0.0;
    CHECK_THROWS_AS(p.validate(line), std::domain_error);
    p = NoiselessParams{};
    p.ground_samples = p.samples_per_half;
    CHECK_THROWS_AS(p.validate(line), std::domain_error);
    p = NoiselessParams{};
    p.samples_per_half = 16; // must exceed the 4D ring period
    CHECK_THROWS_AS(p.validate(line), std::domain_error);
}
