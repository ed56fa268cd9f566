#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "kljnlab/signal.hpp"

using namespace kljnlab;

TEST_CASE("johnson_sigma: reference value and scaling") {
    // sqrt(4 kB 300 K * 1 kOhm * 1e5 Hz) evaluated independently
    const double expected = std::sqrt(4.0 * 1.380649e-23 * 300.0 * 1000.0 * 1e5);
    CHECK(johnson_sigma(1000.0, 300.0, 5e-6) == doctest::Approx(expected).epsilon(1e-14));
    CHECK(johnson_sigma(1000.0, 300.0, 5e-6) == doctest::Approx(1.2871592e-6).epsilon(1e-6));

    CHECK(johnson_sigma(0.0, 300.0, 5e-6) == 0.0);
    CHECK(johnson_sigma(4.0 * 1000.0, 300.0, 5e-6) ==
          doctest::Approx(2.0 * johnson_sigma(1000.0, 300.0, 5e-6)).epsilon(1e-14));
}

TEST_CASE("johnson_sigma: variance is linear in R, T and f_N") {
    for (double r : {100.0, 1000.0, 9000.0}) {
        for (double t : {77.0, 300.0, 600.0}) {
            for (double dt : {1e-6, 5e-6, 2e-5}) {
                const double s2 = std::pow(johnson_sigma(r, t, dt), 2);
                const double s2_2r = std::pow(johnson_sigma(2.0 * r, t, dt), 2);
                const double s2_2t = std::pow(johnson_sigma(r, 2.0 * t, dt), 2);
                const double s2_halfdt = std::pow(johnson_sigma(r, t, dt / 2.0), 2);
                CHECK(s2_2r == doctest::Approx(2.0 * s2).epsilon(1e-12));
                CHECK(s2_2t == doctest::Approx(2.0 * s2).epsilon(1e-12));
                CHECK(s2_halfdt == doctest::Approx(2.0 * s2).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("johnson_sigma: domain errors") {
    CHECK_THROWS_AS(johnson_sigma(-1.0, 300.0, 1e-6), std::domain_error);
    CHECK_THROWS_AS(johnson_sigma(1.0, -1.0, 1e-6), std::domain_error);
    CHECK_THROWS_AS(johnson_sigma(1.0, 300.0, 0.0), std::domain_error);
}

TEST_CASE("mean_square: basics") {
    SampledTrace zero{1.0, std::vector<double>(100, 0.0)};
    CHECK(mean_square(zero, 0, 100) == 0.0);

    SampledTrace flat{1.0, std::vector<double>(50, 3.0)};
    CHECK(mean_square(flat, 0, 50) == doctest::Approx(9.0).epsilon(1e-15));

    CHECK_THROWS_AS(mean_square(flat, 10, 10), std::domain_error);
    CHECK_THROWS_AS(mean_square(flat, 0, 51), std::domain_error);
}

TEST_CASE("mean_square: white gaussian concentration") {
    RngStream rng(11);
    const std::size_t n = 40000;
    const double sigma = 2.5;
    const SampledTrace t = gaussian_trace(sigma, 1.0, n, rng);
    const double ms = mean_square(t, 0, n);
    const double s2 = sigma * sigma;
    CHECK(std::fabs(ms - s2) < 4.0 * s2 * std::sqrt(2.0 / static_cast<double>(n)));
}

TEST_CASE("cross_correlation: delayed copy recovers mean square") {
    RngStream rng(12);
    const std::size_t n = 20000;
    const std::ptrdiff_t lag = 37;
    const SampledTrace a = gaussian_trace(1.0, 1.0, n, rng);
    SampledTrace b{1.0, std::vector<double>(n, 0.0)};
    const double gamma = -0.6;
    for (std::size_t i = lag; i < n; ++i) b.samples[i] = gamma * a.samples[i - lag];

    const double c = cross_correlation(a, b, lag);
    // exact: the overlap sum telescopes to gamma * sum a^2 over the overlap
    double ms = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) ms += a.samples[i] * a.samples[i];
    ms /= static_cast<double>(n - lag);
    CHECK(c == doctest::Approx(gamma * ms).epsilon(1e-12));
}

TEST_CASE("cross_correlation: independent noise decorrelates") {
    RngStream rng(13);
    const std::size_t n = 100000;
    const SampledTrace a = gaussian_trace(1.0, 1.0, n, rng);
    const SampledTrace b = gaussian_trace(1.0, 1.0, n, rng);
    CHECK(std::fabs(cross_correlation(a, b, 0)) < 4.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("cross_correlation: zero lag on itself equals mean_square") {
    RngStream rng(14);
    const SampledTrace a = gaussian_trace(1.0, 1.0, 5000, rng);
    CHECK(cross_correlation(a, a, 0) == mean_square(a, 0, a.size()));
}

TEST_CASE("cross_correlation: mismatched dt rejected") {
    SampledTrace a{1.0, {1.0, 2.0}};
    SampledTrace b{2.0, {1.0, 2.0}};
    CHECK_THROWS_AS(cross_correlation(a, b, 0), std::domain_error);
    SampledTrace c{1.0, {1.0, 2.0}};
    CHECK_THROWS_AS(cross_correlation(a, c, 5), std::domain_error); // empty overlap
}

TEST_CASE("band_mean_square: white noise scales as 1/block") {
    RngStream rng(15);
    const std::size_t n = 400000;
    const double sigma = 1.0;
    const SampledTrace t = gaussian_trace(sigma, 1.0, n, rng);
    for (std::size_t block : {16u, 64u}) {
        const double b = band_mean_square(t.samples, block);
        const double expected = sigma * sigma / static_cast<double>(block);
        CHECK(std::fabs(b / expected - 1.0) < 5.0 * std::sqrt(2.0 * block / static_cast<double>(n)));
    }
}

TEST_CASE("trace validation") {
    SampledTrace bad{0.0, {1.0}};
    CHECK_THROWS_AS(bad.validate(), std::domain_error);
    SampledTrace nan_trace{1.0, {std::nan("")}};
    CHECK_THROWS_AS(nan_trace.validate(), std::domain_error);
    SampledTrace ok{1e-6, {0.0, 1.0}};
    CHECK_NOTHROW(ok.validate());
}
