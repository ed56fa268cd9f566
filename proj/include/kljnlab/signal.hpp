#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "kljnlab/rng.hpp"

namespace kljnlab {

namespace constants {
// CODATA Boltzmann constant, J/K
inline constexpr double boltzmann = 1.380649e-23;
} // namespace constants

// Uniformly sampled time series. The unit of the samples (volts, amperes) is
// tracked by the caller.
struct SampledTrace {
    double dt = 1.0; // seconds per sample
    std::vector<double> samples;

    std::size_t size() const noexcept { return samples.size(); }
    double operator[](std::size_t i) const { return samples[i]; }

    // throws std::domain_error on non-positive dt or non-finite samples
    void validate() const;
};

// Nyquist frequency of a sampling interval, Hz.
double nyquist_frequency(double dt_seconds);

// Per-sample standard deviation of the discrete-time Thevenin noise source of
// a resistor R at temperature T: sigma = sqrt(4 kB T R f_N), f_N = 1/(2 dt).
double johnson_sigma(double r_ohms, double t_kelvin, double dt_seconds);

// Arithmetic mean of squared samples over [begin, end).
double mean_square(std::span<const double> samples);
double mean_square(const SampledTrace& trace, std::size_t begin, std::size_t end);

// (1/n) sum a(t) * b(t + lag) over the overlapping region; lag may be negative.
double cross_correlation(std::span<const double> a, std::span<const double> b, std::ptrdiff_t lag);
double cross_correlation(const SampledTrace& a, const SampledTrace& b, std::ptrdiff_t lag);

// Mean of the squared moving average over all block positions: a band-limited
// mean-square with bandwidth ~ f_N / block. For white input of per-sample
// variance s2 the expected value is s2 / block.
double band_mean_square(std::span<const double> samples, std::size_t block);

// White Gaussian trace with per-sample standard deviation sigma.
SampledTrace gaussian_trace(double sigma, double dt, std::size_t n, RngStream& rng);

} // namespace kljnlab
