#include "kljnlab/signal.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace kljnlab {

void SampledTrace::validate() const {
    if (!(dt > 0.0)) throw std::domain_error("SampledTrace: dt must be positive");
    for (double v : samples) {
        if (!std::isfinite(v)) throw std::domain_error("SampledTrace: non-finite sample");
    }
}

double nyquist_frequency(double dt_seconds) {
    if (!(dt_seconds > 0.0)) throw std::domain_error("nyquist_frequency: dt must be positive");
    return 1.0 / (2.0 * dt_seconds);
}

double johnson_sigma(double r_ohms, double t_kelvin, double dt_seconds) {
    if (r_ohms < 0.0) throw std::domain_error("johnson_sigma: negative resistance");
    if (t_kelvin < 0.0) throw std::domain_error("johnson_sigma: negative temperature");
    const double fn = nyquist_frequency(dt_seconds);
    return std::sqrt(4.0 * constants::boltzmann * t_kelvin * r_ohms * fn);
}

double mean_square(std::span<const double> samples) {
    if (samples.empty()) throw std::domain_error("mean_square: empty window");
    double acc = 0.0;
    for (double v : samples) acc += v * v;
    return acc / static_cast<double>(samples.size());
}

double mean_square(const SampledTrace& trace, std::size_t begin, std::size_t end) {
    if (begin >= end || end > trace.samples.size())
        throw std::domain_error("mean_square: window out of bounds or empty");
    return mean_square(std::span<const double>(trace.samples).subspan(begin, end - begin));
}

double cross_correlation(std::span<const double> a, std::span<const double> b, std::ptrdiff_t lag) {
    // overlap: t in [max(0,-lag), min(|a|, |b|-lag))
    const std::ptrdiff_t na = static_cast<std::ptrdiff_t>(a.size());
    const std::ptrdiff_t nb = static_cast<std::ptrdiff_t>(b.size());
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, -lag);
    const std::ptrdiff_t hi = std::min(na, nb - lag);
    if (hi <= lo) throw std::domain_error("cross_correlation: empty overlap");
    double acc = 0.0;
    for (std::ptrdiff_t t = lo; t < hi; ++t) acc += a[t] * b[t + lag];
    return acc / static_cast<double>(hi - lo);
}

double cross_correlation(const SampledTrace& a, const SampledTrace& b, std::ptrdiff_t lag) {
    if (a.dt != b.dt) throw std::domain_error("cross_correlation: mismatched dt");
    return cross_correlation(std::span<const double>(a.samples),
                             std::span<const double>(b.samples), lag);
}

double band_mean_square(std::span<const double> samples, std::size_t block) {
    if (block == 0 || samples.size() < block)
        throw std::domain_error("band_mean_square: window shorter than block");
    // long-double prefix sums keep the sliding window numerically exact
    const std::size_t n = samples.size();
    long double run = 0.0L;
    std::vector<long double> prefix(n + 1, 0.0L);
    for (std::size_t i = 0; i < n; ++i) {
        run += samples[i];
        prefix[i + 1] = run;
    }
    const double inv = 1.0 / static_cast<double>(block);
    double acc = 0.0;
    const std::size_t m = n - block + 1;
    for (std::size_t t = 0; t < m; ++t) {
        const double mu = static_cast<double>(prefix[t + block] - prefix[t]) * inv;
        acc += mu * mu;
    }
    return acc / static_cast<double>(m);
}

SampledTrace gaussian_trace(double sigma, double dt, std::size_t n, RngStream& rng) {
    if (sigma < 0.0) throw std::domain_error("gaussian_trace: negative sigma");
    SampledTrace t;
    t.dt = dt;
    t.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) t.samples[i] = sigma * rng.gaussian();
    return t;
}

} // namespace kljnlab
