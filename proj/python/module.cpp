#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <optional>

#include "kljnlab/attacks.hpp"
#include "kljnlab/distill.hpp"
#include "kljnlab/experiments.hpp"
#include "kljnlab/infotheory.hpp"
#include "kljnlab/protocols.hpp"
#include "kljnlab/txline.hpp"

namespace py = pybind11;
using namespace kljnlab;

namespace {

LineConfig make_line(double z0, std::size_t delay, double dt, std::vector<std::size_t> taps) {
    LineConfig line;
    line.z0_ohms = z0;
    line.delay_samples = delay;
    line.dt_seconds = dt;
    line.tap_positions = std::move(taps);
    line.validate();
    return line;
}

py::dict kljn_summary(const KljnRunResult& r) {
    py::dict d;
    d["cycles"] = r.cycles.size();
    d["kept"] = r.kept_count;
    d["key_alice"] = r.key_alice;
    d["key_bob"] = r.key_bob;
    d["misclassified_alice"] = r.misclassified_alice;
    d["misclassified_bob"] = r.misclassified_bob;
    std::vector<double> msv_alice, msv_bob;
    std::vector<int> kept;
    for (const auto& c : r.cycles) {
        msv_alice.push_back(c.msv_alice);
        msv_bob.push_back(c.msv_bob);
        kept.push_back(c.kept ? 1 : 0);
    }
    d["msv_alice"] = msv_alice;
    d["msv_bob"] = msv_bob;
    d["kept_flags"] = kept;
    return d;
}

py::dict noiseless_summary(const NoiselessRunResult& r) {
    py::dict d;
    d["cycles"] = r.cycles.size();
    d["kept"] = r.kept_count;
    d["key_alice"] = r.key_alice;
    d["key_bob"] = r.key_bob;
    return d;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Noise-based key distribution laboratory: delay-line simulator, "
              "eavesdropping attacks, information-theoretic estimators, and "
              "advantage distillation.";

    m.def("johnson_sigma", &johnson_sigma, py::arg("r_ohms"), py::arg("t_kelvin"),
          py::arg("dt_seconds"),
          "Per-sample standard deviation of a resistor's Thevenin noise source.");

    m.def(
        "reflection_coefficient",
        [](std::optional<double> r, double z0) { return reflection_coefficient(r, z0); },
        py::arg("r_ohms"), py::arg("z0_ohms"), "Gamma = (R - Z0)/(R + Z0); None means open.");

    m.def("wave_decompose", &wave_decompose, py::arg("voltage"), py::arg("current"),
          py::arg("z0_ohms"));
    m.def("shunt_scatter", &shunt_scatter, py::arg("incident_left"), py::arg("incident_right"),
          py::arg("r_shunt_ohms"), py::arg("z0_ohms"));

    m.def(
        "classify_msv",
        [](double msv, double lo, double hi) {
            switch (classify_msv(msv, MsvThresholds{lo, hi})) {
                case MsvClass::low: return "low";
                case MsvClass::high: return "high";
                default: return "mid";
            }
        },
        py::arg("msv"), py::arg("theta_low"), py::arg("theta_high"));

    m.def(
        "run_kljn",
        [](std::uint64_t seed, std::size_t cycles, std::size_t samples_per_cycle, double r_low,
           double r_high, double t_kelvin, double z0, std::size_t delay, double dt) {
            KljnParams p;
            p.cycles = cycles;
            p.samples_per_cycle = samples_per_cycle;
            p.r_low_ohms = r_low;
            p.r_high_ohms = r_high;
            p.temperature_kelvin = t_kelvin;
            LineConfig line = make_line(z0, delay, dt, {delay / 2});
            RngStream rng(seed);
            return kljn_summary(run_kljn(p, line, rng));
        },
        py::arg("seed") = 1, py::arg("cycles") = 64, py::arg("samples_per_cycle") = 4096,
        py::arg("r_low_ohms") = 1000.0, py::arg("r_high_ohms") = 9000.0,
        py::arg("t_kelvin") = 300.0, py::arg("z0_ohms") = 3000.0, py::arg("delay_samples") = 8,
        py::arg("dt_seconds") = 5e-6);

    m.def(
        "run_noiseless",
        [](std::uint64_t seed, std::size_t cycles, std::size_t samples_per_half,
           std::size_t ground_samples, double v0, double z0, std::size_t delay, double dt) {
            NoiselessParams p;
            p.cycles = cycles;
            p.samples_per_half = samples_per_half;
            p.ground_samples = ground_samples;
            p.v0_volts = v0;
            LineConfig line = make_line(z0, delay, dt, {delay / 2});
            RngStream rng(seed);
            return noiseless_summary(run_noiseless(p, line, rng));
        },
        py::arg("seed") = 1, py::arg("cycles") = 64, py::arg("samples_per_half") = 1024,
        py::arg("ground_samples") = 32, py::arg("v0_volts") = 1.0, py::arg("z0_ohms") = 3000.0,
        py::arg("delay_samples") = 8, py::arg("dt_seconds") = 5e-6);

    m.def("binary_entropy", &binary_entropy, py::arg("p"));
    m.def("normal_upper_tail", &normal_upper_tail, py::arg("x"));
    m.def("ck_rate", &ck_rate, py::arg("eps_bob"), py::arg("eps_eve"));
    m.def("repetition_error", &repetition_error, py::arg("eps"), py::arg("block_length"));

    m.def(
        "gaussian_cmi_surrogate",
        [](double sigma_u, double sigma_a, double sigma_b, double sigma_e) {
            return gaussian_cmi(fig3_gaussian_surrogate(sigma_u, sigma_a, sigma_b, sigma_e),
                                {"A"}, {"B"}, {"E"});
        },
        py::arg("sigma_u"), py::arg("sigma_a"), py::arg("sigma_b"), py::arg("sigma_e"),
        "Closed-form I(A;B|E) of the three-observer Gaussian surrogate.");

    m.def(
        "binned_cmi",
        [](std::vector<double> a, std::vector<double> b, std::vector<double> e,
           std::size_t bins, std::uint64_t seed) {
            JointSamples s;
            s.add_real("A", std::move(a));
            s.add_real("B", std::move(b));
            s.add_real("E", std::move(e));
            BinningSpec binning;
            binning.default_bins = bins;
            RngStream rng(seed);
            const CmiResult r = cmi(s, {"A"}, {"B"}, {"E"}, binning, rng);
            py::dict d;
            d["estimate_bits"] = r.estimate_bits;
            d["baseline_bits"] = r.baseline_bits;
            d["stderr_bits"] = r.stderr_bits;
            d["coverage"] = r.coverage;
            return d;
        },
        py::arg("a"), py::arg("b"), py::arg("e"), py::arg("bins") = 16, py::arg("seed") = 1);

    m.def(
        "advantage_distill",
        [](std::vector<int> a, std::vector<int> b, std::vector<int> e, std::size_t block_length,
           std::uint64_t seed) {
            RngStream rng(seed);
            const DistillResult r = advantage_distill(a, b, e, block_length, rng);
            py::dict d;
            d["blocks"] = r.blocks;
            d["accepted"] = r.accepted;
            d["accept_rate"] = r.accept_rate();
            d["eps_bob"] = r.eps_bob();
            d["eps_eve"] = r.eps_eve();
            return d;
        },
        py::arg("bits_a"), py::arg("bits_b"), py::arg("bits_e"), py::arg("block_length"),
        py::arg("seed") = 1);

    m.def(
        "key_rate_pipeline",
        [](double v0, double r_alice, double r_bob, double r_eve, double t_kelvin, double dt,
           std::size_t n_samples, std::vector<std::size_t> block_grid, std::uint64_t seed) {
            Fig3Params p;
            p.v0_volts = v0;
            p.r_alice_ohms = r_alice;
            p.r_bob_ohms = r_bob;
            p.r_eve_ohms = r_eve;
            p.temperature_kelvin = t_kelvin;
            p.dt_seconds = dt;
            p.n_samples = n_samples;
            RngStream rng(seed);
            const PipelineReport r = key_rate_pipeline(p, block_grid, rng);
            py::dict d;
            d["eps_ab"] = r.raw.ab;
            d["eps_ae"] = r.raw.ae;
            d["cmi_mc_bits"] = r.cmi_mc_bits;
            d["cmi_gauss_bits"] = r.cmi_gauss_bits;
            d["best_block"] = r.best_block;
            d["best_rate_per_sample"] = r.best_rate_per_sample;
            py::list rows;
            for (const auto& row : r.rows) {
                py::dict rd;
                rd["N"] = row.block_length;
                rd["accept_rate"] = row.accept_rate;
                rd["eps_bob"] = row.eps_bob;
                rd["eps_eve"] = row.eps_eve;
                rd["rate_per_sample"] = row.rate_per_sample;
                rows.append(rd);
            }
            d["rows"] = rows;
            return d;
        },
        py::arg("v0_volts") = 2.2e-6, py::arg("r_alice_ohms") = 1000.0,
        py::arg("r_bob_ohms") = 1000.0, py::arg("r_eve_ohms") = 430.0,
        py::arg("t_kelvin") = 300.0, py::arg("dt_seconds") = 5e-6,
        py::arg("n_samples") = 200000,
        py::arg("block_grid") = std::vector<std::size_t>{1, 3, 5, 7, 9, 11, 13, 15},
        py::arg("seed") = 1);

    m.def(
        "run_experiment",
        [](const std::string& name, std::uint64_t seed, const std::string& out_dir) {
            ExperimentConfig cfg = ExperimentConfig::defaults();
            cfg.experiment = name;
            cfg.seed = seed;
            cfg.out_dir = out_dir;
            const ExperimentOutput out = run_experiment(cfg);
            py::list checks;
            for (const auto& c : out.checks) {
                py::dict cd;
                cd["name"] = c.name;
                cd["pass"] = c.pass;
                cd["detail"] = c.detail;
                checks.append(cd);
            }
            return checks;
        },
        py::arg("experiment"), py::arg("seed") = 1, py::arg("out_dir") = "",
        "Run a named experiment with default parameters; returns its checks.");

    m.attr("BOLTZMANN") = constants::boltzmann;
#ifdef VERSION_INFO
    m.attr("__version__") = VERSION_INFO;
#else
    m.attr("__version__") = "0.1.0";
#endif
}
