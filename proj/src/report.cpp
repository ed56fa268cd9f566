#include "kljnlab/report.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace kljnlab {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    return out;
}

const char* kljn_choice_name(KljnChoice c) { return c == KljnChoice::high ? "H" : "L"; }
const char* noiseless_choice_name(NoiselessChoice c) {
    return c == NoiselessChoice::high_first ? "HF" : "LF";
}

std::string bit_field(const std::optional<int>& bit) {
    return bit ? std::to_string(*bit) : std::string();
}

} // namespace

std::string format_value(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

void write_run_summary_csv(const std::filesystem::path& path, const KljnRunResult& result) {
    auto out = open_out(path);
    out << "cycle,alice_choice,bob_choice,kept,alice_bit,bob_bit,msv_alice,msv_bob\n";
    for (std::size_t c = 0; c < result.cycles.size(); ++c) {
        const KljnCycle& cy = result.cycles[c];
        out << c << ',' << kljn_choice_name(cy.alice) << ',' << kljn_choice_name(cy.bob) << ','
            << (cy.kept ? 1 : 0) << ',' << bit_field(cy.alice_bit) << ',' << bit_field(cy.bob_bit)
            << ',' << format_value(cy.msv_alice) << ',' << format_value(cy.msv_bob) << '\n';
    }
}

void write_run_summary_csv(const std::filesystem::path& path, const NoiselessRunResult& result) {
    auto out = open_out(path);
    out << "cycle,alice_choice,bob_choice,kept,alice_bit,bob_bit,msv_alice,msv_bob\n";
    for (std::size_t c = 0; c < result.cycles.size(); ++c) {
        const NoiselessCycle& cy = result.cycles[c];
        // per-party MSV of the cycle: mean of the two half means squared is
        // not meaningful here; report the mean voltage magnitudes instead
        const double msva = 0.5 * (cy.mean_v_alice_h1 * cy.mean_v_alice_h1 +
                                   cy.mean_v_alice_h2 * cy.mean_v_alice_h2);
        const double msvb =
            0.5 * (cy.mean_v_bob_h1 * cy.mean_v_bob_h1 + cy.mean_v_bob_h2 * cy.mean_v_bob_h2);
        out << c << ',' << noiseless_choice_name(cy.alice) << ',' << noiseless_choice_name(cy.bob)
            << ',' << (cy.kept ? 1 : 0) << ',' << bit_field(cy.alice_bit) << ','
            << bit_field(cy.bob_bit) << ',' << format_value(msva) << ',' << format_value(msvb)
            << '\n';
    }
}

void write_attack_report_csv(const std::filesystem::path& path,
                             const std::vector<AttackReportRow>& rows) {
    auto out = open_out(path);
    out << "cycle,attack,statistic,guess,truth,correct\n";
    for (const auto& r : rows) {
        out << r.cycle << ',' << r.attack << ',' << format_value(r.statistic) << ','
            << (r.guess == kAbstain ? std::string("abstain") : std::to_string(r.guess)) << ','
            << (r.truth < 0 ? std::string() : std::to_string(r.truth)) << ','
            << (r.correct ? 1 : 0) << '\n';
    }
}

void write_infotheory_csv(const std::filesystem::path& path,
                          const std::vector<InfoReportRow>& rows) {
    auto out = open_out(path);
    out << "quantity,estimate_bits,baseline_bits,n,bins,pass\n";
    for (const auto& r : rows) {
        out << r.quantity << ',' << format_value(r.estimate_bits) << ','
            << format_value(r.baseline_bits) << ',' << r.n << ',' << r.bins << ','
            << (r.pass ? 1 : 0) << '\n';
    }
}

void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepRow>& rows) {
    auto out = open_out(path);
    out << "R_E,N,accept_rate,eps_B,eps_E,ck_rate_per_sample,cmi_bound_mc,cmi_bound_gauss\n";
    for (const auto& r : rows) {
        out << format_value(r.r_eve_ohms) << ',' << r.best_block << ','
            << format_value(r.accept_rate) << ',' << format_value(r.eps_bob) << ','
            << format_value(r.eps_eve) << ',' << format_value(r.rate_per_sample) << ','
            << format_value(r.cmi_mc_bits) << ',' << format_value(r.cmi_gauss_bits) << '\n';
    }
}

void write_trace_csv(const std::filesystem::path& path,
                     const std::vector<std::pair<std::string, const SampledTrace*>>& quantities) {
    auto out = open_out(path);
    out << "sample,time_s,quantity,value\n";
    for (const auto& [name, trace] : quantities) {
        trace->validate();
        for (std::size_t i = 0; i < trace->size(); ++i) {
            out << i << ',' << format_value(static_cast<double>(i) * trace->dt) << ',' << name
                << ',' << format_value(trace->samples[i]) << '\n';
        }
    }
}

void write_summary(const std::filesystem::path& path, const std::string& experiment,
                   const std::vector<CheckResult>& checks,
                   const std::vector<std::string>& metrics) {
    auto out = open_out(path);
    out << "experiment: " << experiment << "\n\n";
    for (const auto& c : checks) {
        out << (c.pass ? "PASS " : "FAIL ") << c.name;
        if (!c.detail.empty()) out << "  (" << c.detail << ")";
        out << '\n';
    }
    if (!metrics.empty()) {
        out << '\n';
        for (const auto& m : metrics) out << m << '\n';
    }
    out << '\n' << (all_passed(checks) ? "ALL CHECKS PASSED" : "CHECKS FAILED") << '\n';
}

bool all_passed(const std::vector<CheckResult>& checks) {
    for (const auto& c : checks)
        if (!c.pass) return false;
    return true;
}

} // namespace kljnlab
