#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "kljnlab/attacks.hpp"
#include "kljnlab/distill.hpp"
#include "kljnlab/infotheory.hpp"
#include "kljnlab/protocols.hpp"

namespace kljnlab {

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

std::string format_value(double v);

// schema: cycle,alice_choice,bob_choice,kept,alice_bit,bob_bit,msv_alice,msv_bob
void write_run_summary_csv(const std::filesystem::path& path, const KljnRunResult& result);
void write_run_summary_csv(const std::filesystem::path& path, const NoiselessRunResult& result);

struct AttackReportRow {
    std::size_t cycle = 0;
    std::string attack;
    double statistic = 0.0;
    int guess = kAbstain; // -1 encodes abstain
    int truth = -1;       // -1 when the cycle carries no key bit
    bool correct = false;
};

// schema: cycle,attack,statistic,guess,truth,correct
void write_attack_report_csv(const std::filesystem::path& path,
                             const std::vector<AttackReportRow>& rows);

struct InfoReportRow {
    std::string quantity;
    double estimate_bits = 0.0;
    double baseline_bits = 0.0;
    std::size_t n = 0;
    std::size_t bins = 0;
    bool pass = false;
};

// schema: quantity,estimate_bits,baseline_bits,n,bins,pass
void write_infotheory_csv(const std::filesystem::path& path,
                          const std::vector<InfoReportRow>& rows);

// schema: R_E,N,accept_rate,eps_B,eps_E,ck_rate_per_sample,cmi_bound_mc,cmi_bound_gauss
void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepRow>& rows);

// schema: sample,time_s,quantity,value ; one file per tap/end record
void write_trace_csv(const std::filesystem::path& path,
                     const std::vector<std::pair<std::string, const SampledTrace*>>& quantities);

void write_summary(const std::filesystem::path& path, const std::string& experiment,
                   const std::vector<CheckResult>& checks,
                   const std::vector<std::string>& metrics);

bool all_passed(const std::vector<CheckResult>& checks);

} // namespace kljnlab
