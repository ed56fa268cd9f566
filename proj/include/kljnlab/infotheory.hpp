#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "kljnlab/rng.hpp"

namespace kljnlab {

// Aligned samples of named real- or symbol-valued variables.
class JointSamples {
public:
    struct Column {
        std::string name;
        bool discrete = false;
        std::vector<double> real;
        std::vector<std::int64_t> symbols;

        std::size_t size() const { return discrete ? symbols.size() : real.size(); }
    };

    void add_real(std::string name, std::vector<double> values);
    void add_discrete(std::string name, std::vector<std::int64_t> values);

    std::size_t size() const noexcept { return n_; }
    bool has(const std::string& name) const;
    const Column& column(const std::string& name) const;
    const std::vector<Column>& columns() const noexcept { return cols_; }

private:
    void check_length(std::size_t len, const std::string& name);
    std::vector<Column> cols_;
    std::size_t n_ = 0;
};

struct BinningSpec {
    std::size_t default_bins = 16; // for continuous columns; >= 2
    std::map<std::string, std::size_t> per_column;

    std::size_t bins_for(const std::string& name) const;
};

// Plug-in Shannon entropy of the empirical joint distribution of the named
// discrete columns, in bits.
double entropy(const JointSamples& samples, const std::vector<std::string>& cols);

// H(target | given) = H(target, given) - H(given), discrete columns.
double conditional_entropy(const JointSamples& samples, const std::vector<std::string>& target,
                           const std::vector<std::string>& given);

struct CmiResult {
    double estimate_bits = 0.0;
    double baseline_bits = 0.0; // same estimator after shuffling Y within Z-cells
    double stderr_bits = 0.0;   // delta-method standard error of the estimate
    double coverage = 1.0;      // fraction of samples in Z-cells with >= 2 members
    std::size_t small_z_cells = 0;
    std::size_t n = 0;
    std::size_t z_cells = 0;
};

// I(X:Y|Z) on binned data; continuous columns are discretized with equal
// width bins over their sample range, discrete columns pass through.
CmiResult cmi(const JointSamples& samples, const std::vector<std::string>& x_cols,
              const std::vector<std::string>& y_cols, const std::vector<std::string>& z_cols,
              const BinningSpec& binning, RngStream& rng);

struct GaussianModel {
    std::vector<std::string> names;
    std::vector<double> mean;       // size n
    std::vector<double> covariance; // row-major n x n, symmetric PSD

    std::size_t index(const std::string& name) const;
};

// Closed-form conditional mutual information of a jointly Gaussian model:
//   I(A;B|E) = 1/2 log2( det S_AE det S_BE / (det S_E det S_ABE) ).
// Deterministic dependence (singular joint block with regular marginals)
// reports +infinity instead of throwing.
double gaussian_cmi(const GaussianModel& model, const std::vector<std::string>& a,
                    const std::vector<std::string>& b, const std::vector<std::string>& e);

struct MarkovReport {
    double h_x_given_za = 0.0;
    double h_x_given_z = 0.0;
    double h_x_given_zy = 0.0;
    double cmi_bits = 0.0;
    double cmi_baseline_bits = 0.0;
    double tolerance = 0.01;
    bool pass = false;
};

// Estimates the three conditional entropies H(X|Z_A), H(X|Z), H(X|Z,Y) and
// I(X:Y|Z); PASS iff the pairwise differences and the CMI sit within the
// shuffle baseline plus the tolerance.
MarkovReport markov_test(const JointSamples& samples, const std::vector<std::string>& x_cols,
                         const std::vector<std::string>& y_cols,
                         const std::vector<std::string>& za_cols,
                         const std::vector<std::string>& zb_cols, const BinningSpec& binning,
                         double tolerance, RngStream& rng);

} // namespace kljnlab
