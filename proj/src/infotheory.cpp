#include "kljnlab/infotheory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

namespace kljnlab {

void JointSamples::check_length(std::size_t len, const std::string& name) {
    if (has(name)) throw std::domain_error("JointSamples: duplicate column " + name);
    if (cols_.empty())
        n_ = len;
    else if (len != n_)
        throw std::domain_error("JointSamples: column length mismatch for " + name);
}

void JointSamples::add_real(std::string name, std::vector<double> values) {
    check_length(values.size(), name);
    Column c;
    c.name = std::move(name);
    c.discrete = false;
    c.real = std::move(values);
    cols_.push_back(std::move(c));
}

void JointSamples::add_discrete(std::string name, std::vector<std::int64_t> values) {
    check_length(values.size(), name);
    Column c;
    c.name = std::move(name);
    c.discrete = true;
    c.symbols = std::move(values);
    cols_.push_back(std::move(c));
}

bool JointSamples::has(const std::string& name) const {
    for (const auto& c : cols_)
        if (c.name == name) return true;
    return false;
}

const JointSamples::Column& JointSamples::column(const std::string& name) const {
    for (const auto& c : cols_)
        if (c.name == name) return c;
    throw std::domain_error("JointSamples: no column named " + name);
}

std::size_t BinningSpec::bins_for(const std::string& name) const {
    auto it = per_column.find(name);
    const std::size_t b = it != per_column.end() ? it->second : default_bins;
    if (b < 2) throw std::domain_error("BinningSpec: need at least 2 bins for " + name);
    return b;
}

namespace {

struct Encoded {
    std::vector<std::uint32_t> codes;
    std::uint64_t cardinality = 1;
};

Encoded encode_discrete(const JointSamples::Column& col) {
    std::vector<std::int64_t> sorted(col.symbols);
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    Encoded e;
    e.cardinality = std::max<std::uint64_t>(1, sorted.size());
    e.codes.resize(col.symbols.size());
    for (std::size_t i = 0; i < col.symbols.size(); ++i) {
        const auto it = std::lower_bound(sorted.begin(), sorted.end(), col.symbols[i]);
        e.codes[i] = static_cast<std::uint32_t>(it - sorted.begin());
    }
    return e;
}

Encoded encode_real(const JointSamples::Column& col, std::size_t bins) {
    Encoded e;
    e.codes.resize(col.real.size());
    if (col.real.empty()) return e;
    double lo = col.real[0], hi = col.real[0];
    for (double v : col.real) {
        if (!std::isfinite(v)) throw std::domain_error("binning: non-finite value in " + col.name);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (hi == lo) {
        e.cardinality = 1;
        return e;
    }
    e.cardinality = bins;
    const double scale = static_cast<double>(bins) / (hi - lo);
    for (std::size_t i = 0; i < col.real.size(); ++i) {
        auto b = static_cast<std::int64_t>((col.real[i] - lo) * scale);
        b = std::clamp<std::int64_t>(b, 0, static_cast<std::int64_t>(bins) - 1);
        e.codes[i] = static_cast<std::uint32_t>(b);
    }
    return e;
}

Encoded encode_column(const JointSamples::Column& col, const BinningSpec& binning) {
    return col.discrete ? encode_discrete(col) : encode_real(col, binning.bins_for(col.name));
}

// mixed-radix combination of several encoded columns into one code stream
Encoded combine(const JointSamples& samples, const std::vector<std::string>& cols,
                const BinningSpec& binning) {
    if (cols.empty()) {
        Encoded e;
        e.codes.assign(samples.size(), 0);
        return e;
    }
    Encoded out;
    out.codes.assign(samples.size(), 0);
    for (const auto& name : cols) {
        const Encoded e = encode_column(samples.column(name), binning);
        if (out.cardinality > std::numeric_limits<std::uint64_t>::max() / std::max<std::uint64_t>(e.cardinality, 1))
            throw std::domain_error("joint alphabet overflow");
        const std::uint64_t radix = e.cardinality;
        for (std::size_t i = 0; i < out.codes.size(); ++i) {
            const std::uint64_t v = static_cast<std::uint64_t>(out.codes[i]) * radix + e.codes[i];
            if (v > std::numeric_limits<std::uint32_t>::max())
                throw std::domain_error("joint alphabet too large");
            out.codes[i] = static_cast<std::uint32_t>(v);
        }
        out.cardinality *= radix;
    }
    return out;
}

double entropy_of_codes(const std::vector<std::uint32_t>& codes, std::uint64_t cardinality) {
    if (codes.empty()) throw std::domain_error("entropy: no samples");
    const double n = static_cast<double>(codes.size());
    double h = 0.0;
    if (cardinality <= (1u << 24)) {
        std::vector<std::uint32_t> counts(cardinality, 0);
        for (auto c : codes) ++counts[c];
        for (auto c : counts) {
            if (c == 0) continue;
            const double p = static_cast<double>(c) / n;
            h -= p * std::log2(p);
        }
    } else {
        std::unordered_map<std::uint32_t, std::uint32_t> counts;
        counts.reserve(codes.size() / 4);
        for (auto c : codes) ++counts[c];
        for (const auto& [_, c] : counts) {
            const double p = static_cast<double>(c) / n;
            h -= p * std::log2(p);
        }
    }
    return h;
}

void require_discrete(const JointSamples& samples, const std::vector<std::string>& cols) {
    for (const auto& name : cols) {
        if (!samples.column(name).discrete)
            throw std::domain_error("entropy: column " + name +
                                    " is continuous; discretize it first");
    }
}

struct CmiCore {
    double estimate = 0.0;
    double stderr_bits = 0.0;
    std::size_t small_cells = 0;
    std::size_t covered = 0;
    std::size_t z_cells = 0;
};

CmiCore cmi_from_codes(const std::vector<std::uint32_t>& xc, std::uint64_t cx,
                       const std::vector<std::uint32_t>& yc, std::uint64_t cy,
                       const std::vector<std::uint32_t>& zc, std::uint64_t cz) {
    const std::size_t n = xc.size();
    // group rows by z cell (counting sort)
    std::vector<std::uint32_t> zcount(cz, 0);
    for (auto z : zc) ++zcount[z];
    std::vector<std::size_t> offset(cz + 1, 0);
    for (std::size_t z = 0; z < cz; ++z) offset[z + 1] = offset[z] + zcount[z];
    std::vector<std::uint32_t> rows(n);
    {
        std::vector<std::size_t> cursor(offset.begin(), offset.end() - 1);
        for (std::size_t i = 0; i < n; ++i) rows[cursor[zc[i]]++] = static_cast<std::uint32_t>(i);
    }

    if (cx * cy > (1u << 26)) throw std::domain_error("cmi: X*Y alphabet too large");
    std::vector<std::uint32_t> joint(cx * cy, 0);
    std::vector<std::uint32_t> margx(cx, 0), margy(cy, 0);
    std::vector<std::uint64_t> touched;

    CmiCore out;
    double sum_c2 = 0.0; // sum over samples of (log2 ratio)^2 for the delta-method SE
    for (std::size_t z = 0; z < cz; ++z) {
        const std::size_t nz = offset[z + 1] - offset[z];
        if (nz == 0) continue;
        ++out.z_cells;
        if (nz < 2) {
            ++out.small_cells;
            continue; // contributes zero
        }
        out.covered += nz;
        touched.clear();
        for (std::size_t r = offset[z]; r < offset[z + 1]; ++r) {
            const std::uint32_t i = rows[r];
            const std::uint64_t key = static_cast<std::uint64_t>(xc[i]) * cy + yc[i];
            if (joint[key]++ == 0) touched.push_back(key);
            ++margx[xc[i]];
            ++margy[yc[i]];
        }
        const double dz = static_cast<double>(nz);
        double iz = 0.0;
        for (std::uint64_t key : touched) {
            const std::uint32_t cxy = joint[key];
            const std::uint32_t mx = margx[key / cy];
            const std::uint32_t my = margy[key % cy];
            const double pxy = cxy / dz;
            const double c = std::log2(pxy * dz * dz / (static_cast<double>(mx) * my));
            iz += pxy * c;
            sum_c2 += cxy * c * c; // per-sample contribution accumulated globally
        }
        out.estimate += (dz / static_cast<double>(n)) * iz;
        for (std::uint64_t key : touched) {
            joint[key] = 0;
            margx[key / cy] = 0;
            margy[key % cy] = 0;
        }
    }
    const double var =
        std::max(0.0, sum_c2 / static_cast<double>(n) - out.estimate * out.estimate);
    out.stderr_bits = std::sqrt(var / static_cast<double>(n));
    return out;
}

} // namespace

double entropy(const JointSamples& samples, const std::vector<std::string>& cols) {
    if (cols.empty()) throw std::domain_error("entropy: no columns");
    require_discrete(samples, cols);
    BinningSpec none;
    const Encoded e = combine(samples, cols, none);
    return entropy_of_codes(e.codes, e.cardinality);
}

double conditional_entropy(const JointSamples& samples, const std::vector<std::string>& target,
                           const std::vector<std::string>& given) {
    if (target.empty()) throw std::domain_error("conditional_entropy: no target columns");
    if (given.empty()) return entropy(samples, target);
    std::vector<std::string> both(target);
    both.insert(both.end(), given.begin(), given.end());
    return entropy(samples, both) - entropy(samples, given);
}

CmiResult cmi(const JointSamples& samples, const std::vector<std::string>& x_cols,
              const std::vector<std::string>& y_cols, const std::vector<std::string>& z_cols,
              const BinningSpec& binning, RngStream& rng) {
    if (samples.size() == 0) throw std::domain_error("cmi: no samples");
    const Encoded x = combine(samples, x_cols, binning);
    const Encoded y = combine(samples, y_cols, binning);
    const Encoded z = combine(samples, z_cols, binning);

    CmiResult res;
    res.n = samples.size();
    const CmiCore core = cmi_from_codes(x.codes, x.cardinality, y.codes, y.cardinality, z.codes,
                                        z.cardinality);
    res.estimate_bits = core.estimate;
    res.stderr_bits = core.stderr_bits;
    res.small_z_cells = core.small_cells;
    res.z_cells = core.z_cells;
    res.coverage = static_cast<double>(core.covered) / static_cast<double>(res.n);

    // permute Y within each Z-cell: an empirical zero reference with the
    // same marginals, capturing the plug-in bias
    std::vector<std::uint32_t> zcount(z.cardinality, 0);
    for (auto zz : z.codes) ++zcount[zz];
    std::vector<std::size_t> offset(z.cardinality + 1, 0);
    for (std::size_t i = 0; i < z.cardinality; ++i) offset[i + 1] = offset[i] + zcount[i];
    std::vector<std::uint32_t> rows(res.n);
    {
        std::vector<std::size_t> cursor(offset.begin(), offset.end() - 1);
        for (std::size_t i = 0; i < res.n; ++i)
            rows[cursor[z.codes[i]]++] = static_cast<std::uint32_t>(i);
    }
    std::vector<std::uint32_t> y_shuffled(y.codes);
    for (std::size_t zc = 0; zc < z.cardinality; ++zc) {
        const std::size_t b = offset[zc], e = offset[zc + 1];
        for (std::size_t i = e; i > b + 1; --i) {
            const std::size_t j = b + rng.below(i - b);
            std::swap(y_shuffled[rows[i - 1]], y_shuffled[rows[j]]);
        }
    }
    res.baseline_bits = cmi_from_codes(x.codes, x.cardinality, y_shuffled, y.cardinality,
                                       z.codes, z.cardinality)
                            .estimate;
    return res;
}

std::size_t GaussianModel::index(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return i;
    throw std::domain_error("GaussianModel: no variable named " + name);
}

namespace {

// log-determinant via Cholesky; returns NaN when not positive definite
double logdet_psd(const std::vector<double>& m, std::size_t n) {
    std::vector<double> a(m);
    double maxdiag = 0.0;
    for (std::size_t i = 0; i < n; ++i) maxdiag = std::max(maxdiag, std::fabs(a[i * n + i]));
    const double tol = maxdiag * 1e-12;
    double logdet = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        double d = a[j * n + j];
        for (std::size_t k = 0; k < j; ++k) d -= a[j * n + k] * a[j * n + k];
        if (!(d > tol)) return std::numeric_limits<double>::quiet_NaN();
        const double root = std::sqrt(d);
        logdet += 2.0 * std::log(root);
        a[j * n + j] = root;
        for (std::size_t i = j + 1; i < n; ++i) {
            double v = a[i * n + j];
            for (std::size_t k = 0; k < j; ++k) v -= a[i * n + k] * a[j * n + k];
            a[i * n + j] = v / root;
        }
    }
    return logdet;
}

std::vector<double> submatrix(const GaussianModel& model, const std::vector<std::size_t>& idx) {
    const std::size_t n = model.names.size();
    std::vector<double> out(idx.size() * idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i)
        for (std::size_t j = 0; j < idx.size(); ++j)
            out[i * idx.size() + j] = model.covariance[idx[i] * n + idx[j]];
    return out;
}

} // namespace

double gaussian_cmi(const GaussianModel& model, const std::vector<std::string>& a,
                    const std::vector<std::string>& b, const std::vector<std::string>& e) {
    if (model.covariance.size() != model.names.size() * model.names.size())
        throw std::domain_error("gaussian_cmi: covariance shape mismatch");
    auto indices = [&](const std::vector<std::string>& group) {
        std::vector<std::size_t> idx;
        for (const auto& name : group) idx.push_back(model.index(name));
        return idx;
    };
    const auto ia = indices(a), ib = indices(b), ie = indices(e);

    auto block_logdet = [&](std::vector<std::size_t> idx) {
        if (idx.empty()) return 0.0;
        return logdet_psd(submatrix(model, idx), idx.size());
    };

    auto concat = [](std::vector<std::size_t> u, const std::vector<std::size_t>& v) {
        u.insert(u.end(), v.begin(), v.end());
        return u;
    };

    const double ld_e = block_logdet(ie);
    if (std::isnan(ld_e)) throw std::domain_error("gaussian_cmi: singular block E");
    const double ld_ae = block_logdet(concat(ia, ie));
    if (std::isnan(ld_ae)) throw std::domain_error("gaussian_cmi: singular block AE");
    const double ld_be = block_logdet(concat(ib, ie));
    if (std::isnan(ld_be)) throw std::domain_error("gaussian_cmi: singular block BE");
    const double ld_abe = block_logdet(concat(concat(ia, ib), ie));
    if (std::isnan(ld_abe)) return std::numeric_limits<double>::infinity();

    const double nats = 0.5 * (ld_ae + ld_be - ld_e - ld_abe);
    return std::max(0.0, nats / std::log(2.0));
}

MarkovReport markov_test(const JointSamples& samples, const std::vector<std::string>& x_cols,
                         const std::vector<std::string>& y_cols,
                         const std::vector<std::string>& za_cols,
                         const std::vector<std::string>& zb_cols, const BinningSpec& binning,
                         double tolerance, RngStream& rng) {
    const Encoded x = combine(samples, x_cols, binning);
    const Encoded y = combine(samples, y_cols, binning);
    const Encoded za = combine(samples, za_cols, binning);
    std::vector<std::string> z_cols(za_cols);
    z_cols.insert(z_cols.end(), zb_cols.begin(), zb_cols.end());
    const Encoded z = combine(samples, z_cols, binning);

    auto joint_entropy = [&](std::initializer_list<const Encoded*> parts) {
        std::vector<std::uint32_t> codes(samples.size(), 0);
        std::uint64_t card = 1;
        for (const Encoded* p : parts) {
            for (std::size_t i = 0; i < codes.size(); ++i) {
                const std::uint64_t v = static_cast<std::uint64_t>(codes[i]) * p->cardinality +
                                        p->codes[i];
                if (v > std::numeric_limits<std::uint32_t>::max())
                    throw std::domain_error("markov_test: joint alphabet too large");
                codes[i] = static_cast<std::uint32_t>(v);
            }
            card *= p->cardinality;
        }
        return entropy_of_codes(codes, card);
    };

    MarkovReport rep;
    rep.tolerance = tolerance;
    rep.h_x_given_za = joint_entropy({&x, &za}) - joint_entropy({&za});
    rep.h_x_given_z = joint_entropy({&x, &z}) - joint_entropy({&z});
    rep.h_x_given_zy = joint_entropy({&x, &z, &y}) - joint_entropy({&z, &y});

    const CmiResult c = cmi(samples, x_cols, y_cols, z_cols, binning, rng);
    rep.cmi_bits = c.estimate_bits;
    rep.cmi_baseline_bits = c.baseline_bits;

    rep.pass = std::fabs(rep.h_x_given_za - rep.h_x_given_z) <= tolerance &&
               std::fabs(rep.h_x_given_z - rep.h_x_given_zy) <= tolerance &&
               rep.cmi_bits <= rep.cmi_baseline_bits + tolerance;
    return rep;
}

} // namespace kljnlab
