#include "prowl/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace prowl {

namespace {

void require(bool cond, const char* msg) {
    if (!cond) throw std::invalid_argument(msg);
}

void require_finite(const VecD& v, const char* msg) {
    for (double t : v) {
        if (!std::isfinite(t)) throw std::invalid_argument(msg);
    }
}

}  // namespace

int sign_rule(double score) {
    if (!std::isfinite(score)) throw std::invalid_argument("sign_rule: non-finite score");
    return score >= 0.0 ? 1 : -1;
}

std::string to_string(FeatureKind kind) {
    switch (kind) {
        case FeatureKind::LinearIntercept: return "linear-intercept";
        case FeatureKind::Scenario2Basis: return "scenario2-basis";
        case FeatureKind::Identity: return "identity";
    }
    throw std::invalid_argument("to_string: unknown FeatureKind");
}

FeatureKind feature_kind_from_string(const std::string& s) {
    if (s == "linear-intercept") return FeatureKind::LinearIntercept;
    if (s == "scenario2-basis") return FeatureKind::Scenario2Basis;
    if (s == "identity") return FeatureKind::Identity;
    throw std::invalid_argument("feature_kind_from_string: unknown kind '" + s + "'");
}

std::size_t feature_dim(FeatureKind kind, std::size_t raw_dim) {
    switch (kind) {
        case FeatureKind::LinearIntercept: return raw_dim + 1;
        case FeatureKind::Scenario2Basis:
            require(raw_dim == 8, "feature_dim: scenario2-basis expects 8 raw covariates");
            return 36;
        case FeatureKind::Identity: return raw_dim;
    }
    throw std::invalid_argument("feature_dim: unknown FeatureKind");
}

Standardization standardize_fit(const std::vector<VecD>& raw_rows) {
    require(!raw_rows.empty(), "standardize_fit: empty input");
    const std::size_t p = raw_rows.front().size();
    require(p > 0, "standardize_fit: zero-dimensional rows");
    for (const VecD& row : raw_rows) {
        require(row.size() == p, "standardize_fit: ragged rows");
        require_finite(row, "standardize_fit: non-finite value");
    }
    const double n = static_cast<double>(raw_rows.size());
    Standardization out;
    out.mean.assign(p, 0.0);
    out.scale.assign(p, 1.0);
    for (const VecD& row : raw_rows) {
        for (std::size_t j = 0; j < p; ++j) out.mean[j] += row[j];
    }
    for (std::size_t j = 0; j < p; ++j) out.mean[j] /= n;
    VecD ss(p, 0.0);
    for (const VecD& row : raw_rows) {
        for (std::size_t j = 0; j < p; ++j) {
            const double d = row[j] - out.mean[j];
            ss[j] += d * d;
        }
    }
    for (std::size_t j = 0; j < p; ++j) {
        const double sd = std::sqrt(ss[j] / n);  // population convention
        out.scale[j] = sd < 1e-12 ? 1.0 : sd;    // constant-column guard
    }
    return out;
}

VecD standardize_apply(const Standardization& std_, const VecD& x) {
    require(x.size() == std_.mean.size(), "standardize_apply: dimension mismatch");
    VecD z(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) z[j] = (x[j] - std_.mean[j]) / std_.scale[j];
    return z;
}

namespace {

double pos_part(double t) { return t > 0.0 ? t : 0.0; }

VecD scenario2_basis(const VecD& z) {
    // Frozen coordinate order: mains, squares, sines, positive parts,
    // interactions in the listed order, intercept last.
    VecD f;
    f.reserve(36);
    for (int j = 0; j < 8; ++j) f.push_back(z[j]);
    for (int j = 0; j < 8; ++j) f.push_back(z[j] * z[j]);
    for (int j = 0; j < 4; ++j) f.push_back(std::sin(z[j]));
    f.push_back(pos_part(z[4]));
    f.push_back(pos_part(z[5]));
    f.push_back(pos_part(z[6]));
    const int pairs[12][2] = {{0, 1}, {2, 3}, {0, 2}, {0, 3}, {1, 2}, {1, 3},
                              {3, 5}, {4, 5}, {4, 6}, {5, 6}, {3, 6}, {2, 7}};
    for (const auto& pr : pairs) f.push_back(z[pr[0]] * z[pr[1]]);
    f.push_back(1.0);
    return f;
}

}  // namespace

VecD featurize(const VecD& x, FeatureKind kind, const Standardization& std_) {
    require_finite(x, "featurize: non-finite input");
    switch (kind) {
        case FeatureKind::Identity:
            return x;
        case FeatureKind::LinearIntercept: {
            VecD f = standardize_apply(std_, x);
            f.push_back(1.0);
            return f;
        }
        case FeatureKind::Scenario2Basis: {
            require(x.size() == 8, "featurize: scenario2-basis expects 8 raw covariates");
            return scenario2_basis(standardize_apply(std_, x));
        }
    }
    throw std::invalid_argument("featurize: unknown FeatureKind");
}

void Dataset::validate() const {
    require(!observations.empty(), "Dataset: empty");
    require(oracle.empty() || oracle.size() == observations.size(),
            "Dataset: oracle list length mismatch");
    const std::size_t p = observations.front().x.size();
    for (const Observation& o : observations) {
        require(o.x.size() == p, "Dataset: ragged covariates");
        require_finite(o.x, "Dataset: non-finite covariate");
        require(o.a == 1 || o.a == -1, "Dataset: arm must be -1 or +1");
        require(o.r >= 0.0 && o.r <= 1.0, "Dataset: reward outside [0,1]");
        require(o.u >= 0.0 && o.u <= 1.0, "Dataset: certificate outside [0,1]");
        require(o.pi_a > 0.0 && o.pi_a <= 1.0, "Dataset: propensity outside (0,1]");
    }
}

void check_overlap(const Dataset& ds, double eps) {
    for (const Observation& o : ds.observations) {
        if (o.pi_a < eps) {
            throw std::invalid_argument("check_overlap: observed propensity below epsilon");
        }
    }
}

std::vector<VecD> featurize_all(const Dataset& ds) {
    std::vector<VecD> feats;
    feats.reserve(ds.size());
    for (const Observation& o : ds.observations) {
        feats.push_back(featurize(o.x, ds.feature_kind, ds.standardization));
    }
    return feats;
}

double PolicyParams::score_feat(const VecD& feat) const {
    require(feat.size() == beta.size(), "PolicyParams: feature dimension mismatch");
    double s = 0.0;
    for (std::size_t j = 0; j < beta.size(); ++j) s += beta[j] * feat[j];
    return std::clamp(s, -score_bound, score_bound);
}

int PolicyParams::decide_feat(const VecD& feat) const {
    require(feat.size() == beta.size(), "PolicyParams: feature dimension mismatch");
    double s = 0.0;
    for (std::size_t j = 0; j < beta.size(); ++j) s += beta[j] * feat[j];
    return sign_rule(s);
}

double PolicyParams::score(const VecD& x_raw) const {
    return score_feat(featurize(x_raw, kind, standardization));
}

int PolicyParams::decide(const VecD& x_raw) const {
    return decide_feat(featurize(x_raw, kind, standardization));
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void dataset_to_csv(const Dataset& ds, const std::string& path) {
    ds.validate();
    std::ofstream out(path);
    if (!out) throw std::runtime_error("dataset_to_csv: cannot open " + path);
    const std::size_t p = ds.observations.front().x.size();
    const bool with_oracle = !ds.oracle.empty();
    const bool with_lower = with_oracle && ds.oracle.front().mu_lower.has_value();
    for (std::size_t j = 1; j <= p; ++j) out << "x_" << j << ",";
    out << "a,r,u,pi_a";
    if (with_oracle) {
        out << ",r_star,mu_star_pos,mu_star_neg,mu_proxy_pos,mu_proxy_neg";
        if (with_lower) out << ",mu_lower_pos,mu_lower_neg";
        out << ",pi_plus";
    }
    out << "\n";
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const Observation& o = ds.observations[i];
        for (std::size_t j = 0; j < p; ++j) out << format_double(o.x[j]) << ",";
        out << o.a << "," << format_double(o.r) << "," << format_double(o.u) << ","
            << format_double(o.pi_a);
        if (with_oracle) {
            const OracleInfo& oi = ds.oracle[i];
            out << "," << format_double(oi.r_star) << "," << format_double(oi.mu_star.pos)
                << "," << format_double(oi.mu_star.neg) << "," << format_double(oi.mu_proxy.pos)
                << "," << format_double(oi.mu_proxy.neg);
            if (with_lower) {
                out << "," << format_double(oi.mu_lower->pos) << ","
                    << format_double(oi.mu_lower->neg);
            }
            out << "," << format_double(oi.pi_plus);
        }
        out << "\n";
    }
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    std::stringstream ss(line);
    while (std::getline(ss, cur, ',')) cells.push_back(cur);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

}  // namespace

Dataset dataset_from_csv(const std::string& path, FeatureKind kind) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("dataset_from_csv: cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("dataset_from_csv: empty file");
    const std::vector<std::string> header = split_csv_line(line);
    std::size_t p = 0;
    while (p < header.size() && header[p] == "x_" + std::to_string(p + 1)) ++p;
    require(p > 0, "dataset_from_csv: no covariate columns");
    require(p + 4 <= header.size() && header[p] == "a" && header[p + 1] == "r" &&
                header[p + 2] == "u" && header[p + 3] == "pi_a",
            "dataset_from_csv: malformed header");
    const bool with_oracle = header.size() > p + 4;
    const bool with_lower =
        with_oracle && std::find(header.begin(), header.end(), "mu_lower_pos") != header.end();

    Dataset ds;
    ds.feature_kind = kind;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        const std::vector<std::string> cells = split_csv_line(line);
        require(cells.size() == header.size(), "dataset_from_csv: ragged row");
        Observation o;
        o.x.resize(p);
        for (std::size_t j = 0; j < p; ++j) o.x[j] = std::stod(cells[j]);
        o.a = std::stoi(cells[p]);
        o.r = std::stod(cells[p + 1]);
        o.u = std::stod(cells[p + 2]);
        o.pi_a = std::stod(cells[p + 3]);
        ds.observations.push_back(std::move(o));
        if (with_oracle) {
            OracleInfo oi;
            std::size_t c = p + 4;
            oi.r_star = std::stod(cells[c++]);
            oi.mu_star.pos = std::stod(cells[c++]);
            oi.mu_star.neg = std::stod(cells[c++]);
            oi.mu_proxy.pos = std::stod(cells[c++]);
            oi.mu_proxy.neg = std::stod(cells[c++]);
            if (with_lower) {
                ArmPair lower;
                lower.pos = std::stod(cells[c++]);
                lower.neg = std::stod(cells[c++]);
                oi.mu_lower = lower;
            }
            oi.pi_plus = std::stod(cells[c++]);
            ds.oracle.push_back(std::move(oi));
        }
    }
    require(!ds.observations.empty(), "dataset_from_csv: no data rows");
    std::vector<VecD> rows;
    rows.reserve(ds.size());
    for (const Observation& o : ds.observations) rows.push_back(o.x);
    ds.standardization = standardize_fit(rows);
    ds.validate();
    return ds;
}

}  // namespace prowl
