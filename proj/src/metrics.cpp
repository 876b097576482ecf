#include "prowl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace prowl {

namespace {

void require(bool cond, const char* msg) {
    if (!cond) throw std::invalid_argument(msg);
}

double mean_at_policy(const PolicyParams& policy, const OracleTestSet& test, const VecD& pos,
                      const VecD& neg) {
    double sum = 0.0;
    for (std::size_t i = 0; i < test.size(); ++i) {
        sum += policy.decide(test.x[i]) > 0 ? pos[i] : neg[i];
    }
    return sum / static_cast<double>(test.size());
}

double mean_at_pointwise_argmax(const VecD& pos, const VecD& neg) {
    double sum = 0.0;
    for (std::size_t i = 0; i < pos.size(); ++i) sum += std::max(pos[i], neg[i]);
    return sum / static_cast<double>(pos.size());
}

}  // namespace

RegretPair regrets(const PolicyParams& policy, const OracleTestSet& test) {
    require(test.size() > 0, "regrets: empty test set");
    require(test.has_lower(), "regrets: certified oracle means missing");
    RegretPair out;
    out.target_regret = mean_at_pointwise_argmax(test.mu_star_pos, test.mu_star_neg) -
                        mean_at_policy(policy, test, test.mu_star_pos, test.mu_star_neg);
    out.robust_regret = mean_at_pointwise_argmax(test.mu_lower_pos, test.mu_lower_neg) -
                        mean_at_policy(policy, test, test.mu_lower_pos, test.mu_lower_neg);
    return out;
}

GapPair gaps(const PolicyParams& policy, const OracleTestSet& test) {
    require(test.size() > 0, "gaps: empty test set");
    require(test.has_lower(), "gaps: certified oracle means missing");
    const double v_target = mean_at_policy(policy, test, test.mu_star_pos, test.mu_star_neg);
    const double v_proxy = mean_at_policy(policy, test, test.mu_proxy_pos, test.mu_proxy_neg);
    const double v_cert = mean_at_policy(policy, test, test.mu_lower_pos, test.mu_lower_neg);
    return {v_proxy - v_target, v_target - v_cert};
}

CertificateDiagnostics certificate_diagnostics(const Dataset& ds, const OracleTestSet& test) {
    ds.validate();
    require(test.size() > 0, "certificate_diagnostics: empty test set");
    CertificateDiagnostics out;
    for (const Observation& o : ds.observations) {
        out.e_u += o.u;
        if (o.u > o.r) out.clip_rate += 1.0;
    }
    out.e_u /= static_cast<double>(ds.size());
    out.clip_rate /= static_cast<double>(ds.size());
    for (std::size_t i = 0; i < test.size(); ++i) {
        const bool ok_pos = test.r_pot_pos[i] - test.r_star_pot_pos[i] <= test.u_env_pos[i];
        const bool ok_neg = test.r_pot_neg[i] - test.r_star_pot_neg[i] <= test.u_env_neg[i];
        if (ok_pos && ok_neg) out.valid_rate += 1.0;
    }
    out.valid_rate /= static_cast<double>(test.size());
    return out;
}

const char* const kMetricsCsvHeader =
    "scenario,rho,n,replicate,method,reward_family,target_regret,robust_regret,"
    "proxy_target_gap,target_certified_gap,e_u,clip_rate,valid_rate,lcb,runtime_seconds";

void metrics_to_csv(const std::vector<MetricsRecord>& records, const std::string& path,
                    const std::vector<std::string>& header_comments) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("metrics_to_csv: cannot open " + path);
    for (const std::string& c : header_comments) out << "# " << c << "\n";
    out << kMetricsCsvHeader << "\n";
    for (const MetricsRecord& r : records) {
        out << r.scenario << "," << format_double(r.rho) << "," << r.n << "," << r.replicate
            << "," << r.method << "," << r.reward_family << ","
            << format_double(r.target_regret) << "," << format_double(r.robust_regret) << ","
            << format_double(r.proxy_target_gap) << ","
            << format_double(r.target_certified_gap) << "," << format_double(r.e_u) << ","
            << format_double(r.clip_rate) << "," << format_double(r.valid_rate) << ","
            << (r.lcb.has_value() ? format_double(*r.lcb) : std::string()) << ","
            << format_double(r.runtime_seconds) << "\n";
    }
}

std::vector<MetricsRecord> metrics_from_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("metrics_from_csv: cannot open " + path);
    std::string line;
    bool header_seen = false;
    std::vector<MetricsRecord> records;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            require(line == kMetricsCsvHeader, "metrics_from_csv: unexpected header");
            header_seen = true;
            continue;
        }
        std::vector<std::string> cells;
        std::string cur;
        std::stringstream ss(line);
        while (std::getline(ss, cur, ',')) cells.push_back(cur);
        if (!line.empty() && line.back() == ',') cells.emplace_back();
        require(cells.size() == 15, "metrics_from_csv: ragged row");
        MetricsRecord r;
        r.scenario = std::stoi(cells[0]);
        r.rho = std::stod(cells[1]);
        r.n = std::stol(cells[2]);
        r.replicate = std::stoi(cells[3]);
        r.method = cells[4];
        r.reward_family = cells[5];
        r.target_regret = std::stod(cells[6]);
        r.robust_regret = std::stod(cells[7]);
        r.proxy_target_gap = std::stod(cells[8]);
        r.target_certified_gap = std::stod(cells[9]);
        r.e_u = std::stod(cells[10]);
        r.clip_rate = std::stod(cells[11]);
        r.valid_rate = std::stod(cells[12]);
        if (!cells[13].empty()) r.lcb = std::stod(cells[13]);
        r.runtime_seconds = std::stod(cells[14]);
        records.push_back(std::move(r));
    }
    require(header_seen, "metrics_from_csv: missing header");
    return records;
}

}  // namespace prowl
