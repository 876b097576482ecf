#pragma once

#include <optional>
#include <string>
#include <vector>

#include "prowl/data.hpp"
#include "prowl/simulate.hpp"

namespace prowl {

/// One evaluation row of the fixed CSV schema.
struct MetricsRecord {
    int scenario = 0;
    double rho = 0.0;
    long n = 0;
    int replicate = 0;
    std::string method;
    std::string reward_family;  ///< "R", "underline-R" or "n/a"
    double target_regret = 0.0;
    double robust_regret = 0.0;
    double proxy_target_gap = 0.0;
    double target_certified_gap = 0.0;
    double e_u = 0.0;
    double clip_rate = 0.0;
    double valid_rate = 0.0;
    std::optional<double> lcb;
    double runtime_seconds = 0.0;
};

struct RegretPair {
    double target_regret = 0.0;
    double robust_regret = 0.0;
};

/// Regrets against the pointwise oracle Bayes rules on the test sample.
/// Both are nonnegative by construction (same mean surfaces on both sides).
RegretPair regrets(const PolicyParams& policy, const OracleTestSet& test);

struct GapPair {
    double proxy_target_gap = 0.0;
    double target_certified_gap = 0.0;
};

/// V_proxy(d) - V_target(d) and V_target(d) - V_certified(d) over oracle means.
GapPair gaps(const PolicyParams& policy, const OracleTestSet& test);

struct CertificateDiagnostics {
    double e_u = 0.0;        ///< learning-sample mean certificate magnitude
    double clip_rate = 0.0;  ///< learning-sample rate of u > r
    double valid_rate = 0.0; ///< test-sample rate that the envelope bounds the bias in both arms
};

CertificateDiagnostics certificate_diagnostics(const Dataset& ds, const OracleTestSet& test);

extern const char* const kMetricsCsvHeader;

/// Writes '#'-prefixed comment lines, the fixed header, then one row per
/// record with lossless double formatting.
void metrics_to_csv(const std::vector<MetricsRecord>& records, const std::string& path,
                    const std::vector<std::string>& header_comments = {});

std::vector<MetricsRecord> metrics_from_csv(const std::string& path);

}  // namespace prowl
