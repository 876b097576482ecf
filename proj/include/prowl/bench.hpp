#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "prowl/learners.hpp"
#include "prowl/metrics.hpp"

namespace prowl {

/// Batch-harness configuration (CLI flags and config file map onto this).
struct SweepConfig {
    enum class Mode { Rho, N, Diagnostics, Ablation };

    Mode mode = Mode::Rho;
    int scenario = 1;  ///< 1, 2, or 0 = both (diagnostics only)
    VecD rho_grid = {0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0};
    std::vector<long> n_grid = {100, 200, 500, 1000, 2000};
    long fixed_n = 200;      ///< sample size of the rho sweep
    double fixed_rho = 1.5;  ///< uncertainty level of the n sweep / ablation
    long diag_n = 1000;      ///< sample size of the diagnostics table
    long n_test = 10000;
    int inner_draws = 256;
    int reps = 30;
    std::uint64_t seed = 0;
    /// Subset of {prowl, prowl-u0, prowl-split, owl:R, owl:uR, rwl:R,
    /// rwl:uR, qlearn:R, qlearn:uR}; empty = the default eight (no split).
    std::vector<std::string> methods;
    std::string out_path;
    double delta = 0.1;
    std::optional<double> epsilon;  ///< default 0.5 (scenario 1) / 0.01 (scenario 2)
    int threads = 0;                ///< 0 = hardware concurrency
    double budget_seconds = 0.0;    ///< 0 = unlimited; exceeded cells get flagged rows
    bool timing = true;             ///< false writes runtime_seconds = 0 for byte-stable output
    SelectionMode selection = SelectionMode::TiedTemperature;

    void validate() const;
};

std::vector<std::string> default_methods();

/// Default bound epsilon per scenario: 0.5 under balanced randomization,
/// 0.01 at the scenario-2 propensity clip floor.
double default_epsilon(int scenario);

/// Runs the configured sweep, writes the per-replicate CSV to out_path and
/// a per-cell mean/SE summary next to it (suffix "_summary.csv"). Returns
/// the rows in output order. Flagged budget rows carry runtime_seconds = -1
/// and NaN metrics.
std::vector<MetricsRecord> run_sweep(const SweepConfig& cfg);

/// One certificate-diagnostics row: 30-rep means of (E[U], Clip, Valid).
struct DiagnosticsRow {
    int scenario = 0;
    double rho = 0.0;
    double e_u = 0.0;
    double clip_rate = 0.0;
    double valid_rate = 0.0;
};

/// Certificate diagnostics over the rho grid at diag_n; scenario 0 = both.
std::vector<DiagnosticsRow> run_diagnostics(const SweepConfig& cfg);

/// Static SVG line plot of per-cell means from a metrics CSV. kind selects
/// the column: target_regret, robust_regret, proxy_target_gap,
/// target_certified_gap, e_u, or lcb. Throws (writing nothing) when the CSV
/// has no data rows.
void emit_plots(const std::string& csv_path, const std::string& kind,
                const std::string& out_path);

/// Summary path derived from an output path ("x.csv" -> "x_summary.csv").
std::string summary_path_for(const std::string& out_path);

}  // namespace prowl
