#pragma once

#include <cstdint>

#include "prowl/data.hpp"

namespace prowl {

/// min(hi, max(lo, t)); throws when lo > hi.
double clip(double lo, double hi, double t);

struct ScenarioConfig {
    int scenario = 1;   ///< 1 or 2
    long n = 200;       ///< policy-learning sample size
    double rho = 1.0;   ///< uncertainty level, >= 0
    std::uint64_t seed = 0;
    long n_test = 10000;

    void validate() const;
};

struct GenOptions {
    bool train_lower_means = false;  ///< attach certified means to the sample
    bool test_lower_means = true;    ///< attach certified means to the test set
    int inner_draws = 256;           ///< inner Monte Carlo size per (x, arm)
};

/// Independent evaluation draws with the full simulation oracle, including
/// the both-arm potential rewards needed by the validity diagnostic
/// (a simulation-only backdoor; nothing here is visible to a learner).
struct OracleTestSet {
    std::vector<VecD> x;
    VecD mu_star_pos, mu_star_neg;
    VecD mu_proxy_pos, mu_proxy_neg;
    VecD mu_lower_pos, mu_lower_neg;  ///< empty unless requested
    VecD pi_plus;
    VecD r_pot_pos, r_pot_neg;            ///< realized proxy potentials
    VecD r_star_pot_pos, r_star_pot_neg;  ///< realized target potentials
    VecD u_env_pos, u_env_neg;            ///< certificate envelopes at x
    int inner_draws = 0;                  ///< provenance of the certified means

    std::size_t size() const { return x.size(); }
    bool has_lower() const { return !mu_lower_pos.empty(); }
};

struct SimOutput {
    Dataset train;
    OracleTestSet test;
};

/// Scenario 1: Unif[-1,1]^2 covariates, balanced propensity, linear
/// treatment boundary, shared-arm certificate envelope capped at 0.10.
/// Per-unit draw order is frozen: covariates, arm, target noise (+1 then
/// -1), optimism (+1 then -1). Certified means come from a seeded inner
/// Monte Carlo on streams derived from the seed, so the option flags never
/// perturb the unit draws.
SimOutput scenario1_sample(const ScenarioConfig& cfg, const GenOptions& opts = {});

/// Scenario 2: correlated clinical covariates, logistic propensity clipped
/// to [0.01, 0.99], arm-specific envelopes capped at 0.32 / 0.06 (joint cap
/// 0.32 after rho-scaling), Beta(7,1) / Beta(1.08,5.2) optimism. Same frozen
/// draw order as Scenario 1.
SimOutput scenario2_sample(const ScenarioConfig& cfg, const GenOptions& opts = {});

/// Dispatch on cfg.scenario.
SimOutput scenario_sample(const ScenarioConfig& cfg, const GenOptions& opts = {});

enum class OracleMeans { Target, Certified, Proxy };

/// Test-set mean of the selected per-arm oracle mean at the policy's arm.
double oracle_value(const PolicyParams& policy, const OracleTestSet& test, OracleMeans which);

/// Deterministic derived stream: splitmix64 of (seed, stream index).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace prowl
