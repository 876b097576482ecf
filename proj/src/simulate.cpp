#include "prowl/simulate.hpp"

#include <cmath>
#include <stdexcept>

#include "prowl/rng.hpp"

namespace prowl {

namespace {

constexpr double kPi = 3.14159265358979323846;

void require(bool cond, const char* msg) {
    if (!cond) throw std::invalid_argument(msg);
}

double pos_part(double t) { return t > 0.0 ? t : 0.0; }

double sigmoid(double t) { return 1.0 / (1.0 + std::exp(-t)); }

/// Everything deterministic about one covariate point: conditional means,
/// certificate envelopes, noise scales, optimism law, propensity.
struct ArmLaw {
    double mu_star = 0.5;
    double mu_proxy = 0.5;
    double u_env = 0.0;
    double noise_scale = 0.0;
};

struct PointLaw {
    double pi_plus = 0.5;
    ArmLaw pos, neg;
    int scenario = 1;

    const ArmLaw& arm(int a) const { return a > 0 ? pos : neg; }
};

PointLaw scenario1_law(const VecD& x, double rho) {
    const double x1 = x[0], x2 = x[1];
    const double m1 = 0.38 * x1 - 0.22 * x2;
    const double tau1 = 0.72 * (x1 + 0.65 * x2) / 1.65;
    const double u0 = 0.02 + (x1 > 0.0 && x2 > 0.0 ? 0.04 : 0.0);
    const double u_env = std::min(rho * u0, 0.10);

    PointLaw law;
    law.scenario = 1;
    law.pi_plus = 0.5;
    for (int a : {1, -1}) {
        ArmLaw& arm = a > 0 ? law.pos : law.neg;
        arm.mu_star = clip(0.0, 1.0, 0.5 + 0.15 * m1 + 0.15 * a * tau1);
        arm.u_env = u_env;
        arm.mu_proxy = clip(0.0, 1.0, arm.mu_star + 0.50 * u_env);
        arm.noise_scale = 0.10;
    }
    return law;
}

PointLaw scenario2_law(const VecD& x, double rho) {
    const double x1 = x[0], x2 = x[1], x3 = x[2], x4 = x[3];
    const double x5 = x[4], x6 = x[5], x7 = x[6], x8 = x[7];

    const double m2 = clip(-1.0, 1.0, 0.20 * std::sin(1.2 * kPi * x3) +
                                          0.14 * std::cos(0.8 * kPi * x4) + 0.10 * x5 -
                                          0.08 * x6 + 0.06 * x7 * x8);
    const double r = 0.90 * x1 - 0.64 * x2 + 0.45 * std::sin(kPi * x3) + 0.24 * x4;
    const double w = std::exp(-2.9 * (r - 0.02) * (r - 0.02));
    const double b = 0.14 * std::tanh(x3 - 0.85 * x4) - 0.04 * pos_part(x5) - 0.03 * pos_part(x6);
    const double tau2 = clip(-1.0, 1.0, std::tanh(2.05 * (w + b - 0.60)));

    const double r_u = 0.94 * x1 - 0.70 * x2 + 0.48 * std::sin(kPi * x3) + 0.24 * x4;
    const double h = sigmoid(2.6 * (r_u - 0.02));
    const double q = std::exp(-8.6 * (r_u - 0.02) * (r_u - 0.02));
    const double f = 0.78 * pos_part(x5) + 0.58 * pos_part(x6);
    const double o = sigmoid(2.4 * (1.18 * x7 + 0.60 * x5 - 0.12));
    const double s = sigmoid(2.8 * (1.28 * x8 + 0.92 * x3 * x4 + 0.78 * x5 * x7 +
                                    0.48 * x6 * x8 - 0.06));
    const double t = sigmoid(2.5 * (1.08 * x7 + 0.96 * x8 + 0.92 * x5 * x7 +
                                    0.70 * x6 * x8 - 0.08));
    const double c = sigmoid(1.9 * (0.48 * x6 - 0.52 * x7 - 0.28 * x8 - 0.10));

    const double u0_pos = clip(0.0, 0.32, 0.010 + 0.020 * h +
                                              q * (0.16 * f + 0.17 * s + 0.11 * o + 0.19 * t) +
                                              0.075 * t + 0.022 * f * t);
    const double u0_neg = clip(0.0, 0.06, 0.002 + 0.006 * h + 0.010 * q * c + 0.004 * c);

    const double r_pi = 0.84 * x1 - 0.60 * x2 + 0.42 * std::sin(kPi * x3) + 0.20 * x4;
    const double l_pi = 0.20 * r_pi + 1.35 * pos_part(x5) + 1.10 * pos_part(x6) + 1.55 * x7 +
                        1.25 * x8 + 1.55 * x5 * x7 + 0.95 * x6 * x8 - 0.40 * x3 * x4;

    PointLaw law;
    law.scenario = 2;
    law.pi_plus = clip(0.01, 0.99, sigmoid(l_pi));

    law.pos.mu_star = clip(0.0, 1.0, 0.5 + 0.15 * m2 + 0.15 * tau2);
    law.neg.mu_star = clip(0.0, 1.0, 0.5 + 0.15 * m2 - 0.15 * tau2);
    law.pos.u_env = std::min(rho * u0_pos, 0.32);
    law.neg.u_env = std::min(rho * u0_neg, 0.32);
    law.pos.mu_proxy = clip(0.0, 1.0, law.pos.mu_star + 0.92 * law.pos.u_env);
    law.neg.mu_proxy = clip(0.0, 1.0, law.neg.mu_star + 0.14 * law.neg.u_env);
    law.pos.noise_scale = 0.08 + 0.68 * law.pos.u_env;
    law.neg.noise_scale = 0.05 + 0.04 * law.neg.u_env;
    return law;
}

PointLaw point_law(int scenario, const VecD& x, double rho) {
    return scenario == 1 ? scenario1_law(x, rho) : scenario2_law(x, rho);
}

VecD draw_covariates(int scenario, Rng& rng) {
    if (scenario == 1) {
        return {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    }
    VecD x(8);
    for (int j = 0; j < 4; ++j) x[j] = rng.uniform(-1.0, 1.0);
    const double e5 = rng.normal(), e6 = rng.normal(), e7 = rng.normal(), e8 = rng.normal();
    x[4] = clip(-1.0, 1.0, 0.50 * x[0] - 0.22 * x[1] + 0.14 * x[2] + 0.32 * e5);
    x[5] = clip(-1.0, 1.0, -0.30 * x[1] + 0.26 * x[2] + 0.18 * x[4] + 0.34 * e6);
    x[6] = clip(-1.0, 1.0, 0.68 * x[4] + 0.40 * x[5] + 0.30 * x[0] + 0.28 * e7);
    x[7] = clip(-1.0, 1.0, 0.46 * x[2] - 0.28 * x[3] + 0.60 * x[6] + 0.18 * x[4] + 0.30 * e8);
    return x;
}

double draw_optimism(int scenario, int arm, Rng& rng) {
    if (scenario == 1) return rng.uniform();
    return arm > 0 ? rng.beta(7.0, 1.0) : rng.beta(1.08, 5.2);
}

/// One fully realized unit: both potential target and proxy rewards.
struct UnitDraw {
    VecD x;
    int a = 1;
    double r_star_pos = 0, r_star_neg = 0;
    double r_pos = 0, r_neg = 0;
    PointLaw law;
};

UnitDraw draw_unit(int scenario, double rho, Rng& rng) {
    UnitDraw u;
    u.x = draw_covariates(scenario, rng);
    u.law = point_law(scenario, u.x, rho);
    u.a = rng.uniform() < u.law.pi_plus ? 1 : -1;
    const double eps_pos = rng.uniform(-1.0, 1.0);
    const double eps_neg = rng.uniform(-1.0, 1.0);
    const double v_pos = draw_optimism(scenario, 1, rng);
    const double v_neg = draw_optimism(scenario, -1, rng);

    u.r_star_pos = clip(0.0, 1.0, u.law.pos.mu_star + u.law.pos.noise_scale * eps_pos);
    u.r_star_neg = clip(0.0, 1.0, u.law.neg.mu_star + u.law.neg.noise_scale * eps_neg);
    u.r_pos = clip(0.0, 1.0, u.r_star_pos + u.law.pos.u_env * v_pos);
    u.r_neg = clip(0.0, 1.0, u.r_star_neg + u.law.neg.u_env * v_neg);
    return u;
}

/// 256-draw (by default) certified conditional mean at one (x, arm).
double lower_mean_mc(const PointLaw& law, int arm, int inner_draws, Rng& rng) {
    const ArmLaw& al = law.arm(arm);
    double sum = 0.0;
    for (int k = 0; k < inner_draws; ++k) {
        const double eps = rng.uniform(-1.0, 1.0);
        const double v = draw_optimism(law.scenario, arm, rng);
        const double r_star = clip(0.0, 1.0, al.mu_star + al.noise_scale * eps);
        const double r = clip(0.0, 1.0, r_star + al.u_env * v);
        sum += pos_part(r - al.u_env);
    }
    return sum / static_cast<double>(inner_draws);
}

SimOutput sample_impl(const ScenarioConfig& cfg, const GenOptions& opts) {
    cfg.validate();
    require(opts.inner_draws >= 1, "GenOptions: inner_draws must be >= 1");

    SimOutput out;
    Rng rng(cfg.seed);

    std::vector<PointLaw> train_laws;
    train_laws.reserve(cfg.n);
    out.train.feature_kind =
        cfg.scenario == 1 ? FeatureKind::LinearIntercept : FeatureKind::Scenario2Basis;
    out.train.observations.reserve(cfg.n);
    out.train.oracle.reserve(cfg.n);
    for (long i = 0; i < cfg.n; ++i) {
        const UnitDraw u = draw_unit(cfg.scenario, cfg.rho, rng);
        Observation obs;
        obs.x = u.x;
        obs.a = u.a;
        obs.r = u.a > 0 ? u.r_pos : u.r_neg;
        obs.u = u.law.arm(u.a).u_env;
        obs.pi_a = u.a > 0 ? u.law.pi_plus : 1.0 - u.law.pi_plus;
        out.train.observations.push_back(std::move(obs));

        OracleInfo oi;
        oi.r_star = u.a > 0 ? u.r_star_pos : u.r_star_neg;
        oi.mu_star = {u.law.pos.mu_star, u.law.neg.mu_star};
        oi.mu_proxy = {u.law.pos.mu_proxy, u.law.neg.mu_proxy};
        oi.pi_plus = u.law.pi_plus;
        out.train.oracle.push_back(std::move(oi));
        train_laws.push_back(u.law);
    }
    {
        std::vector<VecD> rows;
        rows.reserve(cfg.n);
        for (const Observation& o : out.train.observations) rows.push_back(o.x);
        out.train.standardization = standardize_fit(rows);
    }

    OracleTestSet& test = out.test;
    std::vector<PointLaw> test_laws;
    test_laws.reserve(cfg.n_test);
    test.x.reserve(cfg.n_test);
    for (long i = 0; i < cfg.n_test; ++i) {
        const UnitDraw u = draw_unit(cfg.scenario, cfg.rho, rng);
        test.x.push_back(u.x);
        test.mu_star_pos.push_back(u.law.pos.mu_star);
        test.mu_star_neg.push_back(u.law.neg.mu_star);
        test.mu_proxy_pos.push_back(u.law.pos.mu_proxy);
        test.mu_proxy_neg.push_back(u.law.neg.mu_proxy);
        test.pi_plus.push_back(u.law.pi_plus);
        test.r_pot_pos.push_back(u.r_pos);
        test.r_pot_neg.push_back(u.r_neg);
        test.r_star_pot_pos.push_back(u.r_star_pos);
        test.r_star_pot_neg.push_back(u.r_star_neg);
        test.u_env_pos.push_back(u.law.pos.u_env);
        test.u_env_neg.push_back(u.law.neg.u_env);
        test_laws.push_back(u.law);
    }

    // Certified means live on their own derived streams so the flags do not
    // perturb the unit draws or each other.
    if (opts.train_lower_means) {
        Rng inner(derive_seed(cfg.seed, 1));
        for (long i = 0; i < cfg.n; ++i) {
            ArmPair lower;
            lower.pos = lower_mean_mc(train_laws[i], 1, opts.inner_draws, inner);
            lower.neg = lower_mean_mc(train_laws[i], -1, opts.inner_draws, inner);
            out.train.oracle[i].mu_lower = lower;
        }
    }
    if (opts.test_lower_means) {
        Rng inner(derive_seed(cfg.seed, 2));
        test.mu_lower_pos.resize(cfg.n_test);
        test.mu_lower_neg.resize(cfg.n_test);
        for (long i = 0; i < cfg.n_test; ++i) {
            test.mu_lower_pos[i] = lower_mean_mc(test_laws[i], 1, opts.inner_draws, inner);
            test.mu_lower_neg[i] = lower_mean_mc(test_laws[i], -1, opts.inner_draws, inner);
        }
        test.inner_draws = opts.inner_draws;
    }
    return out;
}

}  // namespace

double clip(double lo, double hi, double t) {
    require(lo <= hi, "clip: lo > hi");
    return std::min(hi, std::max(lo, t));
}

void ScenarioConfig::validate() const {
    require(scenario == 1 || scenario == 2, "ScenarioConfig: scenario must be 1 or 2");
    require(n >= 1, "ScenarioConfig: n must be >= 1");
    require(rho >= 0.0, "ScenarioConfig: rho must be >= 0");
    require(n_test >= 1, "ScenarioConfig: n_test must be >= 1");
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + (stream + 1) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

SimOutput scenario1_sample(const ScenarioConfig& cfg, const GenOptions& opts) {
    require(cfg.scenario == 1, "scenario1_sample: config is not scenario 1");
    return sample_impl(cfg, opts);
}

SimOutput scenario2_sample(const ScenarioConfig& cfg, const GenOptions& opts) {
    require(cfg.scenario == 2, "scenario2_sample: config is not scenario 2");
    return sample_impl(cfg, opts);
}

SimOutput scenario_sample(const ScenarioConfig& cfg, const GenOptions& opts) {
    return sample_impl(cfg, opts);
}

double oracle_value(const PolicyParams& policy, const OracleTestSet& test, OracleMeans which) {
    require(test.size() > 0, "oracle_value: empty test set");
    const VecD* pos = nullptr;
    const VecD* neg = nullptr;
    switch (which) {
        case OracleMeans::Target: pos = &test.mu_star_pos; neg = &test.mu_star_neg; break;
        case OracleMeans::Proxy: pos = &test.mu_proxy_pos; neg = &test.mu_proxy_neg; break;
        case OracleMeans::Certified:
            require(test.has_lower(), "oracle_value: certified means were not generated");
            pos = &test.mu_lower_pos;
            neg = &test.mu_lower_neg;
            break;
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < test.size(); ++i) {
        sum += policy.decide(test.x[i]) > 0 ? (*pos)[i] : (*neg)[i];
    }
    return sum / static_cast<double>(test.size());
}

}  // namespace prowl
