#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "prowl/metrics.hpp"
#include "prowl/rng.hpp"
#include "prowl/simulate.hpp"

using namespace prowl;

namespace {

/// Hand-built test oracle whose Bayes rules are exactly linear in x.
OracleTestSet synthetic_test_set(int n, double lower_shift) {
    OracleTestSet t;
    Rng rng(71);
    for (int i = 0; i < n; ++i) {
        const double x = rng.uniform(-1.0, 1.0);
        t.x.push_back({x});
        t.mu_star_pos.push_back(0.5 + 0.2 * x);
        t.mu_star_neg.push_back(0.5 - 0.2 * x);
        t.mu_proxy_pos.push_back(0.5 + 0.2 * x + 0.05);
        t.mu_proxy_neg.push_back(0.5 - 0.2 * x + 0.05);
        t.mu_lower_pos.push_back(0.5 + 0.2 * x - lower_shift);
        t.mu_lower_neg.push_back(0.5 - 0.2 * x - lower_shift);
        t.pi_plus.push_back(0.5);
        t.r_pot_pos.push_back(0.5);
        t.r_pot_neg.push_back(0.5);
        t.r_star_pot_pos.push_back(0.5);
        t.r_star_pot_neg.push_back(0.5);
        t.u_env_pos.push_back(lower_shift);
        t.u_env_neg.push_back(lower_shift);
    }
    return t;
}

PolicyParams identity_policy(double slope) {
    PolicyParams p;
    p.kind = FeatureKind::Identity;
    p.beta = {slope};
    return p;
}

}  // namespace

TEST_CASE("regrets vanish at the pointwise Bayes rules") {
    const OracleTestSet t = synthetic_test_set(5000, 0.03);
    // Both Bayes rules are sign(x) here.
    const RegretPair r = regrets(identity_policy(1.0), t);
    CHECK(r.target_regret <= 1e-12);
    CHECK(r.target_regret >= -1e-9);
    CHECK(r.robust_regret <= 1e-12);
    CHECK(r.robust_regret >= -1e-9);
    // The anti-Bayes policy pays the full absolute advantage.
    const RegretPair bad = regrets(identity_policy(-1.0), t);
    CHECK(bad.target_regret > 0.1);
}

TEST_CASE("constant policies differ by the absolute mean oracle advantage") {
    const OracleTestSet t = synthetic_test_set(2000, 0.0);
    Standardization s;
    s.mean = {0.0};
    s.scale = {1.0};
    PolicyParams plus;
    plus.kind = FeatureKind::LinearIntercept;
    plus.standardization = s;
    plus.beta = {0.0, 1.0};
    PolicyParams minus = plus;
    minus.beta = {0.0, -1.0};
    double v_plus = 0.0, v_minus = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        v_plus += t.mu_star_pos[i];
        v_minus += t.mu_star_neg[i];
    }
    v_plus /= static_cast<double>(t.size());
    v_minus /= static_cast<double>(t.size());
    const double diff =
        regrets(minus, t).target_regret - regrets(plus, t).target_regret;
    CHECK(std::abs(diff) == doctest::Approx(std::abs(v_plus - v_minus)).epsilon(1e-12));
}

TEST_CASE("regrets are invariant under positive score rescaling") {
    const OracleTestSet t = synthetic_test_set(3000, 0.02);
    const RegretPair a = regrets(identity_policy(0.3), t);
    const RegretPair b = regrets(identity_policy(300.0), t);
    CHECK(a.target_regret == b.target_regret);
    CHECK(a.robust_regret == b.robust_regret);
}

TEST_CASE("gaps: signs and the rho = 0 degeneracy") {
    const OracleTestSet t = synthetic_test_set(2000, 0.03);
    const GapPair g = gaps(identity_policy(1.0), t);
    CHECK(g.proxy_target_gap == doctest::Approx(0.05));
    CHECK(g.target_certified_gap == doctest::Approx(0.03));

    ScenarioConfig cfg;
    cfg.scenario = 1;
    cfg.n = 100;
    cfg.rho = 0.0;
    cfg.seed = 4;
    cfg.n_test = 4000;
    const SimOutput sim = scenario_sample(cfg);
    PolicyParams p;
    p.kind = FeatureKind::LinearIntercept;
    p.standardization = sim.train.standardization;
    p.beta = {1.0, -0.5, 0.1};
    const GapPair g0 = gaps(p, sim.test);
    CHECK(g0.proxy_target_gap == 0.0);  // proxy means coincide exactly
    CHECK(std::abs(g0.target_certified_gap) <= 1e-3);  // inner-MC noise only
}

TEST_CASE("gap signs on simulated data at rho >= 0.5") {
    for (int scenario : {1, 2}) {
        ScenarioConfig cfg;
        cfg.scenario = scenario;
        cfg.n = 100;
        cfg.rho = 1.0;
        cfg.seed = 8;
        cfg.n_test = 4000;
        const SimOutput sim = scenario_sample(cfg);
        PolicyParams p;
        p.kind = sim.train.feature_kind;
        p.standardization = sim.train.standardization;
        p.beta.assign(feature_dim(p.kind, scenario == 1 ? 2 : 8), 0.0);
        p.beta[0] = 1.0;
        const GapPair g = gaps(p, sim.test);
        CHECK(g.proxy_target_gap >= 0.0);
        CHECK(g.target_certified_gap >= -1e-4);
    }
}

TEST_CASE("certificate diagnostics on scenario 1 at rho = 0.5") {
    ScenarioConfig cfg;
    cfg.scenario = 1;
    cfg.n = 1000;
    cfg.rho = 0.5;
    cfg.seed = 12;
    cfg.n_test = 10000;
    GenOptions opts;
    opts.test_lower_means = false;
    const SimOutput sim = scenario_sample(cfg, opts);
    const CertificateDiagnostics d = certificate_diagnostics(sim.train, sim.test);
    CHECK(std::abs(d.e_u - 0.015) <= 0.002);
    CHECK(d.clip_rate == 0.0);
    CHECK(d.valid_rate == 1.0);
}

TEST_CASE("certificate diagnostics: zero certificates") {
    ScenarioConfig cfg;
    cfg.scenario = 2;
    cfg.n = 500;
    cfg.rho = 0.0;
    cfg.seed = 3;
    cfg.n_test = 1000;
    GenOptions opts;
    opts.test_lower_means = false;
    const SimOutput sim = scenario_sample(cfg, opts);
    const CertificateDiagnostics d = certificate_diagnostics(sim.train, sim.test);
    CHECK(d.e_u == 0.0);
    CHECK(d.clip_rate == 0.0);
    CHECK(d.valid_rate == 1.0);
}

TEST_CASE("metrics CSV round-trips losslessly") {
    std::vector<MetricsRecord> rows;
    MetricsRecord r;
    r.scenario = 2;
    r.rho = 1.25;
    r.n = 200;
    r.replicate = 7;
    r.method = "prowl";
    r.reward_family = "n/a";
    r.target_regret = 0.012345678901234567;
    r.robust_regret = 1e-17;
    r.proxy_target_gap = 0.3;
    r.target_certified_gap = 0.0;
    r.e_u = 0.093;
    r.clip_rate = 0.0;
    r.valid_rate = 1.0;
    r.lcb = -0.25;
    r.runtime_seconds = 1.5;
    rows.push_back(r);
    r.method = "owl";
    r.reward_family = "uR";
    r.lcb.reset();
    rows.push_back(r);

    const std::string path = "test_metrics_roundtrip.csv";
    metrics_to_csv(rows, path, {"config echo line"});
    const std::vector<MetricsRecord> back = metrics_from_csv(path);
    REQUIRE(back.size() == 2);
    CHECK(back[0].target_regret == rows[0].target_regret);
    CHECK(back[0].robust_regret == rows[0].robust_regret);
    CHECK(back[0].lcb.has_value());
    CHECK(*back[0].lcb == -0.25);
    CHECK(!back[1].lcb.has_value());
    CHECK(back[1].method == "owl");
    CHECK(back[1].reward_family == "uR");
    std::remove(path.c_str());
}
