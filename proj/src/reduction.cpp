#include "prowl/reduction.hpp"

#include <cmath>
#include <stdexcept>

namespace prowl {

namespace {

void require(bool cond, const char* msg) {
    if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

AdvantageTriplet advantage_triplet(const Observation& obs, double pi_plus,
                                   const NuisancePair& nu, const VecD& x_feat) {
    require(pi_plus > 0.0 && pi_plus < 1.0, "advantage_triplet: pi(1|x) outside (0,1)");
    const double g_pos = gamma_arm(obs, 1, pi_plus, nu, x_feat);
    const double g_neg = gamma_arm(obs, -1, 1.0 - pi_plus, nu, x_feat);
    AdvantageTriplet t;
    t.d_val = g_pos - g_neg;
    t.y = sign_rule(t.d_val);
    t.w = std::abs(t.d_val);
    return t;
}

double weighted01_risk_hat(const Dataset& ds, const PolicyParams& policy,
                           const NuisancePair& nu) {
    ds.validate();
    require(policy.kind == ds.feature_kind, "weighted01_risk_hat: feature-map mismatch");
    double sum = 0.0;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const Observation& o = ds.observations[i];
        const VecD feat = featurize(o.x, ds.feature_kind, ds.standardization);
        const AdvantageTriplet t = advantage_triplet(o, ds.pi_plus_of(i), nu, feat);
        if (t.y != policy.decide_feat(feat)) sum += t.w;
    }
    return sum / static_cast<double>(ds.size());
}

double c_sharp_hat(const Dataset& ds, const NuisancePair& nu) {
    ds.validate();
    double sum = 0.0;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const Observation& o = ds.observations[i];
        const VecD feat = featurize(o.x, ds.feature_kind, ds.standardization);
        const double pi_plus = ds.pi_plus_of(i);
        const double g_pos = gamma_arm(o, 1, pi_plus, nu, feat);
        const double g_neg = gamma_arm(o, -1, 1.0 - pi_plus, nu, feat);
        sum += 0.5 * (g_pos + g_neg + std::abs(g_pos - g_neg));
    }
    return sum / static_cast<double>(ds.size());
}

double reduction_residual(const Observation& obs, double pi_plus, int d_x,
                          const NuisancePair& nu, const VecD& x_feat) {
    require(d_x == 1 || d_x == -1, "reduction_residual: decision must be -1 or +1");
    const double g_pos = gamma_arm(obs, 1, pi_plus, nu, x_feat);
    const double g_neg = gamma_arm(obs, -1, 1.0 - pi_plus, nu, x_feat);
    const double gamma_d = d_x == 1 ? g_pos : g_neg;
    const double w = std::abs(g_pos - g_neg);
    const int y = sign_rule(g_pos - g_neg);
    const double c_obs = 0.5 * (g_pos + g_neg + w);
    const double mismatch = y != d_x ? w : 0.0;
    return gamma_d - (c_obs - mismatch);
}

double conditional_variance_check(int arm, double p_arm, double mu_arm, double sigma2_arm,
                                  double nu_arm_value) {
    require(arm == 1 || arm == -1, "conditional_variance_check: arm must be -1 or +1");
    require(p_arm > 0.0 && p_arm <= 1.0, "conditional_variance_check: p outside (0,1]");
    require(sigma2_arm >= 0.0, "conditional_variance_check: negative variance");
    const double gap = mu_arm - nu_arm_value;
    return sigma2_arm / p_arm + (1.0 - p_arm) / p_arm * gap * gap;
}

}  // namespace prowl
