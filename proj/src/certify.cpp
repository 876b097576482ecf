#include "prowl/certify.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace prowl {

namespace {

void require(bool cond, const char* msg) {
    if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

double lower_reward(double r, double u) {
    require(r >= 0.0 && r <= 1.0, "lower_reward: r outside [0,1]");
    require(u >= 0.0 && u <= 1.0, "lower_reward: u outside [0,1]");
    return std::max(r - u, 0.0);
}

void CompositeUtilitySpec::validate() const {
    require(!w0.empty() && w0.size() == delta.size(), "CompositeUtilitySpec: dimension mismatch");
    require(rho >= 0.0, "CompositeUtilitySpec: rho must be >= 0");
    double sum = 0.0, sum_lo = 0.0, sum_hi = 0.0;
    for (std::size_t j = 0; j < w0.size(); ++j) {
        require(w0[j] >= 0.0, "CompositeUtilitySpec: negative baseline weight");
        require(delta[j] >= 0.0, "CompositeUtilitySpec: negative tolerance");
        sum += w0[j];
        sum_lo += std::max(w0[j] - rho * delta[j], 0.0);
        sum_hi += std::min(w0[j] + rho * delta[j], 1.0);
    }
    require(std::abs(sum - 1.0) <= 1e-9, "CompositeUtilitySpec: w0 must sum to 1");
    require(sum_lo <= 1.0 + 1e-12 && sum_hi >= 1.0 - 1e-12,
            "CompositeUtilitySpec: box-simplex set is empty");
}

CompositeCertificate composite_certificate(const VecD& g, const CompositeUtilitySpec& spec) {
    spec.validate();
    require(g.size() == spec.w0.size(), "composite_certificate: dimension mismatch");
    for (double gi : g) require(gi >= 0.0 && gi <= 1.0, "composite_certificate: g outside [0,1]");

    const std::size_t k = g.size();
    VecD lo(k), hi(k);
    for (std::size_t j = 0; j < k; ++j) {
        lo[j] = std::max(spec.w0[j] - spec.rho * spec.delta[j], 0.0);
        hi[j] = std::min(spec.w0[j] + spec.rho * spec.delta[j], 1.0);
    }

    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return g[a] < g[b]; });

    // Start every weight at its lower bound, then pour the leftover mass onto
    // the smallest-g components up to their upper bounds.
    VecD w = lo;
    double remaining = 1.0 - std::accumulate(lo.begin(), lo.end(), 0.0);
    for (std::size_t j : order) {
        if (remaining <= 0.0) break;
        const double room = hi[j] - lo[j];
        const double add = std::min(room, remaining);
        w[j] += add;
        remaining -= add;
    }
    require(remaining <= 1e-9, "composite_certificate: infeasible box-simplex set");

    CompositeCertificate out;
    out.r = std::inner_product(g.begin(), g.end(), spec.w0.begin(), 0.0);
    out.under_r = std::inner_product(g.begin(), g.end(), w.begin(), 0.0);
    out.u = out.r - out.under_r;
    if (out.u < 0.0 && out.u > -1e-12) out.u = 0.0;  // kill sign noise at rho = 0
    return out;
}

double NuisancePair::predict(int arm, const VecD& feat) const {
    const VecD& coef = arm > 0 ? coef_pos : coef_neg;
    require(coef.size() == feat.size(), "NuisancePair: feature dimension mismatch");
    double s = 0.0;
    for (std::size_t j = 0; j < coef.size(); ++j) s += coef[j] * feat[j];
    return std::clamp(s, 0.0, 1.0);
}

double NuisancePair::predict_treatment_free(const VecD& feat) const {
    require(treatment_free.has_value(), "NuisancePair: no treatment-free coefficients");
    const VecD& coef = *treatment_free;
    require(coef.size() == feat.size(), "NuisancePair: feature dimension mismatch");
    double s = 0.0;
    for (std::size_t j = 0; j < coef.size(); ++j) s += coef[j] * feat[j];
    return std::clamp(s, 0.0, 1.0);
}

double gamma_arm(const Observation& obs, int arm, double pi_arm, const NuisancePair& nu,
                 const VecD& x_feat) {
    require(arm == 1 || arm == -1, "gamma_arm: arm must be -1 or +1");
    require(pi_arm > 0.0 && pi_arm <= 1.0, "gamma_arm: propensity outside (0,1]");
    const double nu_val = nu.predict(arm, x_feat);
    double g = nu_val;
    if (obs.a == arm) {
        g += (lower_reward(obs.r, obs.u) - nu_val) / pi_arm;
    }
    return g;
}

double value_hat(const Dataset& ds, const PolicyParams& policy, const NuisancePair& nu) {
    ds.validate();
    require(policy.kind == ds.feature_kind, "value_hat: feature-map mismatch");
    double sum = 0.0;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const Observation& o = ds.observations[i];
        const VecD feat = featurize(o.x, ds.feature_kind, ds.standardization);
        const int d = policy.decide_feat(feat);
        const double nu_val = nu.predict(d, feat);
        double g = nu_val;
        if (d == o.a) g += (lower_reward(o.r, o.u) - nu_val) / o.pi_a;
        sum += g;
    }
    return sum / static_cast<double>(ds.size());
}

double ipw_value_hat(const Dataset& ds, const PolicyParams& policy, RewardField field) {
    ds.validate();
    double sum = 0.0;
    for (const Observation& o : ds.observations) {
        if (policy.decide(o.x) != o.a) continue;
        const double reward = field == RewardField::Proxy ? o.r : lower_reward(o.r, o.u);
        sum += reward / o.pi_a;
    }
    return sum / static_cast<double>(ds.size());
}

}  // namespace prowl
