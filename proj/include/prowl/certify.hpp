#pragma once

#include <optional>

#include "prowl/data.hpp"

namespace prowl {

/// Certified lower reward (r - u)_+ for r, u in [0, 1].
double lower_reward(double r, double u);

/// Preference-uncertainty box around a baseline simplex weight vector.
struct CompositeUtilitySpec {
    VecD w0;     ///< baseline weights on the probability simplex
    VecD delta;  ///< per-component tolerances, nonnegative
    double rho = 1.0;

    void validate() const;  ///< throws on simplex/box violations or infeasibility
};

struct CompositeCertificate {
    double r;        ///< nominal reward w0 . g
    double under_r;  ///< exact minimum of w . g over the box-simplex set
    double u;        ///< r - under_r
};

/// Exact greedy solution of min_w w.g over {w in simplex : |w - w0| <= rho*delta}.
/// Components of g are filled to their upper box bound in ascending-g order
/// until the remaining mass forces lower bounds; exact because the objective
/// is linear over a box-simplex polytope.
CompositeCertificate composite_certificate(const VecD& g, const CompositeUtilitySpec& spec);

/// Per-arm nuisance regressions over the feature map. Predictions are
/// clipped to [0, 1] before use.
struct NuisancePair {
    VecD coef_pos;
    VecD coef_neg;
    std::optional<VecD> treatment_free;

    double predict(int arm, const VecD& feat) const;
    double predict_treatment_free(const VecD& feat) const;
};

/// Doubly-robust certified score for one arm:
///   nu_arm(x) + 1{a = arm} / pi_arm * ((r - u)_+ - nu_arm(x)).
double gamma_arm(const Observation& obs, int arm, double pi_arm, const NuisancePair& nu,
                 const VecD& x_feat);

enum class RewardField { Proxy, Certified };

/// Empirical certified value: mean over observations of gamma_arm at the
/// policy-chosen arm.
double value_hat(const Dataset& ds, const PolicyParams& policy, const NuisancePair& nu);

/// Plain inverse-propensity value: mean of reward * 1{a = d(x)} / pi_a.
double ipw_value_hat(const Dataset& ds, const PolicyParams& policy, RewardField field);

}  // namespace prowl
