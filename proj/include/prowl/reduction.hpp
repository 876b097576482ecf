#pragma once

#include "prowl/certify.hpp"
#include "prowl/data.hpp"

namespace prowl {

/// Certified advantage D, pseudo-label Y = sign_rule(D), weight W = |D|.
struct AdvantageTriplet {
    double d_val = 0.0;
    int y = 1;
    double w = 0.0;
};

/// D = Gamma_{+1} - Gamma_{-1} for one observation; pi_plus = pi(1|x).
AdvantageTriplet advantage_triplet(const Observation& obs, double pi_plus,
                                   const NuisancePair& nu, const VecD& x_feat);

/// Empirical weighted 0-1 risk: mean of W * 1{Y != d(x)}.
double weighted01_risk_hat(const Dataset& ds, const PolicyParams& policy,
                           const NuisancePair& nu);

/// Empirical mean of (Gamma_{+1} + Gamma_{-1} + W) / 2; policy-free.
double c_sharp_hat(const Dataset& ds, const NuisancePair& nu);

/// Gamma_d - (C_obs - W * 1{Y != d}) for one observation and decision d_x.
/// The exact reduction makes this zero; callers assert |residual| <= 1e-12.
double reduction_residual(const Observation& obs, double pi_plus, int d_x,
                          const NuisancePair& nu, const VecD& x_feat);

/// Closed-form conditional variance of Gamma_arm given X = x:
///   sigma^2 / p  +  (1 - p) / p * (mu - nu)^2.
/// Diagnostic only; minimized at nu = mu.
double conditional_variance_check(int arm, double p_arm, double mu_arm, double sigma2_arm,
                                  double nu_arm_value);

}  // namespace prowl
