#pragma once

#include <string>
#include <vector>

#include "prowl/data.hpp"
#include "prowl/library.hpp"

namespace prowl {

/// Constants and grids for all PAC-Bayes bound arithmetic.
struct BoundConfig {
    double epsilon = 0.5;  ///< overlap floor in (0, 0.5]
    double delta = 0.1;    ///< confidence tolerance in (0, 1)
    VecD eta_grid;         ///< learning-rate grid, default {1/8,...,8}
    VecD gamma_grid;       ///< temperature grid, default {1/8,...,8}
    VecD lambda_grid;      ///< hinge-posterior grid, default {1/8,...,8}

    BoundConfig();
    double c_eps() const { return 1.0 / epsilon; }
    double k_eps() const { return 2.0 / epsilon - 1.0; }
    void validate() const;
};

/// {1/8, 1/4, 1/2, 1, 2, 4, 8}
VecD default_temperature_grid();

/// Moment bound xi(n) = exp(1/(12n)) sqrt(pi n / 2) + 2; increasing in n.
double xi(long n);

/// kl(p || q) between Bernoulli means, 0 log 0 = 0. Throws when q is on the
/// boundary with p != q (the divergence would be infinite).
double bernoulli_kl(double p, double q);

/// Certified value loss (c_eps - gamma_value) / k_eps in [0, 1].
double value_loss(double gamma_value, const BoundConfig& cfg);

/// KL(q || p) for discrete weight vectors; support(q) must lie in support(p).
double discrete_kl(const VecD& q, const VecD& p);

/// Gibbs posterior at learning rate eta over the library's empirical values:
/// posterior_i proportional to prior_i * exp(eta n v_hat_i / k_eps),
/// computed with a max shift so exponents never overflow.
VecD gibbs_posterior(const PosteriorLibrary& lib, double eta, long n, const BoundConfig& cfg);

/// Hinge-surrogate posterior at rate lambda:
/// posterior_i proportional to prior_i * exp(-lambda n hinge_loss_i).
VecD hinge_posterior(const PosteriorLibrary& lib, double lambda, long n);

/// Fixed-eta PAC-Bayes lower bound at the library's current posterior:
/// E_Q[v_hat] - k_eps * { (KL(Q||prior) + log(1/delta)) / (eta n) + eta/8 }.
double fixed_eta_bound(const PosteriorLibrary& lib, double eta, long n, const BoundConfig& cfg);

/// Catoni-form lower confidence bound on the target value. May be negative
/// (vacuous but valid); never clamped.
double catoni_lcb(double kl_term, double l_hat, long n, double gamma, const BoundConfig& cfg);

/// One row of the serialized bound report.
struct BoundReportRow {
    long n = 0;
    double epsilon = 0, delta = 0, gamma = 0, kl = 0, l_hat = 0, xi_n = 0, lcb = 0;
    double lambda = 0;  ///< 0 when the row comes from the value family
};

void bound_report_to_csv(const std::vector<BoundReportRow>& rows, const std::string& path);

struct TemperatureSelection {
    double gamma_star = 0.0;
    double lcb_star = 0.0;
    VecD posterior;
};

/// For each gamma in the grid, build the Gibbs posterior at eta = gamma and
/// evaluate its LCB at scale gamma; return the argmax (ties toward smaller
/// gamma). Appends one report row per grid point when scan is non-null.
TemperatureSelection select_temperature(const PosteriorLibrary& lib, const BoundConfig& cfg,
                                        long n, std::vector<BoundReportRow>* scan = nullptr);

struct ProductSelection {
    double eta_star = 0.0;
    double gamma_star = 0.0;
    double lcb_star = 0.0;
    VecD posterior;
};

/// Joint argmax of LCB(Q_eta; gamma) over the independent eta x gamma grid,
/// ties toward smaller (eta, gamma) lexicographically.
ProductSelection select_temperature_product(const PosteriorLibrary& lib, const BoundConfig& cfg,
                                            long n, std::vector<BoundReportRow>* scan = nullptr);

struct FamilySelection {
    double lambda_star = 0.0;
    double gamma_star = 0.0;
    double lcb_star = 0.0;
    VecD posterior;
};

/// Joint argmax of LCB(Q_lambda; gamma) over the hinge-posterior family,
/// ties toward smaller (lambda, gamma) lexicographically.
FamilySelection select_family(const PosteriorLibrary& lib, const BoundConfig& cfg, long n,
                              std::vector<BoundReportRow>* scan = nullptr);

/// Joint confidence (1 - alpha_cert)(1 - delta) for learned certificates.
double combine_confidence(double alpha_cert, double delta);

}  // namespace prowl
