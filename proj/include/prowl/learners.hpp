#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "prowl/certify.hpp"
#include "prowl/data.hpp"
#include "prowl/library.hpp"
#include "prowl/pacbayes.hpp"
#include "prowl/reduction.hpp"

namespace prowl {

/// Fixed hyperparameters of the learning stack.
struct LearnerConfig {
    double ridge_penalty_nuisance = 1e-6;
    double prior_sd = 5.0;
    double score_bound = 3.0;
    int anchors = 2;              ///< Gaussian anchor particles
    int prior_particles = 32;
    int perturbations_per_anchor = 4;
    double local_scale = 0.3;
    VecD aux_penalty_grid = {1e-4, 1e-3, 1e-2, 1e-1, 1.0};
    VecD cv_penalty_grid = {1e-3, 1e-2, 1e-1, 1.0};
    int cv_folds = 5;
    /// Prior-penalty coefficient of the MAP objective; 1/(2 prior_sd^2) is
    /// the exact Gaussian-prior correspondence.
    double lambda0 = 0.02;
    bool split_free = true;

    void validate() const;
};

/// Which reward a ridge regression targets. ResidualTreatmentFree fits the
/// certified reward on all rows regardless of arm (the m_alpha variant).
enum class RidgeTarget { Certified, Proxy, ResidualTreatmentFree };

/// Closed-form ridge with per-n penalty scaling:
///   minimize (1/n) |y - F beta|^2 + penalty * sum_{j != intercept} beta_j^2.
/// Pass intercept_index = size_t(-1) to penalize every coordinate.
VecD ridge_solve(const std::vector<VecD>& feats, const VecD& y, double penalty,
                 std::size_t intercept_index);

/// Per-arm ridge on featurized covariates against the chosen reward target;
/// the feature map's intercept coordinate is unpenalized.
VecD fit_ridge_arm(const Dataset& ds, int arm, double penalty, RidgeTarget target);

/// Core weighted-hinge optimizer: deterministic full-batch subgradient
/// descent (step 0.5/sqrt(t), 500 iterations, warm start at zero, iterate
/// averaging over the last half), minimizing
///   (1/n) sum_i w_i (1 - y_i beta.f_i)_+  +  reg_coef * J(beta)
/// with J the squared norm of non-intercept coordinates. The returned beta
/// is rescaled so max_i |beta.f_i| <= score_bound.
VecD weighted_hinge_fit(const std::vector<VecD>& feats, const VecD& w, const std::vector<int>& y,
                        double reg_coef, double score_bound, std::size_t intercept_index);

/// MAP of the certified-hinge surrogate posterior at rate lambda:
/// reg_coef = lambda0 / (lambda n).
VecD hinge_map(const Dataset& ds, const NuisancePair& nu, double lambda, double lambda0,
               const LearnerConfig& cfg);

/// Finite candidate library: prior particles and
/// Gaussian anchors drawn N(0, prior_sd^2) per coordinate, hinge / residual
/// / plug-in anchors scanned over the auxiliary penalty grid, four local
/// Gaussian perturbations (scale local_scale) per anchor, uniform prior,
/// per-candidate empirical certified value and hinge loss. Deterministic
/// given (ds, cfg, seed). When no nuisance is supplied it is fitted on ds.
PosteriorLibrary build_library(const Dataset& ds, const LearnerConfig& cfg, std::uint64_t seed,
                               const std::optional<NuisancePair>& nuisance = std::nullopt);

/// How the selected posterior was produced.
enum class SelectionMode { TiedTemperature, ProductGrid, HingeFamily };

std::string to_string(SelectionMode mode);

struct FitResult {
    PosteriorLibrary library;  ///< posterior set to the selected weights
    NuisancePair nuisance;
    SelectionMode mode = SelectionMode::TiedTemperature;
    double gamma_star = 0.0;
    double eta_star = 0.0;     ///< ProductGrid only, otherwise == gamma_star
    double lambda_star = 0.0;  ///< HingeFamily only, otherwise 0
    double lcb_star = 0.0;
    long n_bound = 0;  ///< sample size entering the bounds
    std::vector<BoundReportRow> scan;
    BoundConfig bound_cfg;
    LearnerConfig learner_cfg;
    FeatureKind kind = FeatureKind::Identity;
    Standardization standardization;
};

/// Full pipeline: (optional honest split,) nuisance fit, library build,
/// temperature/family selection. With split_free off, the nuisance is fitted
/// on an arm-stratified half and the library on the other half.
FitResult prowl_fit(const Dataset& ds, const LearnerConfig& lcfg, const BoundConfig& bcfg,
                    std::uint64_t seed, SelectionMode mode = SelectionMode::TiedTemperature);

enum class DeployMode { Map, Mean, Gibbs };

/// map: highest-weight candidate (smallest index on ties); mean: posterior-
/// weighted average of candidate betas; gibbs: one candidate sampled from
/// the posterior with the given seed.
PolicyParams deploy(const FitResult& fit, DeployMode mode, std::uint64_t gibbs_seed = 0);

/// JSON document with candidates, weights, selection and config echo.
std::string fit_result_to_json(const FitResult& fit);

/// Outcome weighted learning: weighted hinge with labels A and weights
/// reward/pi, penalty chosen by cv_folds-fold CV maximizing the held-out
/// IPW value of the chosen reward field.
PolicyParams owl_fit(const Dataset& ds, const LearnerConfig& cfg, RewardField field,
                     std::uint64_t seed = 0);

/// Linear Q-learning on the stacked design [h(x), a h(x)], ridge penalty by
/// cv_folds-fold CV on squared prediction error; policy score psi.h(x).
PolicyParams qlearn_fit(const Dataset& ds, const LearnerConfig& cfg, RewardField field,
                        std::uint64_t seed = 0);

/// Residual weighted learning: treatment-free m(x) on all rows, weights
/// |reward - m|/pi, labels A sign(reward - m), penalty by CV maximizing the
/// residualized IPW value.
PolicyParams rwl_fit(const Dataset& ds, const LearnerConfig& cfg, RewardField field,
                     std::uint64_t seed = 0);

/// Copy of ds with every certificate zeroed (the U=0 ablation input).
Dataset zero_certificates(const Dataset& ds);

}  // namespace prowl
