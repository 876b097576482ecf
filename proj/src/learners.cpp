#include "prowl/learners.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "prowl/rng.hpp"
#include "prowl/simulate.hpp"

namespace prowl {

namespace {

constexpr int kHingeIterations = 500;
constexpr double kHingeStep = 0.5;
constexpr std::size_t kNoIntercept = static_cast<std::size_t>(-1);

void require(bool cond, const char* msg) {
    if (!cond) throw std::invalid_argument(msg);
}

std::size_t intercept_index_of(FeatureKind kind, std::size_t dim) {
    // LinearIntercept and Scenario2Basis put the intercept last; Identity
    // has none.
    return kind == FeatureKind::Identity ? kNoIntercept : dim - 1;
}

double reward_of(const Observation& o, RewardField field) {
    return field == RewardField::Proxy ? o.r : lower_reward(o.r, o.u);
}

double dot(const VecD& a, const VecD& b) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) s += a[j] * b[j];
    return s;
}

}  // namespace

void LearnerConfig::validate() const {
    require(ridge_penalty_nuisance > 0.0, "LearnerConfig: nuisance penalty must be > 0");
    require(prior_sd > 0.0, "LearnerConfig: prior_sd must be > 0");
    require(score_bound > 0.0, "LearnerConfig: score_bound must be > 0");
    require(anchors >= 1 && prior_particles >= 1 && perturbations_per_anchor >= 1,
            "LearnerConfig: counts must be >= 1");
    require(local_scale > 0.0, "LearnerConfig: local_scale must be > 0");
    require(cv_folds >= 2, "LearnerConfig: cv_folds must be >= 2");
    require(lambda0 > 0.0, "LearnerConfig: lambda0 must be > 0");
    for (double t : aux_penalty_grid) require(t > 0.0, "LearnerConfig: aux grid must be positive");
    for (double t : cv_penalty_grid) require(t > 0.0, "LearnerConfig: cv grid must be positive");
    require(!aux_penalty_grid.empty() && !cv_penalty_grid.empty(),
            "LearnerConfig: grids must be nonempty");
}

std::string to_string(SelectionMode mode) {
    switch (mode) {
        case SelectionMode::TiedTemperature: return "tied-temperature";
        case SelectionMode::ProductGrid: return "product-grid";
        case SelectionMode::HingeFamily: return "hinge-family";
    }
    throw std::invalid_argument("to_string: unknown SelectionMode");
}

VecD ridge_solve(const std::vector<VecD>& feats, const VecD& y, double penalty,
                 std::size_t intercept_index) {
    require(!feats.empty() && feats.size() == y.size(), "ridge_solve: shape mismatch");
    require(penalty > 0.0, "ridge_solve: penalty must be > 0");
    const std::size_t n = feats.size();
    const std::size_t d = feats.front().size();
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(d, d);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(d);
    for (std::size_t i = 0; i < n; ++i) {
        require(feats[i].size() == d, "ridge_solve: ragged features");
        Eigen::Map<const Eigen::VectorXd> f(feats[i].data(), d);
        gram.noalias() += f * f.transpose();
        rhs.noalias() += y[i] * f;
    }
    gram /= static_cast<double>(n);
    rhs /= static_cast<double>(n);
    for (std::size_t j = 0; j < d; ++j) {
        if (j != intercept_index) gram(j, j) += penalty;
    }
    const Eigen::VectorXd beta = gram.ldlt().solve(rhs);
    return VecD(beta.data(), beta.data() + d);
}

VecD fit_ridge_arm(const Dataset& ds, int arm, double penalty, RidgeTarget target) {
    ds.validate();
    require(arm == 1 || arm == -1, "fit_ridge_arm: arm must be -1 or +1");
    std::vector<VecD> feats;
    VecD y;
    for (const Observation& o : ds.observations) {
        if (target != RidgeTarget::ResidualTreatmentFree && o.a != arm) continue;
        feats.push_back(featurize(o.x, ds.feature_kind, ds.standardization));
        y.push_back(target == RidgeTarget::Proxy ? o.r : lower_reward(o.r, o.u));
    }
    require(!feats.empty(), "fit_ridge_arm: no observations in the requested arm");
    return ridge_solve(feats, y, penalty,
                       intercept_index_of(ds.feature_kind, feats.front().size()));
}

VecD weighted_hinge_fit(const std::vector<VecD>& feats, const VecD& w, const std::vector<int>& y,
                        double reg_coef, double score_bound, std::size_t intercept_index) {
    require(!feats.empty() && feats.size() == w.size() && feats.size() == y.size(),
            "weighted_hinge_fit: shape mismatch");
    require(reg_coef >= 0.0, "weighted_hinge_fit: negative regularization");
    const std::size_t n = feats.size();
    const std::size_t d = feats.front().size();
    VecD beta(d, 0.0), avg(d, 0.0), grad(d);
    const double inv_n = 1.0 / static_cast<double>(n);
    for (int t = 1; t <= kHingeIterations; ++t) {
        std::fill(grad.begin(), grad.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            if (w[i] == 0.0) continue;
            const double margin = y[i] * dot(beta, feats[i]);
            if (margin < 1.0) {
                const double c = -inv_n * w[i] * y[i];
                for (std::size_t j = 0; j < d; ++j) grad[j] += c * feats[i][j];
            }
        }
        for (std::size_t j = 0; j < d; ++j) {
            if (j != intercept_index) grad[j] += 2.0 * reg_coef * beta[j];
        }
        const double step = kHingeStep / std::sqrt(static_cast<double>(t));
        for (std::size_t j = 0; j < d; ++j) beta[j] -= step * grad[j];
        if (t > kHingeIterations / 2) {
            for (std::size_t j = 0; j < d; ++j) avg[j] += beta[j];
        }
        if (!std::isfinite(beta[0])) throw std::runtime_error("weighted_hinge_fit: diverged");
    }
    const double denom = static_cast<double>(kHingeIterations - kHingeIterations / 2);
    for (std::size_t j = 0; j < d; ++j) avg[j] /= denom;

    double max_score = 0.0;
    for (std::size_t i = 0; i < n; ++i) max_score = std::max(max_score, std::abs(dot(avg, feats[i])));
    if (max_score > score_bound) {
        const double shrink = score_bound / max_score;
        for (double& b : avg) b *= shrink;
    }
    return avg;
}

namespace {

struct TripletSet {
    VecD w;
    std::vector<int> y;
};

TripletSet advantage_triplets(const Dataset& ds, const std::vector<VecD>& feats,
                              const NuisancePair& nu) {
    TripletSet t;
    t.w.reserve(ds.size());
    t.y.reserve(ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const AdvantageTriplet a = advantage_triplet(ds.observations[i], ds.pi_plus_of(i), nu,
                                                     feats[i]);
        t.w.push_back(a.w);
        t.y.push_back(a.y);
    }
    return t;
}

}  // namespace

VecD hinge_map(const Dataset& ds, const NuisancePair& nu, double lambda, double lambda0,
               const LearnerConfig& cfg) {
    require(lambda > 0.0 && lambda0 > 0.0, "hinge_map: rates must be > 0");
    ds.validate();
    const std::vector<VecD> feats = featurize_all(ds);
    const TripletSet t = advantage_triplets(ds, feats, nu);
    const double reg = lambda0 / (lambda * static_cast<double>(ds.size()));
    return weighted_hinge_fit(feats, t.w, t.y, reg, cfg.score_bound,
                              intercept_index_of(ds.feature_kind, feats.front().size()));
}

namespace {

NuisancePair fit_nuisance(const Dataset& ds, const LearnerConfig& cfg) {
    NuisancePair nu;
    nu.coef_pos = fit_ridge_arm(ds, 1, cfg.ridge_penalty_nuisance, RidgeTarget::Certified);
    nu.coef_neg = fit_ridge_arm(ds, -1, cfg.ridge_penalty_nuisance, RidgeTarget::Certified);
    return nu;
}

/// Per-observation pieces shared by every candidate evaluation.
struct EvalContext {
    std::vector<VecD> feats;
    VecD gamma_pos, gamma_neg;  // doubly-robust scores under the shared nuisance
    VecD w;
    std::vector<int> y;
    double score_bound = 3.0;
};

EvalContext make_eval_context(const Dataset& ds, const NuisancePair& nu, double score_bound) {
    EvalContext ctx;
    ctx.feats = featurize_all(ds);
    ctx.score_bound = score_bound;
    ctx.gamma_pos.reserve(ds.size());
    ctx.gamma_neg.reserve(ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const double pi_plus = ds.pi_plus_of(i);
        ctx.gamma_pos.push_back(gamma_arm(ds.observations[i], 1, pi_plus, nu, ctx.feats[i]));
        ctx.gamma_neg.push_back(
            gamma_arm(ds.observations[i], -1, 1.0 - pi_plus, nu, ctx.feats[i]));
        const double d = ctx.gamma_pos.back() - ctx.gamma_neg.back();
        ctx.y.push_back(sign_rule(d));
        ctx.w.push_back(std::abs(d));
    }
    return ctx;
}

void candidate_stats(const EvalContext& ctx, const VecD& beta, double* v_hat, double* hinge) {
    double v = 0.0, h = 0.0;
    const std::size_t n = ctx.feats.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double raw = dot(beta, ctx.feats[i]);
        v += raw >= 0.0 ? ctx.gamma_pos[i] : ctx.gamma_neg[i];
        const double f = std::clamp(raw, -ctx.score_bound, ctx.score_bound);
        const double margin = 1.0 - static_cast<double>(ctx.y[i]) * f;
        if (margin > 0.0) h += ctx.w[i] * margin;
    }
    *v_hat = v / static_cast<double>(n);
    *hinge = h / static_cast<double>(n);
}

VecD gaussian_vector(Rng& rng, std::size_t d, double sd) {
    VecD v(d);
    for (double& t : v) t = sd * rng.normal();
    return v;
}

}  // namespace

PosteriorLibrary build_library(const Dataset& ds, const LearnerConfig& cfg, std::uint64_t seed,
                               const std::optional<NuisancePair>& nuisance) {
    cfg.validate();
    ds.validate();
    const NuisancePair nu = nuisance.has_value() ? *nuisance : fit_nuisance(ds, cfg);
    const EvalContext ctx = make_eval_context(ds, nu, cfg.score_bound);
    const std::size_t d = ctx.feats.front().size();
    const std::size_t intercept = intercept_index_of(ds.feature_kind, d);
    const long n = static_cast<long>(ds.size());

    Rng rng(seed);
    PosteriorLibrary lib;

    for (int k = 0; k < cfg.prior_particles; ++k) {
        lib.candidates.push_back({gaussian_vector(rng, d, cfg.prior_sd), nu,
                                  Provenance::PriorParticle});
    }
    std::vector<std::size_t> anchor_ids;
    for (int k = 0; k < cfg.anchors; ++k) {
        anchor_ids.push_back(lib.candidates.size());
        lib.candidates.push_back({gaussian_vector(rng, d, cfg.prior_sd), nu,
                                  Provenance::PriorParticle});
    }

    for (double lambda : cfg.aux_penalty_grid) {
        const double reg = cfg.lambda0 / (lambda * static_cast<double>(n));
        anchor_ids.push_back(lib.candidates.size());
        lib.candidates.push_back({weighted_hinge_fit(ctx.feats, ctx.w, ctx.y, reg,
                                                     cfg.score_bound, intercept),
                                  nu, Provenance::AnchorHinge});
    }

    {
        // Treatment-free residualized family (the RWL form on the certified
        // reward), scanned over the same auxiliary grid.
        VecD m_coef = fit_ridge_arm(ds, 1, cfg.ridge_penalty_nuisance,
                                    RidgeTarget::ResidualTreatmentFree);
        NuisancePair m_pair;
        m_pair.treatment_free = m_coef;
        VecD w_res(ds.size());
        std::vector<int> y_res(ds.size());
        for (std::size_t i = 0; i < ds.size(); ++i) {
            const Observation& o = ds.observations[i];
            const double m = m_pair.predict_treatment_free(ctx.feats[i]);
            const double res = lower_reward(o.r, o.u) - m;
            w_res[i] = std::abs(res) / o.pi_a;
            y_res[i] = o.a * sign_rule(res);
        }
        for (double lambda : cfg.aux_penalty_grid) {
            const double reg = cfg.lambda0 / (lambda * static_cast<double>(n));
            anchor_ids.push_back(lib.candidates.size());
            lib.candidates.push_back({weighted_hinge_fit(ctx.feats, w_res, y_res, reg,
                                                         cfg.score_bound, intercept),
                                      nu, Provenance::AnchorResidual});
        }
    }

    {
        // Plug-in Q-learning family on the stacked design [h(x), a h(x)].
        std::vector<VecD> stacked(ds.size());
        VecD y_q(ds.size());
        for (std::size_t i = 0; i < ds.size(); ++i) {
            const VecD& f = ctx.feats[i];
            VecD row(2 * d);
            std::copy(f.begin(), f.end(), row.begin());
            const double a = static_cast<double>(ds.observations[i].a);
            for (std::size_t j = 0; j < d; ++j) row[d + j] = a * f[j];
            stacked[i] = std::move(row);
            y_q[i] = lower_reward(ds.observations[i].r, ds.observations[i].u);
        }
        for (double lambda : cfg.aux_penalty_grid) {
            const VecD full = ridge_solve(stacked, y_q, lambda, intercept);
            anchor_ids.push_back(lib.candidates.size());
            lib.candidates.push_back({VecD(full.begin() + d, full.end()), nu,
                                      Provenance::AnchorPlugin});
        }
    }

    for (std::size_t id : anchor_ids) {
        // Perturbations live around the score-normalized anchor: anchor
        // families differ in coefficient magnitude by orders of magnitude
        // (plug-in ridge vs score-bounded hinge), and the fixed local scale
        // is only local relative to a common score scale.
        VecD base = lib.candidates[id].beta;
        double max_score = 0.0;
        for (const VecD& f : ctx.feats) max_score = std::max(max_score, std::abs(dot(base, f)));
        if (max_score > 0.0) {
            const double rescale = cfg.score_bound / max_score;
            for (double& b : base) b *= rescale;
        }
        for (int k = 0; k < cfg.perturbations_per_anchor; ++k) {
            VecD beta = base;
            for (std::size_t j = 0; j < d; ++j) beta[j] += cfg.local_scale * rng.normal();
            lib.candidates.push_back({std::move(beta), nu, Provenance::Perturbation});
        }
    }

    const double uniform = 1.0 / static_cast<double>(lib.candidates.size());
    lib.prior.assign(lib.candidates.size(), uniform);
    lib.v_hat.resize(lib.candidates.size());
    lib.hinge_loss.resize(lib.candidates.size());
    for (std::size_t i = 0; i < lib.candidates.size(); ++i) {
        candidate_stats(ctx, lib.candidates[i].beta, &lib.v_hat[i], &lib.hinge_loss[i]);
    }
    return lib;
}

namespace {

Dataset subset_dataset(const Dataset& ds, const std::vector<std::size_t>& ids) {
    Dataset out;
    out.feature_kind = ds.feature_kind;
    out.standardization = ds.standardization;  // fitted once on the full sample
    for (std::size_t i : ids) {
        out.observations.push_back(ds.observations[i]);
        if (!ds.oracle.empty()) out.oracle.push_back(ds.oracle[i]);
    }
    return out;
}

/// Arm-stratified half split; first half feeds the nuisance fit.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> stratified_half_split(
    const Dataset& ds, std::uint64_t seed) {
    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        (ds.observations[i].a > 0 ? pos : neg).push_back(i);
    }
    Rng rng(seed);
    auto shuffle = [&rng](std::vector<std::size_t>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(rng.uniform() * static_cast<double>(i));
            std::swap(v[i - 1], v[std::min(j, i - 1)]);
        }
    };
    shuffle(pos);
    shuffle(neg);
    std::vector<std::size_t> first, second;
    for (std::size_t k = 0; k < pos.size(); ++k) (k < pos.size() / 2 ? first : second).push_back(pos[k]);
    for (std::size_t k = 0; k < neg.size(); ++k) (k < neg.size() / 2 ? first : second).push_back(neg[k]);
    std::sort(first.begin(), first.end());
    std::sort(second.begin(), second.end());
    return {first, second};
}

}  // namespace

FitResult prowl_fit(const Dataset& ds, const LearnerConfig& lcfg, const BoundConfig& bcfg,
                    std::uint64_t seed, SelectionMode mode) {
    lcfg.validate();
    bcfg.validate();
    ds.validate();
    check_overlap(ds, bcfg.epsilon);

    FitResult fit;
    fit.mode = mode;
    fit.bound_cfg = bcfg;
    fit.learner_cfg = lcfg;
    fit.kind = ds.feature_kind;
    fit.standardization = ds.standardization;

    if (lcfg.split_free) {
        fit.nuisance = fit_nuisance(ds, lcfg);
        fit.library = build_library(ds, lcfg, seed, fit.nuisance);
        fit.n_bound = static_cast<long>(ds.size());
    } else {
        const auto [nuisance_ids, policy_ids] = stratified_half_split(ds, derive_seed(seed, 3));
        require(!nuisance_ids.empty() && !policy_ids.empty(),
                "prowl_fit: split produced an empty half");
        const Dataset nuisance_half = subset_dataset(ds, nuisance_ids);
        const Dataset policy_half = subset_dataset(ds, policy_ids);
        fit.nuisance = fit_nuisance(nuisance_half, lcfg);
        fit.library = build_library(policy_half, lcfg, seed, fit.nuisance);
        fit.n_bound = static_cast<long>(policy_half.size());
    }

    switch (mode) {
        case SelectionMode::TiedTemperature: {
            const TemperatureSelection sel =
                select_temperature(fit.library, bcfg, fit.n_bound, &fit.scan);
            fit.gamma_star = sel.gamma_star;
            fit.eta_star = sel.gamma_star;
            fit.lcb_star = sel.lcb_star;
            fit.library.posterior = sel.posterior;
            break;
        }
        case SelectionMode::ProductGrid: {
            const ProductSelection sel =
                select_temperature_product(fit.library, bcfg, fit.n_bound, &fit.scan);
            fit.gamma_star = sel.gamma_star;
            fit.eta_star = sel.eta_star;
            fit.lcb_star = sel.lcb_star;
            fit.library.posterior = sel.posterior;
            break;
        }
        case SelectionMode::HingeFamily: {
            const FamilySelection sel = select_family(fit.library, bcfg, fit.n_bound, &fit.scan);
            fit.gamma_star = sel.gamma_star;
            fit.lambda_star = sel.lambda_star;
            fit.lcb_star = sel.lcb_star;
            fit.library.posterior = sel.posterior;
            break;
        }
    }
    return fit;
}

PolicyParams deploy(const FitResult& fit, DeployMode mode, std::uint64_t gibbs_seed) {
    const PosteriorLibrary& lib = fit.library;
    require(lib.posterior.size() == lib.size() && lib.size() > 0, "deploy: posterior not set");

    PolicyParams policy;
    policy.kind = fit.kind;
    policy.standardization = fit.standardization;
    policy.score_bound = fit.learner_cfg.score_bound;

    switch (mode) {
        case DeployMode::Map: {
            std::size_t best = 0;
            for (std::size_t i = 1; i < lib.size(); ++i) {
                if (lib.posterior[i] > lib.posterior[best]) best = i;
            }
            policy.beta = lib.candidates[best].beta;
            break;
        }
        case DeployMode::Mean: {
            policy.beta.assign(lib.candidates.front().beta.size(), 0.0);
            for (std::size_t i = 0; i < lib.size(); ++i) {
                for (std::size_t j = 0; j < policy.beta.size(); ++j) {
                    policy.beta[j] += lib.posterior[i] * lib.candidates[i].beta[j];
                }
            }
            break;
        }
        case DeployMode::Gibbs: {
            Rng rng(gibbs_seed);
            const double u = rng.uniform();
            double acc = 0.0;
            std::size_t pick = lib.size() - 1;
            for (std::size_t i = 0; i < lib.size(); ++i) {
                acc += lib.posterior[i];
                if (u < acc) {
                    pick = i;
                    break;
                }
            }
            policy.beta = lib.candidates[pick].beta;
            break;
        }
    }
    return policy;
}

namespace {

struct CvFolds {
    std::vector<int> fold_of;
    int folds;
};

CvFolds make_folds(std::size_t n, int folds, std::uint64_t seed) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    for (std::size_t i = n; i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng.uniform() * static_cast<double>(i));
        std::swap(order[i - 1], order[std::min(j, i - 1)]);
    }
    CvFolds cv;
    cv.folds = folds;
    cv.fold_of.resize(n);
    for (std::size_t k = 0; k < n; ++k) cv.fold_of[order[k]] = static_cast<int>(k % folds);
    return cv;
}

}  // namespace

PolicyParams owl_fit(const Dataset& ds, const LearnerConfig& cfg, RewardField field,
                     std::uint64_t seed) {
    cfg.validate();
    ds.validate();
    const std::vector<VecD> feats = featurize_all(ds);
    const std::size_t n = ds.size();
    const std::size_t intercept = intercept_index_of(ds.feature_kind, feats.front().size());

    VecD w(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Observation& o = ds.observations[i];
        w[i] = reward_of(o, field) / o.pi_a;
        y[i] = o.a;
    }

    const CvFolds cv = make_folds(n, cfg.cv_folds, seed);
    double best_value = -std::numeric_limits<double>::infinity();
    double best_penalty = cfg.cv_penalty_grid.front();
    for (double penalty : cfg.cv_penalty_grid) {
        double value = 0.0;
        for (int fold = 0; fold < cv.folds; ++fold) {
            std::vector<VecD> tr_f;
            VecD tr_w;
            std::vector<int> tr_y;
            for (std::size_t i = 0; i < n; ++i) {
                if (cv.fold_of[i] == fold) continue;
                tr_f.push_back(feats[i]);
                tr_w.push_back(w[i]);
                tr_y.push_back(y[i]);
            }
            if (tr_f.empty()) continue;
            const VecD beta =
                weighted_hinge_fit(tr_f, tr_w, tr_y, penalty, cfg.score_bound, intercept);
            for (std::size_t i = 0; i < n; ++i) {
                if (cv.fold_of[i] != fold) continue;
                const Observation& o = ds.observations[i];
                if (sign_rule(dot(beta, feats[i])) == o.a) value += reward_of(o, field) / o.pi_a;
            }
        }
        if (value > best_value + 1e-12) {
            best_value = value;
            best_penalty = penalty;
        }
    }

    PolicyParams policy;
    policy.kind = ds.feature_kind;
    policy.standardization = ds.standardization;
    policy.score_bound = cfg.score_bound;
    policy.beta = weighted_hinge_fit(feats, w, y, best_penalty, cfg.score_bound, intercept);
    return policy;
}

PolicyParams qlearn_fit(const Dataset& ds, const LearnerConfig& cfg, RewardField field,
                        std::uint64_t seed) {
    cfg.validate();
    ds.validate();
    const std::vector<VecD> feats = featurize_all(ds);
    const std::size_t n = ds.size();
    const std::size_t d = feats.front().size();
    const std::size_t intercept = intercept_index_of(ds.feature_kind, d);

    std::vector<VecD> stacked(n);
    VecD y(n);
    for (std::size_t i = 0; i < n; ++i) {
        VecD row(2 * d);
        std::copy(feats[i].begin(), feats[i].end(), row.begin());
        const double a = static_cast<double>(ds.observations[i].a);
        for (std::size_t j = 0; j < d; ++j) row[d + j] = a * feats[i][j];
        stacked[i] = std::move(row);
        y[i] = reward_of(ds.observations[i], field);
    }

    const CvFolds cv = make_folds(n, cfg.cv_folds, seed);
    double best_err = std::numeric_limits<double>::infinity();
    double best_penalty = cfg.cv_penalty_grid.front();
    for (double penalty : cfg.cv_penalty_grid) {
        double err = 0.0;
        for (int fold = 0; fold < cv.folds; ++fold) {
            std::vector<VecD> tr_f;
            VecD tr_y;
            for (std::size_t i = 0; i < n; ++i) {
                if (cv.fold_of[i] == fold) continue;
                tr_f.push_back(stacked[i]);
                tr_y.push_back(y[i]);
            }
            if (tr_f.empty()) continue;
            const VecD beta = ridge_solve(tr_f, tr_y, penalty, intercept);
            for (std::size_t i = 0; i < n; ++i) {
                if (cv.fold_of[i] != fold) continue;
                const double resid = y[i] - dot(beta, stacked[i]);
                err += resid * resid;
            }
        }
        if (err < best_err - 1e-12) {
            best_err = err;
            best_penalty = penalty;
        }
    }

    const VecD full = ridge_solve(stacked, y, best_penalty, intercept);
    PolicyParams policy;
    policy.kind = ds.feature_kind;
    policy.standardization = ds.standardization;
    policy.score_bound = cfg.score_bound;
    policy.beta.assign(full.begin() + d, full.end());
    return policy;
}

PolicyParams rwl_fit(const Dataset& ds, const LearnerConfig& cfg, RewardField field,
                     std::uint64_t seed) {
    cfg.validate();
    ds.validate();
    const std::vector<VecD> feats = featurize_all(ds);
    const std::size_t n = ds.size();
    const std::size_t intercept = intercept_index_of(ds.feature_kind, feats.front().size());

    // Treatment-free residual model on all rows at the fixed nuisance penalty.
    std::vector<VecD> all_feats = feats;
    VecD all_y(n);
    for (std::size_t i = 0; i < n; ++i) all_y[i] = reward_of(ds.observations[i], field);
    const VecD m_coef = ridge_solve(all_feats, all_y, cfg.ridge_penalty_nuisance, intercept);

    VecD m_val(n), w(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        m_val[i] = std::clamp(dot(m_coef, feats[i]), 0.0, 1.0);
        const Observation& o = ds.observations[i];
        const double res = reward_of(o, field) - m_val[i];
        w[i] = std::abs(res) / o.pi_a;
        y[i] = o.a * sign_rule(res);
    }

    const CvFolds cv = make_folds(n, cfg.cv_folds, seed);
    double best_value = -std::numeric_limits<double>::infinity();
    double best_penalty = cfg.cv_penalty_grid.front();
    for (double penalty : cfg.cv_penalty_grid) {
        double value = 0.0;
        for (int fold = 0; fold < cv.folds; ++fold) {
            std::vector<VecD> tr_f;
            VecD tr_w;
            std::vector<int> tr_y;
            for (std::size_t i = 0; i < n; ++i) {
                if (cv.fold_of[i] == fold) continue;
                tr_f.push_back(feats[i]);
                tr_w.push_back(w[i]);
                tr_y.push_back(y[i]);
            }
            if (tr_f.empty()) continue;
            const VecD beta =
                weighted_hinge_fit(tr_f, tr_w, tr_y, penalty, cfg.score_bound, intercept);
            for (std::size_t i = 0; i < n; ++i) {
                if (cv.fold_of[i] != fold) continue;
                const Observation& o = ds.observations[i];
                // residualized IPW value: (r - m) 1{a = d} / pi + m
                if (sign_rule(dot(beta, feats[i])) == o.a) {
                    value += (reward_of(o, field) - m_val[i]) / o.pi_a;
                }
                value += m_val[i];
            }
        }
        if (value > best_value + 1e-12) {
            best_value = value;
            best_penalty = penalty;
        }
    }

    PolicyParams policy;
    policy.kind = ds.feature_kind;
    policy.standardization = ds.standardization;
    policy.score_bound = cfg.score_bound;
    policy.beta = weighted_hinge_fit(feats, w, y, best_penalty, cfg.score_bound, intercept);
    return policy;
}

Dataset zero_certificates(const Dataset& ds) {
    Dataset out = ds;
    for (Observation& o : out.observations) o.u = 0.0;
    return out;
}

namespace {

nlohmann::json vec_json(const VecD& v) { return nlohmann::json(v); }

}  // namespace

std::string fit_result_to_json(const FitResult& fit) {
    nlohmann::json j;
    j["selection"] = {
        {"mode", to_string(fit.mode)},
        {"gamma", fit.gamma_star},
        {"eta", fit.eta_star},
        {"lambda", fit.lambda_star},
        {"lcb", fit.lcb_star},
        {"n", fit.n_bound},
    };
    j["bound_config"] = {
        {"epsilon", fit.bound_cfg.epsilon},
        {"delta", fit.bound_cfg.delta},
        {"eta_grid", vec_json(fit.bound_cfg.eta_grid)},
        {"gamma_grid", vec_json(fit.bound_cfg.gamma_grid)},
        {"lambda_grid", vec_json(fit.bound_cfg.lambda_grid)},
    };
    j["learner_config"] = {
        {"ridge_penalty_nuisance", fit.learner_cfg.ridge_penalty_nuisance},
        {"prior_sd", fit.learner_cfg.prior_sd},
        {"score_bound", fit.learner_cfg.score_bound},
        {"anchors", fit.learner_cfg.anchors},
        {"prior_particles", fit.learner_cfg.prior_particles},
        {"perturbations_per_anchor", fit.learner_cfg.perturbations_per_anchor},
        {"local_scale", fit.learner_cfg.local_scale},
        {"aux_penalty_grid", vec_json(fit.learner_cfg.aux_penalty_grid)},
        {"cv_penalty_grid", vec_json(fit.learner_cfg.cv_penalty_grid)},
        {"cv_folds", fit.learner_cfg.cv_folds},
        {"lambda0", fit.learner_cfg.lambda0},
        {"split_free", fit.learner_cfg.split_free},
    };
    j["feature_kind"] = to_string(fit.kind);
    j["standardization"] = {{"mean", vec_json(fit.standardization.mean)},
                            {"scale", vec_json(fit.standardization.scale)}};
    j["prior"] = vec_json(fit.library.prior);
    j["posterior"] = vec_json(fit.library.posterior);
    j["v_hat"] = vec_json(fit.library.v_hat);
    j["hinge_loss"] = vec_json(fit.library.hinge_loss);
    j["metadata"] = {
        {"prior_weights", "uniform"},
        {"library_size", fit.library.size()},
        // The candidate library contains data-dependent anchors, so the
        // reported certificates are conditional on the realized library.
        {"bound_scope", "library-conditional"},
        {"mean_rule", "posterior-averaged beta"},
    };
    nlohmann::json cands = nlohmann::json::array();
    for (const Candidate& c : fit.library.candidates) {
        nlohmann::json jc;
        jc["beta"] = vec_json(c.beta);
        jc["provenance"] = to_string(c.provenance);
        jc["nuisance"] = {{"coef_pos", vec_json(c.nuisance.coef_pos)},
                          {"coef_neg", vec_json(c.nuisance.coef_neg)}};
        if (c.nuisance.treatment_free.has_value()) {
            jc["nuisance"]["treatment_free"] = vec_json(*c.nuisance.treatment_free);
        }
        cands.push_back(std::move(jc));
    }
    j["candidates"] = std::move(cands);
    return j.dump(2);
}

}  // namespace prowl
