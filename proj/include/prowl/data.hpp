#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace prowl {

using VecD = std::vector<double>;

/// Decision sign convention: +1 on ties. Throws on non-finite scores.
int sign_rule(double score);

/// Feature maps shared by policies, nuisances and candidate libraries.
enum class FeatureKind {
    LinearIntercept,  ///< standardized coordinates plus trailing intercept
    Scenario2Basis,   ///< enriched clinical basis, see featurize() docs
    Identity,         ///< raw passthrough, no intercept
};

std::string to_string(FeatureKind kind);
FeatureKind feature_kind_from_string(const std::string& s);

/// Output dimension of featurize() for a raw input of dimension raw_dim.
std::size_t feature_dim(FeatureKind kind, std::size_t raw_dim);

/// Per-coordinate location/scale fitted once on the policy-learning sample.
/// Population convention (divide by n); columns with sd below 1e-12 get
/// scale 1 so degenerate simulated columns never blow up.
struct Standardization {
    VecD mean;
    VecD scale;
};

Standardization standardize_fit(const std::vector<VecD>& raw_rows);
VecD standardize_apply(const Standardization& std, const VecD& x);

/// Deterministic feature expansion of a single raw covariate vector.
///
/// Scenario2Basis takes 8 standardized coordinates z1..z8 and emits, in this
/// frozen order: main effects z1..z8, squares z1^2..z8^2, sin(z1)..sin(z4),
/// (z5)_+, (z6)_+, (z7)_+, the interactions z1z2, z3z4, z1z3, z1z4, z2z3,
/// z2z4, z4z6, z5z6, z5z7, z6z7, z4z7, z3z8, and a trailing intercept
/// (36 coordinates). All transforms act on standardized coordinates.
/// LinearIntercept emits the standardized coordinates plus intercept;
/// Identity passes the raw vector through unchanged.
VecD featurize(const VecD& x, FeatureKind kind, const Standardization& std);

/// One logged unit.
struct Observation {
    VecD x;        ///< raw covariates
    int a = 1;     ///< arm in {-1, +1}
    double r = 0;  ///< proxy reward in [0, 1]
    double u = 0;  ///< certificate magnitude in [0, 1]
    double pi_a = 1;  ///< propensity of the observed arm
};

/// A (+1, -1) pair of per-arm scalars.
struct ArmPair {
    double pos = 0.0;
    double neg = 0.0;
    double of(int arm) const { return arm > 0 ? pos : neg; }
};

/// Simulation-oracle fields attached to a logged unit.
struct OracleInfo {
    double r_star = 0.0;  ///< realized target reward of the observed arm
    ArmPair mu_star;      ///< target conditional means
    ArmPair mu_proxy;     ///< proxy conditional means
    std::optional<ArmPair> mu_lower;  ///< certified conditional means
    double pi_plus = 0.5;             ///< pi(1 | x)
};

struct Dataset {
    std::vector<Observation> observations;
    std::vector<OracleInfo> oracle;  ///< empty, or parallel to observations
    FeatureKind feature_kind = FeatureKind::Identity;
    Standardization standardization;

    std::size_t size() const { return observations.size(); }

    /// Throws std::invalid_argument on any type-invariant violation.
    void validate() const;

    /// pi(1 | x_i), recovered from the observed arm and its propensity.
    double pi_plus_of(std::size_t i) const {
        const Observation& o = observations[i];
        return o.a > 0 ? o.pi_a : 1.0 - o.pi_a;
    }
};

/// Throws if any observation has pi_a < eps (strict-overlap contract).
void check_overlap(const Dataset& ds, double eps);

/// Featurize every observation once; row i corresponds to observation i.
std::vector<VecD> featurize_all(const Dataset& ds);

/// A deployable linear rule: sign of beta . featurize(x), score clamped to
/// [-score_bound, score_bound] wherever the magnitude matters.
struct PolicyParams {
    FeatureKind kind = FeatureKind::Identity;
    Standardization standardization;
    VecD beta;
    double score_bound = 3.0;

    double score_feat(const VecD& feat) const;  ///< clamped dot product
    int decide_feat(const VecD& feat) const;    ///< sign_rule of the raw dot
    double score(const VecD& x_raw) const;
    int decide(const VecD& x_raw) const;
};

/// CSV export with header x_1..x_p,a,r,u,pi_a and, when oracle info is
/// present, r_star,mu_star_pos,mu_star_neg,mu_proxy_pos,mu_proxy_neg,
/// [mu_lower_pos,mu_lower_neg,]pi_plus.
void dataset_to_csv(const Dataset& ds, const std::string& path);

/// CSV import; standardization is refit from the imported rows.
Dataset dataset_from_csv(const std::string& path, FeatureKind kind);

/// Lossless double formatting shared by every CSV/JSON writer.
std::string format_double(double v);

}  // namespace prowl
