#pragma once

#include <string>
#include <vector>

#include "prowl/certify.hpp"
#include "prowl/data.hpp"

namespace prowl {

/// Where a library candidate came from. The two Gaussian anchor particles
/// are prior draws and carry the prior-particle tag.
enum class Provenance {
    PriorParticle,
    AnchorHinge,
    AnchorResidual,
    AnchorPlugin,
    Perturbation,
};

std::string to_string(Provenance p);

/// One joint parameter theta = (beta, alpha) in the finite library.
struct Candidate {
    VecD beta;
    NuisancePair nuisance;
    Provenance provenance = Provenance::PriorParticle;
};

/// Finite candidate library with prior/posterior weights and the two
/// per-candidate empirical statistics every selection rule needs.
struct PosteriorLibrary {
    std::vector<Candidate> candidates;
    VecD prior;       ///< sums to 1
    VecD posterior;   ///< sums to 1, support within prior support
    VecD v_hat;       ///< empirical certified value per candidate
    VecD hinge_loss;  ///< empirical certified hinge loss per candidate

    std::size_t size() const { return candidates.size(); }
    void validate() const;  ///< throws on weight-vector violations
};

}  // namespace prowl
