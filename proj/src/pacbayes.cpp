#include "prowl/pacbayes.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace prowl {

namespace {

constexpr double kPi = 3.14159265358979323846;

void require(bool cond, const char* msg) {
    if (!cond) throw std::invalid_argument(msg);
}

void require_grid(const VecD& g, const char* msg) {
    require(!g.empty(), msg);
    double prev = 0.0;
    for (double t : g) {
        require(t > 0.0 && t > prev, msg);
        prev = t;
    }
}

}  // namespace

std::string to_string(Provenance p) {
    switch (p) {
        case Provenance::PriorParticle: return "prior-particle";
        case Provenance::AnchorHinge: return "anchor-hinge";
        case Provenance::AnchorResidual: return "anchor-residual";
        case Provenance::AnchorPlugin: return "anchor-plugin";
        case Provenance::Perturbation: return "perturbation";
    }
    throw std::invalid_argument("to_string: unknown Provenance");
}

void PosteriorLibrary::validate() const {
    require(!candidates.empty(), "PosteriorLibrary: empty");
    require(prior.size() == candidates.size(), "PosteriorLibrary: prior length mismatch");
    double sp = 0.0;
    for (double w : prior) {
        require(w >= 0.0, "PosteriorLibrary: negative prior weight");
        sp += w;
    }
    require(std::abs(sp - 1.0) <= 1e-12, "PosteriorLibrary: prior does not sum to 1");
    if (!posterior.empty()) {
        require(posterior.size() == candidates.size(), "PosteriorLibrary: posterior length mismatch");
        double sq = 0.0;
        for (std::size_t i = 0; i < posterior.size(); ++i) {
            require(posterior[i] >= 0.0, "PosteriorLibrary: negative posterior weight");
            require(posterior[i] == 0.0 || prior[i] > 0.0,
                    "PosteriorLibrary: posterior support outside prior support");
            sq += posterior[i];
        }
        require(std::abs(sq - 1.0) <= 1e-12, "PosteriorLibrary: posterior does not sum to 1");
    }
}

VecD default_temperature_grid() { return {0.125, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0}; }

BoundConfig::BoundConfig()
    : eta_grid(default_temperature_grid()),
      gamma_grid(default_temperature_grid()),
      lambda_grid(default_temperature_grid()) {}

void BoundConfig::validate() const {
    require(epsilon > 0.0 && epsilon <= 0.5, "BoundConfig: epsilon outside (0, 0.5]");
    require(delta > 0.0 && delta < 1.0, "BoundConfig: delta outside (0, 1)");
    require_grid(eta_grid, "BoundConfig: eta grid must be nonempty, positive, ascending");
    require_grid(gamma_grid, "BoundConfig: gamma grid must be nonempty, positive, ascending");
    require_grid(lambda_grid, "BoundConfig: lambda grid must be nonempty, positive, ascending");
}

double xi(long n) {
    require(n >= 1, "xi: n must be >= 1");
    const double nd = static_cast<double>(n);
    return std::exp(1.0 / (12.0 * nd)) * std::sqrt(kPi * nd / 2.0) + 2.0;
}

double bernoulli_kl(double p, double q) {
    require(p >= 0.0 && p <= 1.0, "bernoulli_kl: p outside [0,1]");
    if (q <= 0.0 || q >= 1.0) {
        if (p == q) return 0.0;
        throw std::invalid_argument("bernoulli_kl: boundary q with p != q is infinite");
    }
    double t = 0.0;
    if (p > 0.0) t += p * std::log(p / q);
    if (p < 1.0) t += (1.0 - p) * std::log((1.0 - p) / (1.0 - q));
    return std::max(t, 0.0);
}

double value_loss(double gamma_value, const BoundConfig& cfg) {
    const double lo = 1.0 - cfg.c_eps();
    const double hi = cfg.c_eps();
    require(gamma_value >= lo - 1e-12 && gamma_value <= hi + 1e-12,
            "value_loss: gamma outside [1 - 1/eps, 1/eps]");
    return (cfg.c_eps() - gamma_value) / cfg.k_eps();
}

double discrete_kl(const VecD& q, const VecD& p) {
    require(q.size() == p.size(), "discrete_kl: length mismatch");
    double t = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) {
        if (q[i] == 0.0) continue;
        require(q[i] > 0.0, "discrete_kl: negative weight");
        if (p[i] <= 0.0) throw std::invalid_argument("discrete_kl: support violation");
        t += q[i] * std::log(q[i] / p[i]);
    }
    return std::max(t, 0.0);
}

namespace {

/// prior-weighted exponential tilt exp(score_i), max-shifted.
VecD tilt(const VecD& prior, const VecD& score) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < prior.size(); ++i) {
        if (prior[i] > 0.0) best = std::max(best, score[i]);
    }
    if (!std::isfinite(best)) throw std::invalid_argument("tilt: all prior mass zero");
    VecD w(prior.size(), 0.0);
    double z = 0.0;
    for (std::size_t i = 0; i < prior.size(); ++i) {
        if (prior[i] <= 0.0) continue;
        w[i] = prior[i] * std::exp(score[i] - best);
        z += w[i];
    }
    for (double& t : w) t /= z;
    return w;
}

}  // namespace

VecD gibbs_posterior(const PosteriorLibrary& lib, double eta, long n, const BoundConfig& cfg) {
    require(eta > 0.0, "gibbs_posterior: eta must be > 0");
    require(lib.v_hat.size() == lib.size(), "gibbs_posterior: v_hat not populated");
    VecD score(lib.size());
    const double c = eta * static_cast<double>(n) / cfg.k_eps();
    for (std::size_t i = 0; i < lib.size(); ++i) score[i] = c * lib.v_hat[i];
    return tilt(lib.prior, score);
}

VecD hinge_posterior(const PosteriorLibrary& lib, double lambda, long n) {
    require(lambda > 0.0, "hinge_posterior: lambda must be > 0");
    require(lib.hinge_loss.size() == lib.size(), "hinge_posterior: hinge loss not populated");
    VecD score(lib.size());
    const double c = -lambda * static_cast<double>(n);
    for (std::size_t i = 0; i < lib.size(); ++i) score[i] = c * lib.hinge_loss[i];
    return tilt(lib.prior, score);
}

double fixed_eta_bound(const PosteriorLibrary& lib, double eta, long n, const BoundConfig& cfg) {
    require(eta > 0.0, "fixed_eta_bound: eta must be > 0");
    require(lib.posterior.size() == lib.size(), "fixed_eta_bound: posterior not set");
    double v_q = 0.0;
    for (std::size_t i = 0; i < lib.size(); ++i) v_q += lib.posterior[i] * lib.v_hat[i];
    const double kl = discrete_kl(lib.posterior, lib.prior);
    const double nd = static_cast<double>(n);
    return v_q - cfg.k_eps() * ((kl + std::log(1.0 / cfg.delta)) / (eta * nd) + eta / 8.0);
}

double catoni_lcb(double kl_term, double l_hat, long n, double gamma, const BoundConfig& cfg) {
    require(gamma > 0.0, "catoni_lcb: gamma must be > 0");
    require(kl_term >= 0.0, "catoni_lcb: negative KL term");
    require(l_hat >= -1e-12 && l_hat <= 1.0 + 1e-12, "catoni_lcb: l_hat outside [0,1]");
    const double nd = static_cast<double>(n);
    const double c_nd = (kl_term + std::log(xi(n) / cfg.delta)) / nd;
    const double num = 1.0 - std::exp(-c_nd - gamma * l_hat);
    const double den = 1.0 - std::exp(-gamma);
    return cfg.c_eps() - cfg.k_eps() * num / den;
}

namespace {

double posterior_value_loss(const PosteriorLibrary& lib, const VecD& posterior,
                            const BoundConfig& cfg) {
    double v_q = 0.0;
    for (std::size_t i = 0; i < lib.size(); ++i) v_q += posterior[i] * lib.v_hat[i];
    // Clamp pure rounding noise at the loss endpoints; a genuine range
    // violation is caught per candidate when v_hat is populated.
    return std::clamp((cfg.c_eps() - v_q) / cfg.k_eps(), 0.0, 1.0);
}

BoundReportRow make_row(const PosteriorLibrary& lib, const VecD& posterior, double gamma,
                        double lambda, long n, const BoundConfig& cfg, double* lcb_out) {
    BoundReportRow row;
    row.n = n;
    row.epsilon = cfg.epsilon;
    row.delta = cfg.delta;
    row.gamma = gamma;
    row.lambda = lambda;
    row.kl = discrete_kl(posterior, lib.prior);
    row.l_hat = posterior_value_loss(lib, posterior, cfg);
    row.xi_n = xi(n);
    row.lcb = catoni_lcb(row.kl, row.l_hat, n, gamma, cfg);
    *lcb_out = row.lcb;
    return row;
}

}  // namespace

TemperatureSelection select_temperature(const PosteriorLibrary& lib, const BoundConfig& cfg,
                                        long n, std::vector<BoundReportRow>* scan) {
    cfg.validate();
    lib.validate();
    TemperatureSelection out;
    out.lcb_star = -std::numeric_limits<double>::infinity();
    for (double gamma : cfg.gamma_grid) {
        const VecD q = gibbs_posterior(lib, gamma, n, cfg);
        double lcb = 0.0;
        const BoundReportRow row = make_row(lib, q, gamma, 0.0, n, cfg, &lcb);
        if (scan != nullptr) scan->push_back(row);
        if (lcb > out.lcb_star) {  // strict: ties stay at the smaller gamma
            out.lcb_star = lcb;
            out.gamma_star = gamma;
            out.posterior = q;
        }
    }
    return out;
}

ProductSelection select_temperature_product(const PosteriorLibrary& lib, const BoundConfig& cfg,
                                            long n, std::vector<BoundReportRow>* scan) {
    cfg.validate();
    lib.validate();
    ProductSelection out;
    out.lcb_star = -std::numeric_limits<double>::infinity();
    for (double eta : cfg.eta_grid) {
        const VecD q = gibbs_posterior(lib, eta, n, cfg);
        for (double gamma : cfg.gamma_grid) {
            double lcb = 0.0;
            const BoundReportRow row = make_row(lib, q, gamma, 0.0, n, cfg, &lcb);
            if (scan != nullptr) scan->push_back(row);
            if (lcb > out.lcb_star) {
                out.lcb_star = lcb;
                out.eta_star = eta;
                out.gamma_star = gamma;
                out.posterior = q;
            }
        }
    }
    return out;
}

FamilySelection select_family(const PosteriorLibrary& lib, const BoundConfig& cfg, long n,
                              std::vector<BoundReportRow>* scan) {
    cfg.validate();
    lib.validate();
    FamilySelection out;
    out.lcb_star = -std::numeric_limits<double>::infinity();
    for (double lambda : cfg.lambda_grid) {
        const VecD q = hinge_posterior(lib, lambda, n);
        for (double gamma : cfg.gamma_grid) {
            double lcb = 0.0;
            const BoundReportRow row = make_row(lib, q, gamma, lambda, n, cfg, &lcb);
            if (scan != nullptr) scan->push_back(row);
            if (lcb > out.lcb_star) {
                out.lcb_star = lcb;
                out.lambda_star = lambda;
                out.gamma_star = gamma;
                out.posterior = q;
            }
        }
    }
    return out;
}

double combine_confidence(double alpha_cert, double delta) {
    require(alpha_cert > 0.0 && alpha_cert < 1.0, "combine_confidence: alpha_cert outside (0,1)");
    require(delta > 0.0 && delta < 1.0, "combine_confidence: delta outside (0,1)");
    return (1.0 - alpha_cert) * (1.0 - delta);
}

void bound_report_to_csv(const std::vector<BoundReportRow>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("bound_report_to_csv: cannot open " + path);
    out << "n,epsilon,delta,gamma,kl,l_hat,xi_n,lcb\n";
    for (const BoundReportRow& r : rows) {
        out << r.n << "," << format_double(r.epsilon) << "," << format_double(r.delta) << ","
            << format_double(r.gamma) << "," << format_double(r.kl) << ","
            << format_double(r.l_hat) << "," << format_double(r.xi_n) << ","
            << format_double(r.lcb) << "\n";
    }
}

}  // namespace prowl
