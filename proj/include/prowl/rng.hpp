#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

namespace prowl {

/// Seeded random source with hand-rolled variate algorithms.
///
/// Every variate is derived from raw 53-bit uniforms through a fixed
/// algorithm (Box-Muller for normals, Marsaglia-Tsang for gammas, the
/// two-gamma construction for betas), so a given seed reproduces the same
/// stream on every platform. The distribution adaptors in <random> are
/// implementation-defined and would not.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform double in [0, 1), 53 bits of mantissa.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller. No caching: each call consumes
    /// exactly two uniforms (the stream layout stays easy to reason about).
    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
    }

    /// Gamma(shape, 1) via Marsaglia-Tsang; shape < 1 boosted by U^{1/shape}.
    double gamma(double shape) {
        if (!(shape > 0.0)) throw std::invalid_argument("Rng::gamma: shape must be > 0");
        if (shape < 1.0) {
            const double boost = std::pow(positive_uniform(), 1.0 / shape);
            return boost * gamma(shape + 1.0);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x = normal();
            double v = 1.0 + c * x;
            if (v <= 0.0) continue;
            v = v * v * v;
            const double u = positive_uniform();
            const double x2 = x * x;
            if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
            if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    /// Beta(a, b) as G_a / (G_a + G_b).
    double beta(double a, double b) {
        const double x = gamma(a);
        const double y = gamma(b);
        return x / (x + y);
    }

    std::uint64_t raw() { return engine_(); }

private:
    double positive_uniform() {
        double u = uniform();
        while (u <= 0.0) u = uniform();
        return u;
    }

    static constexpr double kPi = 3.14159265358979323846;
    std::mt19937_64 engine_;
};

}  // namespace prowl
