#pragma once

#include <functional>
#include <vector>

namespace meanaic {

/// Gauss-Hermite rule for the weight exp(-x^2) on the real line.
struct GaussHermiteRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Golub-Welsch construction; nodes ascending. Throws for n < 1.
GaussHermiteRule gauss_hermite(int n);

/// Value and first two derivatives of a scalar function of b.
struct Derivatives {
    double value = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;
};

/// Result of an adaptive integral against a N(0, sigma^2) density.
struct AdaptiveIntegral {
    /// log of the integral.
    double log_value = 0.0;
    /// Mode of log g(b) + log phi(b) and the scale used to place the nodes.
    double mode = 0.0;
    double scale = 0.0;
    /// Node locations and normalized posterior weights (summing to 1); used to
    /// form posterior expectations of functions of b.
    std::vector<double> points;
    std::vector<double> posterior_weights;
};

/// log of the integral of g(b) * phi(b; 0, sigma_sq) by adaptive Gauss-Hermite
/// quadrature: the rule is centered at the mode of the integrand and scaled by
/// its curvature there. `log_g` must be concave so the Newton mode search is
/// well posed; a failed search throws QuadratureModeFailure.
AdaptiveIntegral integrate_against_normal(const std::function<Derivatives(double)>& log_g, double sigma_sq,
                                          const GaussHermiteRule& rule, int max_newton = 100,
                                          double newton_tolerance = 1e-10);

}  // namespace meanaic
