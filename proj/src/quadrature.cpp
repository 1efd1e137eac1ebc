#include "meanaic/quadrature.hpp"

#include "meanaic/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <limits>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace meanaic {

GaussHermiteRule gauss_hermite(int n) {
    if (n < 1) throw std::invalid_argument("Gauss-Hermite rule needs at least one node");
    // Jacobi matrix of the Hermite recurrence: zero diagonal, sqrt(k/2) off-diagonal.
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) {
        J(k, k - 1) = std::sqrt(k / 2.0);
        J(k - 1, k) = J(k, k - 1);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(J);
    GaussHermiteRule rule;
    rule.nodes.resize(static_cast<std::size_t>(n));
    rule.weights.resize(static_cast<std::size_t>(n));
    const double mu0 = std::sqrt(std::numbers::pi);
    for (int k = 0; k < n; ++k) {
        rule.nodes[static_cast<std::size_t>(k)] = eig.eigenvalues()(k);
        const double v = eig.eigenvectors()(0, k);
        rule.weights[static_cast<std::size_t>(k)] = mu0 * v * v;
    }
    // symmetrize away rounding in the eigen solver
    for (int k = 0; k < n / 2; ++k) {
        const auto a = static_cast<std::size_t>(k);
        const auto b = static_cast<std::size_t>(n - 1 - k);
        const double x = 0.5 * (rule.nodes[b] - rule.nodes[a]);
        const double w = 0.5 * (rule.weights[a] + rule.weights[b]);
        rule.nodes[a] = -x;
        rule.nodes[b] = x;
        rule.weights[a] = rule.weights[b] = w;
    }
    if (n % 2 == 1) rule.nodes[static_cast<std::size_t>(n / 2)] = 0.0;
    return rule;
}

AdaptiveIntegral integrate_against_normal(const std::function<Derivatives(double)>& log_g, double sigma_sq,
                                          const GaussHermiteRule& rule, int max_newton, double newton_tolerance) {
    if (!(sigma_sq > 0.0)) throw std::invalid_argument("integrate_against_normal: variance must be positive");
    const double log_norm = -0.5 * std::log(2.0 * std::numbers::pi * sigma_sq);
    auto h = [&](double b) {
        Derivatives d = log_g(b);
        d.value += log_norm - 0.5 * b * b / sigma_sq;
        d.d1 -= b / sigma_sq;
        d.d2 -= 1.0 / sigma_sq;
        return d;
    };

    // Newton search for the mode with step halving on the log integrand
    double b = 0.0;
    Derivatives cur = h(b);
    bool found = false;
    for (int it = 0; it < max_newton; ++it) {
        if (!(cur.d2 < 0.0) || !std::isfinite(cur.value))
            throw QuadratureModeFailure("integrand is not log-concave at b = " + std::to_string(b));
        double step = -cur.d1 / cur.d2;
        Derivatives next = h(b + step);
        for (int halve = 0; halve < 50 && !(next.value >= cur.value - 1e-12 * std::abs(cur.value)); ++halve) {
            step *= 0.5;
            next = h(b + step);
        }
        b += step;
        cur = next;
        if (std::abs(step) < newton_tolerance * (1.0 + std::abs(b))) {
            found = true;
            break;
        }
    }
    if (!found || !std::isfinite(b) || !(cur.d2 < 0.0))
        throw QuadratureModeFailure("mode search did not converge");

    AdaptiveIntegral out;
    out.mode = b;
    out.scale = 1.0 / std::sqrt(-cur.d2);
    const std::size_t n = rule.nodes.size();
    out.points.resize(n);
    out.posterior_weights.resize(n);
    std::vector<double> terms(n);
    const double spread = std::numbers::sqrt2 * out.scale;
    double peak = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < n; ++k) {
        const double x = rule.nodes[k];
        out.points[k] = b + spread * x;
        terms[k] = std::log(rule.weights[k]) + x * x + h(out.points[k]).value;
        peak = std::max(peak, terms[k]);
    }
    double total = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        out.posterior_weights[k] = std::exp(terms[k] - peak);
        total += out.posterior_weights[k];
    }
    for (auto& w : out.posterior_weights) w /= total;
    out.log_value = std::log(spread) + peak + std::log(total);
    return out;
}

}  // namespace meanaic
