#include "meanaic/family.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace meanaic {

Family Family::parse(std::string_view name) {
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "poisson") return poisson();
    if (lower == "bernoulli" || lower == "binomial" || lower == "logistic") return bernoulli();
    if (lower == "gaussian" || lower == "normal") return gaussian();
    throw std::invalid_argument("unknown family '" + std::string(name) + "'");
}

std::string Family::name() const {
    switch (kind_) {
        case FamilyKind::Poisson: return "poisson";
        case FamilyKind::Bernoulli: return "bernoulli";
        case FamilyKind::Gaussian: return "gaussian";
    }
    return "unknown";
}

double Family::link(double mu) const {
    switch (kind_) {
        case FamilyKind::Poisson: return std::log(mu);
        case FamilyKind::Bernoulli: return std::log(mu / (1.0 - mu));
        case FamilyKind::Gaussian: return mu;
    }
    return mu;
}

double Family::inverse_link(double eta) const {
    switch (kind_) {
        case FamilyKind::Poisson: return std::exp(eta);
        case FamilyKind::Bernoulli:
            // split on sign so exp never overflows
            if (eta >= 0.0) return 1.0 / (1.0 + std::exp(-eta));
            else {
                const double e = std::exp(eta);
                return e / (1.0 + e);
            }
        case FamilyKind::Gaussian: return eta;
    }
    return eta;
}

double Family::variance(double mu) const {
    switch (kind_) {
        case FamilyKind::Poisson: return mu;
        case FamilyKind::Bernoulli: return mu * (1.0 - mu);
        case FamilyKind::Gaussian: return 1.0;
    }
    return 1.0;
}

double Family::cumulant(double eta) const {
    switch (kind_) {
        case FamilyKind::Poisson: return std::exp(eta);
        case FamilyKind::Bernoulli:
            // log(1 + e^eta) without overflow
            return eta > 0.0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta));
        case FamilyKind::Gaussian: return 0.5 * eta * eta;
    }
    return 0.0;
}

double Family::log_density(double y, double mu, double dispersion) const {
    switch (kind_) {
        case FamilyKind::Poisson:
            if (y == 0.0) return -mu;
            return y * std::log(mu) - mu - std::lgamma(y + 1.0);
        case FamilyKind::Bernoulli:
            return y != 0.0 ? std::log(mu) : std::log1p(-mu);
        case FamilyKind::Gaussian: {
            const double r = y - mu;
            return -0.5 * (std::log(2.0 * std::numbers::pi * dispersion) + r * r / dispersion);
        }
    }
    return 0.0;
}

double Family::log_density_eta(double y, double eta, double dispersion) const {
    switch (kind_) {
        case FamilyKind::Poisson:
            return y * eta - std::exp(eta) - (y == 0.0 ? 0.0 : std::lgamma(y + 1.0));
        case FamilyKind::Bernoulli: return y * eta - cumulant(eta);
        case FamilyKind::Gaussian: return log_density(y, eta, dispersion);
    }
    return 0.0;
}

bool Family::valid_response(double y) const {
    if (!std::isfinite(y)) return false;
    switch (kind_) {
        case FamilyKind::Poisson: return y >= 0.0 && std::floor(y) == y;
        case FamilyKind::Bernoulli: return y == 0.0 || y == 1.0;
        case FamilyKind::Gaussian: return true;
    }
    return false;
}

double Family::clamp_mean(double mu) const {
    switch (kind_) {
        case FamilyKind::Poisson: return std::max(mu, 1e-2);
        case FamilyKind::Bernoulli: return std::clamp(mu, 1e-2, 1.0 - 1e-2);
        case FamilyKind::Gaussian: return mu;
    }
    return mu;
}

}  // namespace meanaic
