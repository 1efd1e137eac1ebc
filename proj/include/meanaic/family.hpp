#pragma once

#include <string>
#include <string_view>

namespace meanaic {

enum class FamilyKind { Poisson, Bernoulli, Gaussian };

/// Exponential family with its canonical link.
///
/// Poisson (log link) and Bernoulli (logit link) have dispersion fixed at 1.
/// Gaussian (identity link) profiles the residual variance, which then counts
/// as one extra parameter in AIC.
class Family {
public:
    constexpr Family() = default;
    constexpr explicit Family(FamilyKind kind) : kind_(kind) {}

    static constexpr Family poisson() { return Family(FamilyKind::Poisson); }
    static constexpr Family bernoulli() { return Family(FamilyKind::Bernoulli); }
    static constexpr Family gaussian() { return Family(FamilyKind::Gaussian); }

    /// Parses "poisson", "bernoulli" (or "binomial"), "gaussian" (or "normal").
    static Family parse(std::string_view name);

    constexpr FamilyKind kind() const { return kind_; }
    constexpr bool profiles_dispersion() const { return kind_ == FamilyKind::Gaussian; }
    std::string name() const;

    double link(double mu) const;
    double inverse_link(double eta) const;
    double variance(double mu) const;

    /// Cumulant A(eta): log f = (y * eta - A(eta)) / phi + c(y, phi).
    double cumulant(double eta) const;

    /// log f(y; mu) including all constant terms. `dispersion` is the Gaussian
    /// variance and is ignored for the other families.
    double log_density(double y, double mu, double dispersion = 1.0) const;

    /// log f(y) written in terms of the linear predictor; stable where
    /// inverse_link saturates.
    double log_density_eta(double y, double eta, double dispersion = 1.0) const;

    /// True when y lies in the family's support.
    bool valid_response(double y) const;

    /// Moves a sample mean into the open domain of the link.
    double clamp_mean(double mu) const;

    friend constexpr bool operator==(Family a, Family b) { return a.kind_ == b.kind_; }

private:
    FamilyKind kind_ = FamilyKind::Poisson;
};

}  // namespace meanaic
