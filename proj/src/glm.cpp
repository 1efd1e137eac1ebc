#include "meanaic/glm.hpp"

#include "meanaic/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace meanaic {

namespace {

// Row permutation sorting (y, x_0, x_1, ...) lexicographically. Fitting in
// this order makes every floating-point reduction independent of file order.
std::vector<Eigen::Index> canonical_order(const Eigen::VectorXd& y, const Eigen::MatrixXd& X) {
    std::vector<Eigen::Index> order(static_cast<std::size_t>(y.size()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        if (y(a) != y(b)) return y(a) < y(b);
        for (Eigen::Index c = 0; c < X.cols(); ++c)
            if (X(a, c) != X(b, c)) return X(a, c) < X(b, c);
        return false;
    });
    return order;
}

double sum_loglik_eta(const Family& family, const Eigen::VectorXd& y, const Eigen::VectorXd& eta) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < y.size(); ++j) s += family.log_density_eta(y(j), eta(j));
    return s;
}

double saturated_loglik(const Family& family, const Eigen::VectorXd& y) {
    if (family.kind() != FamilyKind::Poisson) return 0.0;
    double s = 0.0;
    for (Eigen::Index j = 0; j < y.size(); ++j)
        if (y(j) > 0.0) s += y(j) * std::log(y(j)) - y(j) - std::lgamma(y(j) + 1.0);
    return s;
}

Eigen::VectorXd mean_from_eta(const Family& family, const Eigen::VectorXd& eta) {
    return eta.unaryExpr([&](double e) { return family.inverse_link(e); });
}

void check_rank(const Eigen::MatrixXd& X, const std::vector<int>& design_cols, double tol) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    qr.setThreshold(tol);
    if (qr.rank() == X.cols()) return;
    std::vector<int> offending;
    const auto& perm = qr.colsPermutation().indices();
    for (Eigen::Index k = qr.rank(); k < X.cols(); ++k)
        offending.push_back(design_cols[static_cast<std::size_t>(perm(k))]);
    std::sort(offending.begin(), offending.end());
    std::string cols;
    for (int c : offending) cols += (cols.empty() ? "" : ",") + std::to_string(c);
    throw DegenerateDesign("rank-deficient design; dependent columns {" + cols + "}", offending);
}

double residual_variance(const Eigen::VectorXd& y, const Eigen::MatrixXd& X, const Eigen::VectorXd& beta) {
    return (y - X * beta).squaredNorm() / static_cast<double>(y.size());
}

ClusterFit fit_gaussian(const Eigen::VectorXd& y, const Eigen::MatrixXd& X) {
    const auto n = y.size();
    ClusterFit fit;
    fit.n = n;
    fit.beta_hat = X.colPivHouseholderQr().solve(y);
    fit.dispersion = residual_variance(y, X, fit.beta_hat);
    if (!(fit.dispersion > 0.0))
        throw DomainError("Gaussian fit has zero residual variance");
    double ll = 0.0;
    const Eigen::VectorXd mu = X * fit.beta_hat;
    for (Eigen::Index j = 0; j < n; ++j) ll += Family::gaussian().log_density(y(j), mu(j), fit.dispersion);
    fit.max_avg_loglik = ll / static_cast<double>(n);
    fit.hessian = -(X.transpose() * X) / (static_cast<double>(n) * fit.dispersion);
    fit.converged = true;
    fit.iterations = 1;
    return fit;
}

ClusterFit fit_canonical(const Family& family, const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
                         const FitControl& ctrl) {
    const auto n = y.size();
    const auto p = X.cols();
    const double dn = static_cast<double>(n);

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    beta(0) = family.link(family.clamp_mean(y.mean()));
    Eigen::VectorXd eta = X * beta;
    double ll = sum_loglik_eta(family, y, eta);
    const double ll_sat = saturated_loglik(family, y);
    double deviance = 2.0 * (ll_sat - ll);

    ClusterFit fit;
    fit.n = n;
    int it = 0;
    bool converged = false;
    while (it < ctrl.max_iterations) {
        ++it;
        const Eigen::VectorXd mu = mean_from_eta(family, eta);
        const Eigen::VectorXd w = mu.unaryExpr([&](double m) { return family.variance(m); });
        const Eigen::VectorXd score = X.transpose() * (y - mu);
        const Eigen::MatrixXd info = X.transpose() * w.asDiagonal() * X;
        Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
        Eigen::VectorXd step = ldlt.solve(score);
        if (ldlt.info() != Eigen::Success || !step.allFinite())
            throw NonFiniteIterate("Fisher information became singular at iteration " + std::to_string(it));

        // step halving keeps the likelihood non-decreasing
        Eigen::VectorXd next = beta + step;
        Eigen::VectorXd next_eta = X * next;
        double next_ll = sum_loglik_eta(family, y, next_eta);
        for (int h = 0; h < 30 && !(next_ll >= ll - 1e-12 * std::abs(ll)); ++h) {
            step *= 0.5;
            next = beta + step;
            next_eta = X * next;
            next_ll = sum_loglik_eta(family, y, next_eta);
        }
        if (!std::isfinite(next_ll) || !next.allFinite())
            throw NonFiniteIterate("non-finite iterate at iteration " + std::to_string(it));
        if (next.cwiseAbs().maxCoeff() > ctrl.divergence_bound)
            throw NonFiniteIterate("coefficient exceeded " + std::to_string(ctrl.divergence_bound) +
                                   " in absolute value (divergence or separation)");

        beta = next;
        eta = next_eta;
        ll = next_ll;
        const double next_deviance = 2.0 * (ll_sat - ll);
        const double rel_change = std::abs(deviance - next_deviance) / (std::abs(next_deviance) + 0.1);
        deviance = next_deviance;

        const Eigen::VectorXd avg_score = X.transpose() * (y - mean_from_eta(family, eta)) / dn;
        if (rel_change < ctrl.deviance_tolerance && avg_score.cwiseAbs().maxCoeff() < ctrl.score_tolerance) {
            converged = true;
            break;
        }
    }

    const Eigen::VectorXd mu = mean_from_eta(family, eta);
    const Eigen::VectorXd w = mu.unaryExpr([&](double m) { return family.variance(m); });
    fit.beta_hat = beta;
    fit.max_avg_loglik = ll / dn;
    fit.hessian = -(X.transpose() * w.asDiagonal() * X) / dn;
    fit.converged = converged;
    fit.iterations = it;
    return fit;
}

}  // namespace

Eigen::MatrixXd active_design(const ClusterData& data, const ModelSpec& model) {
    const auto cols = model.design_columns();
    Eigen::MatrixXd X(data.X.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k) {
        if (cols[k] >= data.X.cols())
            throw std::invalid_argument("model column " + std::to_string(cols[k]) + " not present in cluster '" +
                                        data.cluster_id + "'");
        X.col(static_cast<Eigen::Index>(k)) = data.X.col(cols[k]);
    }
    return X;
}

ClusterFit fit_cluster(const ClusterData& data, const ModelSpec& model, const FitControl& ctrl) {
    const Eigen::MatrixXd raw = active_design(data, model);
    const auto n = data.y.size();
    const auto p = raw.cols();
    if (n < p)
        throw TooFewObservations("cluster '" + data.cluster_id + "' has " + std::to_string(n) +
                                 " observations for " + std::to_string(p) + " coefficients");

    const auto order = canonical_order(data.y, raw);
    Eigen::VectorXd y(n);
    Eigen::MatrixXd X(n, p);
    for (Eigen::Index j = 0; j < n; ++j) {
        y(j) = data.y(order[static_cast<std::size_t>(j)]);
        X.row(j) = raw.row(order[static_cast<std::size_t>(j)]);
    }
    check_rank(X, model.design_columns(), ctrl.rank_tolerance);

    if (model.family.kind() == FamilyKind::Gaussian) return fit_gaussian(y, X);
    return fit_canonical(model.family, y, X, ctrl);
}

LogLik loglik(const ClusterData& data, const ModelSpec& model, const Eigen::VectorXd& beta) {
    const Eigen::MatrixXd X = active_design(data, model);
    if (beta.size() != X.cols()) throw std::invalid_argument("loglik: beta length does not match model");
    const Eigen::VectorXd eta = X * beta;
    const double n = static_cast<double>(data.y.size());
    double s = 0.0;
    if (model.family.kind() == FamilyKind::Gaussian) {
        const double sigma_sq = residual_variance(data.y, X, beta);
        if (!(sigma_sq > 0.0)) throw DomainError("Gaussian profiled variance is zero");
        for (Eigen::Index j = 0; j < data.y.size(); ++j)
            s += model.family.log_density(data.y(j), eta(j), sigma_sq);
    } else {
        s = sum_loglik_eta(model.family, data.y, eta);
    }
    return {s, s / n};
}

Eigen::VectorXd average_score(const ClusterData& data, const ModelSpec& model, const Eigen::VectorXd& beta) {
    const Eigen::MatrixXd X = active_design(data, model);
    const double n = static_cast<double>(data.y.size());
    const Eigen::VectorXd mu = mean_from_eta(model.family, X * beta);
    Eigen::VectorXd g = X.transpose() * (data.y - mu) / n;
    if (model.family.kind() == FamilyKind::Gaussian) g /= residual_variance(data.y, X, beta);
    return g;
}

Eigen::MatrixXd average_hessian(const ClusterData& data, const ModelSpec& model, const Eigen::VectorXd& beta) {
    const Eigen::MatrixXd X = active_design(data, model);
    const double n = static_cast<double>(data.y.size());
    if (model.family.kind() == FamilyKind::Gaussian)
        return -(X.transpose() * X) / (n * residual_variance(data.y, X, beta));
    const Eigen::VectorXd mu = mean_from_eta(model.family, X * beta);
    const Eigen::VectorXd w = mu.unaryExpr([&](double m) { return model.family.variance(m); });
    return -(X.transpose() * w.asDiagonal() * X) / n;
}

int effective_parameters(const ModelSpec& model) {
    return model.coefficient_count() + (model.family.profiles_dispersion() ? 1 : 0);
}

double cluster_aic(const ClusterFit& fit, int p_effective) {
    return -2.0 * fit.max_loglik() + 2.0 * p_effective;
}

}  // namespace meanaic
