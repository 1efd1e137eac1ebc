#include "meanaic/glmm_marginal.hpp"

#include "meanaic/errors.hpp"
#include "meanaic/parallel.hpp"
#include "meanaic/quadrature.hpp"

#include <gsl/gsl_blas.h>
#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <cmath>
#include <exception>
#include <limits>
#include <memory>
#include <mutex>
#include <numbers>

namespace meanaic {

namespace {

constexpr double kBoundaryVariance = 1e-6;
// exp(-50) ~ 2e-22 keeps the variance strictly positive inside the optimizer
constexpr double kMinLogVariance = -50.0;

void disable_gsl_abort() {
    static std::once_flag once;
    std::call_once(once, [] { gsl_set_error_handler_off(); });
}

// -------------------------------------------------------------------------
// Per-cluster data prepared once per model
// -------------------------------------------------------------------------

struct PreparedCluster {
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
    double sum_y = 0.0;
    double log_factorials = 0.0;  // Poisson constant sum_j log y_j!
    Eigen::VectorXd Xty;
};

class MarginalProblem {
public:
    MarginalProblem(const std::vector<ClusterData>& data, const ModelSpec& model, int nodes, const FitControl& ctrl)
        : family_(model.family), rule_(gauss_hermite(nodes)), ctrl_(ctrl) {
        if (data.empty()) throw std::invalid_argument("marginal likelihood needs at least one cluster");
        clusters_.reserve(data.size());
        for (const auto& c : data) {
            PreparedCluster pc;
            pc.X = active_design(c, model);
            pc.y = c.y;
            pc.sum_y = c.y.sum();
            if (family_.kind() == FamilyKind::Poisson)
                for (Eigen::Index j = 0; j < c.y.size(); ++j)
                    if (c.y(j) > 0.0) pc.log_factorials += std::lgamma(c.y(j) + 1.0);
            pc.Xty = pc.X.transpose() * pc.y;
            total_obs_ += static_cast<double>(c.y.size());
            clusters_.push_back(std::move(pc));
        }
        p_ = clusters_.front().X.cols();
    }

    Eigen::Index coefficient_count() const { return p_; }
    double total_observations() const { return total_obs_; }

    MarginalEvaluation evaluate(const Eigen::VectorXd& beta, double sigma_sq, double dispersion,
                                bool with_gradient) const {
        if (beta.size() != p_) throw std::invalid_argument("marginal likelihood: beta length does not match model");
        if (!(sigma_sq >= 0.0)) throw std::invalid_argument("marginal likelihood: variance must be non-negative");
        if (family_.kind() == FamilyKind::Gaussian && !(dispersion > 0.0))
            throw std::invalid_argument("marginal likelihood: Gaussian residual variance must be positive");
        MarginalEvaluation out;
        out.cluster_values.resize(clusters_.size());
        if (with_gradient) out.gradient = Eigen::VectorXd::Zero(p_ + 1);
        for (std::size_t i = 0; i < clusters_.size(); ++i) {
            out.cluster_values[i] = cluster_term(clusters_[i], beta, sigma_sq, dispersion, with_gradient, out.gradient);
            out.value += out.cluster_values[i];
        }
        return out;
    }

private:
    double cluster_term(const PreparedCluster& c, const Eigen::VectorXd& beta, double sigma_sq, double dispersion,
                        bool with_gradient, Eigen::VectorXd& gradient) const {
        const Eigen::VectorXd eta = c.X * beta;
        switch (family_.kind()) {
            case FamilyKind::Poisson: return poisson_term(c, eta, sigma_sq, with_gradient, gradient);
            case FamilyKind::Bernoulli: return bernoulli_term(c, eta, sigma_sq, with_gradient, gradient);
            case FamilyKind::Gaussian: return gaussian_term(c, eta, sigma_sq, dispersion, with_gradient, gradient);
        }
        return 0.0;
    }

    // Poisson log link: the random intercept factors out of the cluster sum,
    // so log g(b) = T + b Y - e^b S - C with S = sum_j exp(eta_j).
    double poisson_term(const PreparedCluster& c, const Eigen::VectorXd& eta, double sigma_sq, bool with_gradient,
                        Eigen::VectorXd& gradient) const {
        const Eigen::VectorXd mu = eta.array().exp();
        const double T = c.y.dot(eta);
        const double S = mu.sum();
        const double Y = c.sum_y;
        const double C = c.log_factorials;
        if (sigma_sq == 0.0) {
            if (with_gradient) gradient.head(p_) += c.Xty - c.X.transpose() * mu;
            return T - S - C;
        }
        auto log_g = [&](double b) {
            const double eb = std::exp(b) * S;
            return Derivatives{T + b * Y - eb - C, Y - eb, -eb};
        };
        const auto integral = integrate(log_g, sigma_sq);
        if (with_gradient) {
            double e_exp_b = 0.0;
            double e_b_sq = 0.0;
            for (std::size_t k = 0; k < integral.points.size(); ++k) {
                const double b = integral.points[k];
                e_exp_b += integral.posterior_weights[k] * std::exp(b);
                e_b_sq += integral.posterior_weights[k] * b * b;
            }
            gradient.head(p_) += c.Xty - e_exp_b * (c.X.transpose() * mu);
            gradient(p_) += 0.5 * (e_b_sq / sigma_sq - 1.0);
        }
        return integral.log_value;
    }

    double bernoulli_term(const PreparedCluster& c, const Eigen::VectorXd& eta, double sigma_sq, bool with_gradient,
                          Eigen::VectorXd& gradient) const {
        const auto n = c.y.size();
        auto log_g = [&](double b) {
            Derivatives d;
            for (Eigen::Index j = 0; j < n; ++j) {
                const double e = eta(j) + b;
                const double p = family_.inverse_link(e);
                d.value += c.y(j) * e - family_.cumulant(e);
                d.d1 += c.y(j) - p;
                d.d2 -= p * (1.0 - p);
            }
            return d;
        };
        if (sigma_sq == 0.0) {
            if (with_gradient) {
                const Eigen::VectorXd p = eta.unaryExpr([&](double e) { return family_.inverse_link(e); });
                gradient.head(p_) += c.Xty - c.X.transpose() * p;
            }
            return log_g(0.0).value;
        }
        const auto integral = integrate(log_g, sigma_sq);
        if (with_gradient) {
            Eigen::VectorXd expected_mean = Eigen::VectorXd::Zero(n);
            double e_b_sq = 0.0;
            for (std::size_t k = 0; k < integral.points.size(); ++k) {
                const double b = integral.points[k];
                const double w = integral.posterior_weights[k];
                expected_mean += w * eta.unaryExpr([&](double e) { return family_.inverse_link(e + b); });
                e_b_sq += w * b * b;
            }
            gradient.head(p_) += c.Xty - c.X.transpose() * expected_mean;
            gradient(p_) += 0.5 * (e_b_sq / sigma_sq - 1.0);
        }
        return integral.log_value;
    }

    double gaussian_term(const PreparedCluster& c, const Eigen::VectorXd& eta, double sigma_sq, double dispersion,
                         bool with_gradient, Eigen::VectorXd& gradient) const {
        const Eigen::VectorXd r = c.y - eta;
        const double n = static_cast<double>(r.size());
        const double r_sum = r.sum();
        const double r_sq = r.squaredNorm();
        const double log_norm = -0.5 * n * std::log(2.0 * std::numbers::pi * dispersion);
        auto log_g = [&](double b) {
            const double rss = r_sq - 2.0 * b * r_sum + n * b * b;
            return Derivatives{log_norm - 0.5 * rss / dispersion, (r_sum - n * b) / dispersion, -n / dispersion};
        };
        if (sigma_sq == 0.0) {
            if (with_gradient) gradient.head(p_) += c.X.transpose() * r / dispersion;
            return log_g(0.0).value;
        }
        const auto integral = integrate(log_g, sigma_sq);
        if (with_gradient) {
            double e_b = 0.0;
            double e_b_sq = 0.0;
            for (std::size_t k = 0; k < integral.points.size(); ++k) {
                e_b += integral.posterior_weights[k] * integral.points[k];
                e_b_sq += integral.posterior_weights[k] * integral.points[k] * integral.points[k];
            }
            gradient.head(p_) += (c.X.transpose() * r - e_b * c.X.colwise().sum().transpose()) / dispersion;
            gradient(p_) += 0.5 * (e_b_sq / sigma_sq - 1.0);
        }
        return integral.log_value;
    }

    template <typename F>
    AdaptiveIntegral integrate(F&& log_g, double sigma_sq) const {
        return integrate_against_normal(log_g, sigma_sq, rule_, ctrl_.max_iterations, ctrl_.deviance_tolerance);
    }

    Family family_;
    GaussHermiteRule rule_;
    FitControl ctrl_;
    std::vector<PreparedCluster> clusters_;
    Eigen::Index p_ = 0;
    double total_obs_ = 0.0;
};

// -------------------------------------------------------------------------
// BFGS driver (GSL vector_bfgs2) on theta = (beta, log sigma^2)
// -------------------------------------------------------------------------

struct Objective {
    const MarginalProblem* problem = nullptr;
    std::exception_ptr error;
    double best_value = std::numeric_limits<double>::infinity();
    Eigen::VectorXd best_theta;

    // Negative average marginal log-likelihood.
    double evaluate(const gsl_vector* x, gsl_vector* grad) {
        const auto p = problem->coefficient_count();
        Eigen::VectorXd beta(p);
        for (Eigen::Index k = 0; k < p; ++k) beta(k) = gsl_vector_get(x, static_cast<std::size_t>(k));
        const double log_var = std::max(gsl_vector_get(x, static_cast<std::size_t>(p)), kMinLogVariance);
        try {
            const auto eval = problem->evaluate(beta, std::exp(log_var), 1.0, grad != nullptr);
            const double scale = problem->total_observations();
            const double value = -eval.value / scale;
            if (grad)
                for (Eigen::Index k = 0; k <= p; ++k)
                    gsl_vector_set(grad, static_cast<std::size_t>(k), -eval.gradient(k) / scale);
            if (std::isfinite(value) && value < best_value) {
                best_value = value;
                best_theta.resize(p + 1);
                best_theta.head(p) = beta;
                best_theta(p) = log_var;
            }
            return std::isfinite(value) ? value : GSL_POSINF;
        } catch (...) {
            if (!error) error = std::current_exception();
            if (grad) gsl_vector_set_zero(grad);
            return GSL_POSINF;
        }
    }

    static double f(const gsl_vector* x, void* self) { return static_cast<Objective*>(self)->evaluate(x, nullptr); }
    static void df(const gsl_vector* x, void* self, gsl_vector* g) { static_cast<Objective*>(self)->evaluate(x, g); }
    static void fdf(const gsl_vector* x, void* self, double* v, gsl_vector* g) {
        *v = static_cast<Objective*>(self)->evaluate(x, g);
    }
};

struct MinimizerDeleter {
    void operator()(gsl_multimin_fdfminimizer* s) const { gsl_multimin_fdfminimizer_free(s); }
};
struct VectorDeleter {
    void operator()(gsl_vector* v) const { gsl_vector_free(v); }
};

}  // namespace

double marginal_loglik(const std::vector<ClusterData>& data, const ModelSpec& model, const Eigen::VectorXd& beta,
                       double sigma0_sq, int nodes, double dispersion) {
    return evaluate_marginal(data, model, beta, sigma0_sq, nodes, dispersion).value;
}

MarginalEvaluation evaluate_marginal(const std::vector<ClusterData>& data, const ModelSpec& model,
                                     const Eigen::VectorXd& beta, double sigma0_sq, int nodes, double dispersion,
                                     const FitControl& ctrl) {
    const MarginalProblem problem(data, model, nodes, ctrl);
    return problem.evaluate(beta, sigma0_sq, dispersion, true);
}

MarginalFit fit_marginal(const std::vector<ClusterData>& data, const ModelSpec& model, const FitControl& ctrl) {
    if (model.family.kind() == FamilyKind::Gaussian)
        throw std::invalid_argument("random-intercept marginal fit supports the Poisson and Bernoulli families");
    disable_gsl_abort();
    const MarginalProblem problem(data, model, ctrl.quadrature_nodes, ctrl);
    const auto p = problem.coefficient_count();

    // pooled GLM: starting point and the sigma^2 = 0 boundary model
    const ClusterData pooled = pool(data);
    Eigen::VectorXd start_beta = Eigen::VectorXd::Zero(p);
    start_beta(0) = model.family.link(model.family.clamp_mean(pooled.y.mean()));
    bool have_pooled = false;
    try {
        const ClusterFit pooled_fit = fit_cluster(pooled, model, ctrl);
        start_beta = pooled_fit.beta_hat;
        have_pooled = true;
    } catch (const FitError&) {
    }

    Objective objective;
    objective.problem = &problem;
    gsl_multimin_function_fdf fdf;
    fdf.n = static_cast<std::size_t>(p + 1);
    fdf.f = &Objective::f;
    fdf.df = &Objective::df;
    fdf.fdf = &Objective::fdf;
    fdf.params = &objective;

    std::unique_ptr<gsl_vector, VectorDeleter> x(gsl_vector_alloc(fdf.n));
    for (Eigen::Index k = 0; k < p; ++k) gsl_vector_set(x.get(), static_cast<std::size_t>(k), start_beta(k));
    gsl_vector_set(x.get(), static_cast<std::size_t>(p), std::log(0.1));

    std::unique_ptr<gsl_multimin_fdfminimizer, MinimizerDeleter> solver(
        gsl_multimin_fdfminimizer_alloc(gsl_multimin_fdfminimizer_vector_bfgs2, fdf.n));
    gsl_multimin_fdfminimizer_set(solver.get(), &fdf, x.get(), 0.05, 0.1);

    MarginalFit fit;
    fit.quadrature_nodes = ctrl.quadrature_nodes;
    int it = 0;
    for (; it < ctrl.optimizer_iterations; ++it) {
        const int status = gsl_multimin_fdfminimizer_iterate(solver.get());
        if (gsl_multimin_test_gradient(solver->gradient, ctrl.score_tolerance) == GSL_SUCCESS) {
            fit.converged = true;
            ++it;
            break;
        }
        if (status != GSL_SUCCESS) {
            // no further progress possible; accept if the gradient is nearly flat
            fit.converged = gsl_blas_dnrm2(solver->gradient) < 100.0 * ctrl.score_tolerance;
            ++it;
            break;
        }
    }
    fit.iterations = it;
    if (objective.best_theta.size() == 0) {
        if (objective.error) std::rethrow_exception(objective.error);
        throw NonFiniteIterate("marginal likelihood could not be evaluated at the starting point");
    }

    fit.beta_hat = objective.best_theta.head(p);
    fit.sigma0_sq_hat = std::exp(objective.best_theta(p));
    auto final_eval = problem.evaluate(fit.beta_hat, fit.sigma0_sq_hat, 1.0, false);

    // the pooled GLM maximizes the sigma^2 = 0 likelihood, so it is the boundary model
    if (have_pooled) {
        auto boundary_eval = problem.evaluate(start_beta, 0.0, 1.0, false);
        if (fit.sigma0_sq_hat < kBoundaryVariance || boundary_eval.value >= final_eval.value) {
            fit.boundary = true;
            fit.sigma0_sq_hat = 0.0;
            fit.beta_hat = start_beta;
            final_eval = std::move(boundary_eval);
        }
    } else if (fit.sigma0_sq_hat < kBoundaryVariance) {
        fit.boundary = true;
        fit.sigma0_sq_hat = 0.0;
        final_eval = problem.evaluate(fit.beta_hat, 0.0, 1.0, false);
    }
    fit.marginal_loglik = final_eval.value;
    fit.cluster_loglik = std::move(final_eval.cluster_values);
    fit.mAIC = -2.0 * fit.marginal_loglik + 2.0 * static_cast<double>(p + 1);
    return fit;
}

SelectionReport maic_select(const std::vector<ClusterData>& data, const std::vector<ModelSpec>& models,
                            const FitControl& ctrl, unsigned threads, double tie_tolerance) {
    if (data.empty()) throw std::invalid_argument("maic_select: no clusters");
    if (models.empty()) throw std::invalid_argument("maic_select: no models");
    const std::size_t K = data.size();
    const double nan = std::numeric_limits<double>::quiet_NaN();

    SelectionReport report;
    report.criterion_name = "mAIC-RI";
    report.K = K;
    report.included.assign(K, true);
    for (const auto& c : data) report.cluster_ids.push_back(c.cluster_id);
    report.per_model.resize(models.size());

    parallel_for(models.size(), threads, [&](std::size_t m) {
        auto& score = report.per_model[m];
        score.model = models[m];
        score.per_cluster.assign(K, nan);
        score.status.assign(K, ClusterStatus::Failed);
        try {
            const MarginalFit fit = fit_marginal(data, models[m], ctrl);
            score.value = fit.mAIC;
            score.converged = fit.converged;
            for (std::size_t i = 0; i < K; ++i) {
                score.per_cluster[i] = -2.0 * fit.cluster_loglik[i];
                score.status[i] = fit.converged ? ClusterStatus::Ok : ClusterStatus::NotConverged;
            }
        } catch (const FitError&) {
            score.value = nan;
            score.converged = false;
            score.non_converged = static_cast<int>(K);
        }
    });
    report.best = pick_best(report.per_model, tie_tolerance);
    return report;
}

}  // namespace meanaic
