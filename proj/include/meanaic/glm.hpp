#pragma once

#include "meanaic/cluster_data.hpp"
#include "meanaic/model_spec.hpp"

#include <Eigen/Dense>

namespace meanaic {

/// Iteration controls shared by the per-cluster GLM fit and the marginal fit.
struct FitControl {
    int max_iterations = 50;
    /// Relative deviance change |D_old - D| / (|D| + 0.1).
    double deviance_tolerance = 1e-8;
    /// Max absolute component of the average-scale score.
    double score_tolerance = 1e-6;
    /// |beta_k| above this stops a Poisson/Bernoulli fit as divergent.
    double divergence_bound = 30.0;
    /// Pivots below rank_tolerance * leading pivot count as rank loss.
    double rank_tolerance = 1e-10;
    /// Adaptive Gauss-Hermite nodes for marginal likelihoods.
    int quadrature_nodes = 15;
    /// Quasi-Newton iteration cap for the marginal fit.
    int optimizer_iterations = 200;
};

/// Cluster-level summaries consumed by two-step methods.
struct ClusterFit {
    Eigen::Index n = 0;
    Eigen::VectorXd beta_hat;
    /// Maximized log-likelihood divided by n.
    double max_avg_loglik = 0.0;
    /// Hessian of the average log-likelihood at beta_hat (regression block).
    Eigen::MatrixXd hessian;
    /// Profiled Gaussian variance; 1 for the other families.
    double dispersion = 1.0;
    bool converged = false;
    int iterations = 0;

    /// Sum-scale maximized log-likelihood, n * max_avg_loglik.
    double max_loglik() const { return static_cast<double>(n) * max_avg_loglik; }
};

struct LogLik {
    double sum = 0.0;
    double average = 0.0;
};

/// Design matrix restricted to the model's columns (intercept first).
Eigen::MatrixXd active_design(const ClusterData& data, const ModelSpec& model);

/// Fits the model to one cluster by Fisher scoring.
///
/// Rows are put into a canonical order before fitting, so permuting the
/// observations of a cluster gives a bit-identical result.
///
/// Throws TooFewObservations, DegenerateDesign (with the offending design
/// columns) or NonFiniteIterate. Hitting the iteration cap is not an error:
/// the best iterate is returned with converged = false.
ClusterFit fit_cluster(const ClusterData& data, const ModelSpec& model, const FitControl& ctrl = {});

/// Exact log-likelihood at beta, including constant terms. For the Gaussian
/// family the variance is profiled at beta (RSS / n); a zero residual sum
/// throws DomainError.
LogLik loglik(const ClusterData& data, const ModelSpec& model, const Eigen::VectorXd& beta);

/// Gradient of the average log-likelihood at beta.
Eigen::VectorXd average_score(const ClusterData& data, const ModelSpec& model, const Eigen::VectorXd& beta);

/// Hessian of the average log-likelihood at beta (Gaussian: at the profiled variance).
Eigen::MatrixXd average_hessian(const ClusterData& data, const ModelSpec& model, const Eigen::VectorXd& beta);

/// Parameters counted by AIC: coefficients, plus one for a profiled variance.
int effective_parameters(const ModelSpec& model);

/// -2 * max_loglik + 2 * p_effective. Non-converged fits are still scored;
/// callers flag them.
double cluster_aic(const ClusterFit& fit, int p_effective);

}  // namespace meanaic
