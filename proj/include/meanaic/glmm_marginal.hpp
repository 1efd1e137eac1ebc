#pragma once

#include "meanaic/cluster_data.hpp"
#include "meanaic/criterion.hpp"
#include "meanaic/glm.hpp"
#include "meanaic/model_spec.hpp"

#include <Eigen/Dense>

#include <vector>

namespace meanaic {

/// Random-intercept GLMM fit by maximum marginal likelihood.
struct MarginalFit {
    Eigen::VectorXd beta_hat;
    double sigma0_sq_hat = 0.0;
    double marginal_loglik = 0.0;
    /// -2 * marginal_loglik + 2 * (p + 1).
    double mAIC = 0.0;
    int quadrature_nodes = 0;
    bool converged = false;
    /// Variance estimate collapsed to zero (below 1e-6).
    bool boundary = false;
    int iterations = 0;
    /// Per-cluster log marginal likelihood contributions at the estimate.
    std::vector<double> cluster_loglik;
};

/// Marginal log-likelihood and its gradient with respect to (beta, log sigma0^2).
struct MarginalEvaluation {
    double value = 0.0;
    std::vector<double> cluster_values;
    Eigen::VectorXd gradient;
};

/// Sum over clusters of log of the integral of prod_j f(y_ij | b) phi(b; 0, sigma0_sq) db,
/// where the random intercept b shifts the linear predictor. Each integral uses
/// adaptive Gauss-Hermite quadrature with `nodes` points. sigma0_sq = 0 gives
/// the ordinary pooled GLM log-likelihood at beta. `dispersion` is the
/// residual variance for the Gaussian family and is ignored otherwise.
double marginal_loglik(const std::vector<ClusterData>& data, const ModelSpec& model, const Eigen::VectorXd& beta,
                       double sigma0_sq, int nodes, double dispersion = 1.0);

/// Value, per-cluster contributions and gradient. The gradient is the
/// quadrature estimate of the posterior-expected complete-data score.
MarginalEvaluation evaluate_marginal(const std::vector<ClusterData>& data, const ModelSpec& model,
                                     const Eigen::VectorXd& beta, double sigma0_sq, int nodes,
                                     double dispersion = 1.0, const FitControl& ctrl = {});

/// Maximizes the marginal likelihood over (beta, log sigma0^2) with BFGS.
/// Poisson and Bernoulli families only. Never returns a fit worse than the
/// pooled GLM at sigma0^2 = 0.
MarginalFit fit_marginal(const std::vector<ClusterData>& data, const ModelSpec& model, const FitControl& ctrl = {});

/// Scores each model by mAIC of its random-intercept fit. Tie-breaking matches select().
SelectionReport maic_select(const std::vector<ClusterData>& data, const std::vector<ModelSpec>& models,
                            const FitControl& ctrl = {}, unsigned threads = 1, double tie_tolerance = 1e-10);

}  // namespace meanaic
