#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace meanaic {

/// One cluster's responses and covariates.
///
/// `X` has n rows and r + 1 columns; column 0 is the intercept and is all ones.
/// Columns 1..r hold the covariates in dataset order.
struct ClusterData {
    std::string cluster_id;
    Eigen::VectorXd y;
    Eigen::MatrixXd X;

    Eigen::Index size() const { return y.size(); }
    /// Number of covariates r (excluding the intercept).
    Eigen::Index covariate_count() const { return X.cols() - 1; }
};

class Family;

/// Throws std::invalid_argument when `data` breaks a ClusterData invariant
/// (empty, shape mismatch, non-finite entries, column 0 not all ones, or a
/// response outside the family support).
void validate(const ClusterData& data, const Family& family);

/// Stacks every cluster into one pooled cluster (used for pooled GLM fits).
ClusterData pool(const std::vector<ClusterData>& clusters);

}  // namespace meanaic
