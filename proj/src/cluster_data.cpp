#include "meanaic/cluster_data.hpp"

#include "meanaic/family.hpp"

#include <stdexcept>

namespace meanaic {

void validate(const ClusterData& data, const Family& family) {
    const auto n = data.y.size();
    if (n < 1) throw std::invalid_argument("cluster '" + data.cluster_id + "' is empty");
    if (data.X.rows() != n || data.X.cols() < 1)
        throw std::invalid_argument("cluster '" + data.cluster_id + "': design shape does not match response");
    if (!data.X.allFinite())
        throw std::invalid_argument("cluster '" + data.cluster_id + "': non-finite covariate");
    if ((data.X.col(0).array() != 1.0).any())
        throw std::invalid_argument("cluster '" + data.cluster_id + "': column 0 must be all ones");
    for (Eigen::Index j = 0; j < n; ++j) {
        if (!family.valid_response(data.y(j)))
            throw std::invalid_argument("cluster '" + data.cluster_id + "': response " +
                                        std::to_string(data.y(j)) + " invalid for " + family.name());
    }
}

ClusterData pool(const std::vector<ClusterData>& clusters) {
    if (clusters.empty()) throw std::invalid_argument("pool: no clusters");
    Eigen::Index rows = 0;
    const auto cols = clusters.front().X.cols();
    for (const auto& c : clusters) {
        if (c.X.cols() != cols) throw std::invalid_argument("pool: clusters disagree on column count");
        rows += c.size();
    }
    ClusterData out{"pooled", Eigen::VectorXd(rows), Eigen::MatrixXd(rows, cols)};
    Eigen::Index at = 0;
    for (const auto& c : clusters) {
        out.y.segment(at, c.size()) = c.y;
        out.X.middleRows(at, c.size()) = c.X;
        at += c.size();
    }
    return out;
}

}  // namespace meanaic
