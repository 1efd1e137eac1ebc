#pragma once

#include "meanaic/cluster_data.hpp"
#include "meanaic/family.hpp"

#include <cstddef>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace meanaic {

/// Which columns of a delimited file hold the cluster label, the response and
/// the covariates.
struct DatasetSchema {
    std::string cluster_column;
    std::string response_column;
    std::vector<std::string> covariate_columns;
    Family family;
};

/// Reads a comma- or tab-delimited file (delimiter detected from the header)
/// and groups rows by exact cluster label. Clusters appear in order of first
/// occurrence; rows keep file order within a cluster. Covariate j of the
/// schema becomes column j + 1 of each design matrix.
///
/// Throws MissingColumn, ParseError or InvalidResponse; row errors carry the
/// 1-based file line.
std::vector<ClusterData> load_clusters(const std::filesystem::path& path, const DatasetSchema& schema);

/// Cluster labels with their row counts, in cluster order.
std::vector<std::pair<std::string, std::size_t>> cluster_summary(const std::vector<ClusterData>& clusters);

/// Writes clusters back out as a comma-delimited file with columns
/// (cluster_column, response_column, covariate names...). Numbers use the
/// shortest representation that reads back to the same double.
void write_clusters(const std::filesystem::path& path, const std::vector<ClusterData>& clusters,
                    const std::vector<std::string>& covariate_names, const std::string& cluster_column = "cluster",
                    const std::string& response_column = "y");

/// Splits one delimited line, honoring double-quoted fields ("" escapes a quote).
std::vector<std::string> split_delimited(const std::string& line, char delimiter);

}  // namespace meanaic
