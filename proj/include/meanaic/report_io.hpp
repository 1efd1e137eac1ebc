#pragma once

#include "meanaic/criterion.hpp"
#include "meanaic/simulation.hpp"

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

namespace meanaic {

/// Model indices ordered best first, then by increasing criterion value.
std::vector<std::size_t> ranking(const SelectionReport& report);

/// Aligned table: rank, model, criterion value and delta from best (2
/// decimals), non-converged count; the selected model is starred.
void print_ranking(std::ostream& out, const SelectionReport& report);

/// ranking.csv: rank,model,criterion,value,delta,best,non_converged (full precision).
void write_ranking_csv(const std::filesystem::path& path, const SelectionReport& report);

/// Clusters x models matrix of per-cluster values with an `included` column.
void write_cluster_matrix_csv(const std::filesystem::path& path, const SelectionReport& report);

/// Table-1 style aligned table: one row per scenario, one column per criterion.
void print_sim_table(std::ostream& out, const std::vector<SimReport>& reports);

/// summary.csv: sigma0_sq,sigma1_sq,cluster_sizes,beta1,re_law,replicates,<criterion>...
void write_sim_summary_csv(const std::filesystem::path& path, const std::vector<SimReport>& reports);

/// histogram.csv: one row per (scenario, criterion) with winner counts and failures.
void write_sim_histogram_csv(const std::filesystem::path& path, const std::vector<SimReport>& reports);

/// Shortest round-trip text for a double; "NA" for NaN.
std::string format_number(double value);

}  // namespace meanaic
