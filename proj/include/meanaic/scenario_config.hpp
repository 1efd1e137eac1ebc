#pragma once

#include "meanaic/simulation.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace meanaic {

/// Parsed scenario file. sigma0_sq / sigma1_sq may list several values; they
/// are expanded into a cross-product only in grid mode.
///
/// Recognized keys (YAML mapping):
///   K, cluster_sizes (int or list), beta1, sigma0_sq, sigma1_sq (number or list),
///   re_law (normal | shifted-gamma | student-t), replicates, seed, intercept,
///   criteria (list of meanaic | maic | gic | gic:<lambda>), lambda.
struct ScenarioConfig {
    Scenario base;
    std::vector<double> sigma0_values;
    std::vector<double> sigma1_values;
    std::vector<CriterionChoice> criteria;
    double lambda = 2.0;

    /// One Scenario per (sigma0, sigma1) pair, sigma0 varying slowest.
    /// Without `grid`, more than one value for either variance is a ConfigError.
    std::vector<Scenario> expand(bool grid) const;
};

ScenarioConfig parse_scenario_config(const std::string& yaml_text);
ScenarioConfig load_scenario_config(const std::filesystem::path& path);

}  // namespace meanaic
