#pragma once

#include "meanaic/cluster_data.hpp"
#include "meanaic/glm.hpp"
#include "meanaic/model_spec.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace meanaic {

inline constexpr std::size_t kMaxCandidates = 20;

/// All 2^|candidates| subsets of `candidates`, each joined with `forced`.
/// Ordered by number of candidates drawn, then lexicographically.
/// Throws LatticeTooLarge above kMaxCandidates and std::invalid_argument when
/// the two sets overlap.
std::vector<ModelSpec> enumerate_models(std::vector<int> candidates, std::vector<int> forced, Family family,
                                        const std::vector<std::string>& column_names = {});

/// Average of cluster AICs over converged fits. Throws AllClustersSkipped when
/// no fit converged.
double mean_aic(std::span<const ClusterFit> fits, int p_effective);

/// K^-1 sum_i [-2 max_loglik_i + lambda * p_effective]; lambda = 2 is mean_aic.
double generalized_ic(std::span<const ClusterFit> fits, int p_effective, double lambda);

enum class SkipPolicy { FailFast, DropCluster, ImputeWorst };
SkipPolicy parse_skip_policy(std::string_view name);
std::string to_string(SkipPolicy policy);

enum class PenaltyMode {
    /// Each submodel is penalized by its own dimension.
    PerModel,
    /// Every submodel is penalized by the dimension of the largest model in the lattice.
    FixedFull,
};
PenaltyMode parse_penalty_mode(std::string_view name);

enum class ClusterStatus { Ok, NotConverged, Failed, Imputed, Dropped };
std::string to_string(ClusterStatus status);

struct ModelScore {
    ModelSpec model;
    /// Criterion value over the included clusters.
    double value = 0.0;
    /// Length K. For meanAIC/GIC the per-cluster AIC (or penalized deviance);
    /// for mAIC the cluster's -2 log marginal likelihood contribution. NaN
    /// where no value exists.
    std::vector<double> per_cluster;
    std::vector<ClusterStatus> status;
    /// Clusters whose fit under this model failed or did not converge.
    int non_converged = 0;
    /// Optimizer-level flag; only used by whole-sample criteria such as mAIC.
    bool converged = true;
};

struct SelectionReport {
    std::string criterion_name;
    std::size_t K = 0;
    std::vector<std::string> cluster_ids;
    std::vector<ModelScore> per_model;
    std::size_t best = 0;
    /// Clusters entering every model's average.
    std::vector<bool> included;

    const ModelScore& best_model() const { return per_model.at(best); }
};

struct SelectOptions {
    SkipPolicy skip_policy = SkipPolicy::DropCluster;
    PenaltyMode penalty = PenaltyMode::PerModel;
    /// Penalty per parameter; 2 gives meanAIC.
    double lambda = 2.0;
    unsigned threads = 1;
    /// Values within tie_tolerance * max(1, |value|) are ties.
    double tie_tolerance = 1e-10;
};

/// Index of the minimum-value model. Ties go to fewer covariates, then to the
/// lexicographically smaller active set, then to the earlier entry.
std::size_t pick_best(std::span<const ModelScore> scores, double tie_tolerance);

/// Fits every (cluster, model) pair and scores each model by the average
/// penalized cluster deviance. With lambda = 2 this is meanAIC.
SelectionReport select(const std::vector<ClusterData>& data, const std::vector<ModelSpec>& models,
                       const FitControl& ctrl = {}, const SelectOptions& options = {});

}  // namespace meanaic
