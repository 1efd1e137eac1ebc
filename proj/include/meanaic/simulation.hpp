#pragma once

#include "meanaic/cluster_data.hpp"
#include "meanaic/criterion.hpp"
#include "meanaic/glm.hpp"
#include "meanaic/rng.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace meanaic {

enum class RandomEffectLaw { Normal, ShiftedGamma, StudentT };
RandomEffectLaw parse_re_law(std::string_view name);
std::string to_string(RandomEffectLaw law);

/// One simulation configuration for the Poisson random-coefficient design
///   log E[Y_ij | b_0i, b_1i] = intercept + b_0i + (beta1 + b_1i) x_ij1,
/// with x_ij1 ~ Bernoulli(0.5) and a decoy x_ij2 ~ Uniform(0, 1).
struct Scenario {
    int K = 20;
    /// One entry: every cluster has that size. Several: each cluster draws
    /// its size uniformly from the set.
    std::vector<int> cluster_sizes{80};
    double beta1 = 0.2;
    double sigma0_sq = 0.005;
    double sigma1_sq = 0.005;
    RandomEffectLaw re_law = RandomEffectLaw::Normal;
    int replicates = 500;
    std::uint64_t base_seed = 1;
    double intercept = 0.3;

    /// Throws std::invalid_argument when an invariant is broken.
    void validate() const;
    std::string sizes_label() const;
};

/// Mean-zero draw with the given variance: normal, gamma(shape 4) shifted to
/// mean zero, or a t with 3 degrees of freedom rescaled.
double draw_random_effect(RandomEffectLaw law, double variance, Engine& rng);

/// Replicate `replicate_index` of the scenario; deterministic in
/// (base_seed, replicate_index). Columns of X: intercept, x1, x2.
std::vector<ClusterData> generate_dataset(const Scenario& s, int replicate_index);

enum class CriterionKind { MeanAIC, MarginalAIC, GeneralizedIC };

struct CriterionChoice {
    CriterionKind kind = CriterionKind::MeanAIC;
    /// Penalty weight for GeneralizedIC.
    double lambda = 2.0;

    std::string name() const;
};

/// Parses "meanaic", "maic" / "maic-ri", "gic" or "gic:<lambda>".
CriterionChoice parse_criterion(std::string_view text, double default_lambda = 2.0);

/// The fixed lattice over candidates {x1, x2}: null, x1, x2, x1+x2.
inline constexpr std::size_t kLatticeSize = 4;
/// Index of the data-generating model {x1} in that lattice.
inline constexpr std::size_t kTrueModel = 1;

struct CriterionTally {
    CriterionChoice criterion;
    /// Winners per lattice entry.
    std::array<int, kLatticeSize> histogram{};
    /// Replicates where the criterion could not be evaluated.
    int failures = 0;
    double proportion_correct = 0.0;
};

struct ReplicateRecord {
    int replicate = 0;
    /// Winning lattice index per criterion; -1 on failure.
    std::vector<int> winners;
    std::vector<std::string> errors;
};

struct SimReport {
    Scenario scenario;
    std::vector<CriterionTally> tallies;
    std::vector<ReplicateRecord> per_replicate_log;
    double wall_time = 0.0;

    const CriterionTally& tally(CriterionKind kind) const;
};

struct RunOptions {
    unsigned workers = 1;
    FitControl ctrl{};
    bool keep_replicate_log = false;
};

/// Runs every replicate, scores each criterion over the 4-model lattice and
/// tabulates winners. Results are identical for any worker count.
SimReport run_scenario(const Scenario& s, const std::vector<CriterionChoice>& criteria, const RunOptions& options = {});

/// Lattice labels in order.
const std::array<std::string, kLatticeSize>& lattice_labels();

}  // namespace meanaic
