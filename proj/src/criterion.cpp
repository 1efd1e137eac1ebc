#include "meanaic/criterion.hpp"

#include "meanaic/errors.hpp"
#include "meanaic/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <set>
#include <sstream>

namespace meanaic {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string format_lambda(double lambda) {
    std::ostringstream os;
    os << lambda;
    return os.str();
}

}  // namespace

// -------------------------------------------------------------------------
// Lattice
// -------------------------------------------------------------------------

std::vector<ModelSpec> enumerate_models(std::vector<int> candidates, std::vector<int> forced, Family family,
                                        const std::vector<std::string>& column_names) {
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    std::sort(forced.begin(), forced.end());
    forced.erase(std::unique(forced.begin(), forced.end()), forced.end());
    if (candidates.size() > kMaxCandidates)
        throw LatticeTooLarge(std::to_string(candidates.size()) + " candidates exceed the cap of " +
                              std::to_string(kMaxCandidates));
    for (int c : candidates)
        if (std::binary_search(forced.begin(), forced.end(), c))
            throw std::invalid_argument("column " + std::to_string(c) + " is both candidate and forced");

    const std::size_t m = candidates.size();
    std::vector<std::vector<int>> subsets;
    subsets.reserve(std::size_t{1} << m);
    for (std::size_t mask = 0; mask < (std::size_t{1} << m); ++mask) {
        std::vector<int> s;
        for (std::size_t k = 0; k < m; ++k)
            if (mask & (std::size_t{1} << k)) s.push_back(candidates[k]);
        subsets.push_back(std::move(s));
    }
    std::stable_sort(subsets.begin(), subsets.end(), [](const auto& a, const auto& b) {
        if (a.size() != b.size()) return a.size() < b.size();
        return a < b;
    });

    std::vector<ModelSpec> models;
    models.reserve(subsets.size());
    for (auto& s : subsets) {
        s.insert(s.end(), forced.begin(), forced.end());
        models.push_back(make_model(std::move(s), family, column_names));
    }
    return models;
}

// -------------------------------------------------------------------------
// Criterion values
// -------------------------------------------------------------------------

double generalized_ic(std::span<const ClusterFit> fits, int p_effective, double lambda) {
    if (!(lambda >= 0.0)) throw std::invalid_argument("penalty weight must be non-negative");
    if (fits.empty()) throw std::invalid_argument("no cluster fits supplied");
    double total = 0.0;
    std::size_t used = 0;
    for (const auto& f : fits) {
        if (!f.converged) continue;
        total += -2.0 * f.max_loglik() + lambda * p_effective;
        ++used;
    }
    if (used == 0) throw AllClustersSkipped("every cluster fit was flagged as non-converged");
    return total / static_cast<double>(used);
}

double mean_aic(std::span<const ClusterFit> fits, int p_effective) {
    return generalized_ic(fits, p_effective, 2.0);
}

// -------------------------------------------------------------------------
// Names
// -------------------------------------------------------------------------

SkipPolicy parse_skip_policy(std::string_view name) {
    if (name == "fail-fast") return SkipPolicy::FailFast;
    if (name == "drop" || name == "drop-cluster" || name == "drop-cluster-from-all-models")
        return SkipPolicy::DropCluster;
    if (name == "impute-worst") return SkipPolicy::ImputeWorst;
    throw std::invalid_argument("unknown skip policy '" + std::string(name) + "'");
}

std::string to_string(SkipPolicy policy) {
    switch (policy) {
        case SkipPolicy::FailFast: return "fail-fast";
        case SkipPolicy::DropCluster: return "drop-cluster";
        case SkipPolicy::ImputeWorst: return "impute-worst";
    }
    return "?";
}

PenaltyMode parse_penalty_mode(std::string_view name) {
    if (name == "per-model") return PenaltyMode::PerModel;
    if (name == "fixed-r") return PenaltyMode::FixedFull;
    throw std::invalid_argument("unknown penalty mode '" + std::string(name) + "'");
}

std::string to_string(ClusterStatus status) {
    switch (status) {
        case ClusterStatus::Ok: return "ok";
        case ClusterStatus::NotConverged: return "not-converged";
        case ClusterStatus::Failed: return "failed";
        case ClusterStatus::Imputed: return "imputed";
        case ClusterStatus::Dropped: return "dropped";
    }
    return "?";
}

// -------------------------------------------------------------------------
// Selection
// -------------------------------------------------------------------------

std::size_t pick_best(std::span<const ModelScore> scores, double tie_tolerance) {
    std::optional<std::size_t> best;
    for (std::size_t m = 0; m < scores.size(); ++m) {
        const auto& cand = scores[m];
        if (!std::isfinite(cand.value)) continue;
        if (!best) {
            best = m;
            continue;
        }
        const auto& cur = scores[*best];
        const double scale = std::max({1.0, std::abs(cand.value), std::abs(cur.value)});
        const double diff = cand.value - cur.value;
        if (diff < -tie_tolerance * scale) {
            best = m;
        } else if (std::abs(diff) <= tie_tolerance * scale) {
            const auto& a = cand.model.active_columns;
            const auto& b = cur.model.active_columns;
            if (a.size() < b.size() || (a.size() == b.size() && a < b)) best = m;
        }
    }
    if (!best) throw AllClustersSkipped("no model has a finite criterion value");
    return *best;
}

SelectionReport select(const std::vector<ClusterData>& data, const std::vector<ModelSpec>& models,
                       const FitControl& ctrl, const SelectOptions& options) {
    if (data.empty()) throw std::invalid_argument("select: no clusters");
    if (models.empty()) throw std::invalid_argument("select: no models");
    if (!(options.lambda >= 0.0)) throw std::invalid_argument("penalty weight must be non-negative");

    const std::size_t K = data.size();
    const std::size_t M = models.size();

    int full_dim = 0;
    if (options.penalty == PenaltyMode::FixedFull) {
        std::set<int> all;
        for (const auto& m : models) all.insert(m.active_columns.begin(), m.active_columns.end());
        full_dim = static_cast<int>(all.size()) + 1 + (models.front().family.profiles_dispersion() ? 1 : 0);
    }

    struct Cell {
        ClusterStatus status = ClusterStatus::Failed;
        double value = kNaN;
        std::string message;
    };
    std::vector<Cell> cells(K * M);
    parallel_for(K * M, options.threads, [&](std::size_t task) {
        const std::size_t i = task / M;
        const std::size_t m = task % M;
        Cell& cell = cells[task];
        try {
            const ClusterFit fit = fit_cluster(data[i], models[m], ctrl);
            const int p = options.penalty == PenaltyMode::FixedFull ? full_dim : effective_parameters(models[m]);
            cell.value = -2.0 * fit.max_loglik() + options.lambda * p;
            cell.status = fit.converged ? ClusterStatus::Ok : ClusterStatus::NotConverged;
            if (!fit.converged) cell.message = "iteration cap reached";
        } catch (const FitError& e) {
            cell.status = ClusterStatus::Failed;
            cell.message = e.what();
        }
    });

    SelectionReport report;
    report.criterion_name = options.lambda == 2.0 ? "meanAIC" : "GIC(lambda=" + format_lambda(options.lambda) + ")";
    report.K = K;
    report.included.assign(K, true);
    for (const auto& c : data) report.cluster_ids.push_back(c.cluster_id);

    report.per_model.resize(M);
    for (std::size_t m = 0; m < M; ++m) {
        auto& score = report.per_model[m];
        score.model = models[m];
        score.per_cluster.assign(K, kNaN);
        score.status.assign(K, ClusterStatus::Ok);
        for (std::size_t i = 0; i < K; ++i) {
            const Cell& cell = cells[i * M + m];
            score.status[i] = cell.status;
            if (cell.status != ClusterStatus::Ok) ++score.non_converged;
            if (cell.status != ClusterStatus::Failed) score.per_cluster[i] = cell.value;
        }
    }

    for (std::size_t i = 0; i < K; ++i) {
        bool any_bad = false;
        double worst = -std::numeric_limits<double>::infinity();
        bool any_ok = false;
        for (std::size_t m = 0; m < M; ++m) {
            const Cell& cell = cells[i * M + m];
            if (cell.status == ClusterStatus::Ok) {
                any_ok = true;
                worst = std::max(worst, cell.value);
            } else {
                any_bad = true;
                if (options.skip_policy == SkipPolicy::FailFast)
                    throw SelectionAborted("cluster '" + data[i].cluster_id + "' under model " + models[m].label +
                                               ": " + cell.message,
                                           i, m);
            }
        }
        if (!any_bad) continue;
        if (options.skip_policy == SkipPolicy::ImputeWorst && any_ok) {
            for (auto& score : report.per_model) {
                if (score.status[i] != ClusterStatus::Ok) {
                    score.status[i] = ClusterStatus::Imputed;
                    score.per_cluster[i] = worst;
                }
            }
        } else {
            report.included[i] = false;
            for (auto& score : report.per_model)
                if (score.status[i] == ClusterStatus::Ok) score.status[i] = ClusterStatus::Dropped;
        }
    }

    const auto used = static_cast<std::size_t>(std::count(report.included.begin(), report.included.end(), true));
    if (used == 0) throw AllClustersSkipped("every cluster failed under at least one model");
    for (auto& score : report.per_model) {
        double total = 0.0;
        for (std::size_t i = 0; i < K; ++i)
            if (report.included[i]) total += score.per_cluster[i];
        score.value = total / static_cast<double>(used);
    }
    report.best = pick_best(report.per_model, options.tie_tolerance);
    return report;
}

}  // namespace meanaic
