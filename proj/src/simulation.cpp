#include "meanaic/simulation.hpp"

#include "meanaic/errors.hpp"
#include "meanaic/glmm_marginal.hpp"
#include "meanaic/parallel.hpp"

#include <boost/random/bernoulli_distribution.hpp>
#include <boost/random/gamma_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/poisson_distribution.hpp>
#include <boost/random/student_t_distribution.hpp>
#include <boost/random/uniform_int_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>

#include <chrono>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace meanaic {

RandomEffectLaw parse_re_law(std::string_view name) {
    if (name == "normal") return RandomEffectLaw::Normal;
    if (name == "shifted-gamma" || name == "gamma") return RandomEffectLaw::ShiftedGamma;
    if (name == "student-t" || name == "t") return RandomEffectLaw::StudentT;
    throw std::invalid_argument("unknown random-effect law '" + std::string(name) + "'");
}

std::string to_string(RandomEffectLaw law) {
    switch (law) {
        case RandomEffectLaw::Normal: return "normal";
        case RandomEffectLaw::ShiftedGamma: return "shifted-gamma";
        case RandomEffectLaw::StudentT: return "student-t";
    }
    return "?";
}

void Scenario::validate() const {
    if (K < 1) throw std::invalid_argument("K must be at least 1");
    if (cluster_sizes.empty()) throw std::invalid_argument("cluster_sizes must not be empty");
    for (int n : cluster_sizes)
        if (n < 1) throw std::invalid_argument("cluster sizes must be positive");
    if (!(sigma0_sq >= 0.0) || !(sigma1_sq >= 0.0)) throw std::invalid_argument("variances must be non-negative");
    if (replicates < 1) throw std::invalid_argument("replicates must be at least 1");
    if (!std::isfinite(beta1) || !std::isfinite(intercept)) throw std::invalid_argument("coefficients must be finite");
}

std::string Scenario::sizes_label() const {
    std::string out;
    for (int n : cluster_sizes) out += (out.empty() ? "" : "|") + std::to_string(n);
    return out;
}

double draw_random_effect(RandomEffectLaw law, double variance, Engine& rng) {
    if (variance == 0.0) return 0.0;
    const double sd = std::sqrt(variance);
    switch (law) {
        case RandomEffectLaw::Normal: {
            boost::random::normal_distribution<double> d(0.0, sd);
            return d(rng);
        }
        case RandomEffectLaw::ShiftedGamma: {
            // shape 4, scale theta: variance 4 theta^2, mean 4 theta
            const double theta = sd / 2.0;
            boost::random::gamma_distribution<double> d(4.0, theta);
            return d(rng) - 4.0 * theta;
        }
        case RandomEffectLaw::StudentT: {
            // t_3 has variance 3
            boost::random::student_t_distribution<double> d(3.0);
            return d(rng) * sd / std::sqrt(3.0);
        }
    }
    return 0.0;
}

std::vector<ClusterData> generate_dataset(const Scenario& s, int replicate_index) {
    s.validate();
    std::vector<ClusterData> clusters;
    clusters.reserve(static_cast<std::size_t>(s.K));
    for (int i = 0; i < s.K; ++i) {
        Engine rng = make_stream({s.base_seed, static_cast<std::uint64_t>(replicate_index), static_cast<std::uint64_t>(i)});
        int n = s.cluster_sizes.front();
        if (s.cluster_sizes.size() > 1) {
            boost::random::uniform_int_distribution<std::size_t> pick(0, s.cluster_sizes.size() - 1);
            n = s.cluster_sizes[pick(rng)];
        }
        const double b0 = draw_random_effect(s.re_law, s.sigma0_sq, rng);
        const double b1 = draw_random_effect(s.re_law, s.sigma1_sq, rng);

        ClusterData c;
        c.cluster_id = "c" + std::to_string(i + 1);
        c.y.resize(n);
        c.X.resize(n, 3);
        boost::random::bernoulli_distribution<double> coin(0.5);
        boost::random::uniform_real_distribution<double> unif(0.0, 1.0);
        for (int j = 0; j < n; ++j) {
            const double x1 = coin(rng) ? 1.0 : 0.0;
            const double x2 = unif(rng);
            const double mean = std::exp(s.intercept + b0 + (s.beta1 + b1) * x1);
            boost::random::poisson_distribution<long, double> pois(mean);
            c.X(j, 0) = 1.0;
            c.X(j, 1) = x1;
            c.X(j, 2) = x2;
            c.y(j) = static_cast<double>(pois(rng));
        }
        clusters.push_back(std::move(c));
    }
    return clusters;
}

std::string CriterionChoice::name() const {
    switch (kind) {
        case CriterionKind::MeanAIC: return "meanAIC";
        case CriterionKind::MarginalAIC: return "mAIC";
        case CriterionKind::GeneralizedIC: {
            std::ostringstream os;
            os << "GIC(" << lambda << ")";
            return os.str();
        }
    }
    return "?";
}

CriterionChoice parse_criterion(std::string_view text, double default_lambda) {
    std::string lower(text);
    for (auto& ch : lower) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    if (lower == "meanaic") return {CriterionKind::MeanAIC, 2.0};
    if (lower == "maic" || lower == "maic-ri") return {CriterionKind::MarginalAIC, 2.0};
    if (lower == "gic") return {CriterionKind::GeneralizedIC, default_lambda};
    if (lower.rfind("gic:", 0) == 0) {
        const double lambda = std::stod(lower.substr(4));
        if (!(lambda >= 0.0)) throw std::invalid_argument("penalty weight must be non-negative");
        return {CriterionKind::GeneralizedIC, lambda};
    }
    throw std::invalid_argument("unknown criterion '" + std::string(text) + "'");
}

const std::array<std::string, kLatticeSize>& lattice_labels() {
    static const std::array<std::string, kLatticeSize> labels{"null", "x1", "x2", "x1+x2"};
    return labels;
}

const CriterionTally& SimReport::tally(CriterionKind kind) const {
    for (const auto& t : tallies)
        if (t.criterion.kind == kind) return t;
    throw std::out_of_range("criterion not part of this report");
}

SimReport run_scenario(const Scenario& s, const std::vector<CriterionChoice>& criteria, const RunOptions& options) {
    s.validate();
    if (criteria.empty()) throw std::invalid_argument("no criteria requested");
    const auto start = std::chrono::steady_clock::now();
    const auto models = enumerate_models({1, 2}, {}, Family::poisson(), {"x1", "x2"});

    std::vector<ReplicateRecord> records(static_cast<std::size_t>(s.replicates));
    parallel_for(records.size(), options.workers, [&](std::size_t r) {
        ReplicateRecord& rec = records[r];
        rec.replicate = static_cast<int>(r);
        rec.winners.assign(criteria.size(), -1);
        rec.errors.assign(criteria.size(), "");
        const auto data = generate_dataset(s, static_cast<int>(r));
        for (std::size_t c = 0; c < criteria.size(); ++c) {
            try {
                SelectionReport report;
                switch (criteria[c].kind) {
                    case CriterionKind::MarginalAIC: report = maic_select(data, models, options.ctrl); break;
                    case CriterionKind::MeanAIC:
                    case CriterionKind::GeneralizedIC: {
                        SelectOptions opts;
                        opts.lambda = criteria[c].kind == CriterionKind::MeanAIC ? 2.0 : criteria[c].lambda;
                        report = select(data, models, options.ctrl, opts);
                        break;
                    }
                }
                rec.winners[c] = static_cast<int>(report.best);
            } catch (const Error& e) {
                rec.errors[c] = e.what();
            }
        }
    });

    SimReport out;
    out.scenario = s;
    for (const auto& c : criteria) out.tallies.push_back(CriterionTally{c, {}, 0, 0.0});
    for (const auto& rec : records) {
        for (std::size_t c = 0; c < criteria.size(); ++c) {
            if (rec.winners[c] < 0) ++out.tallies[c].failures;
            else ++out.tallies[c].histogram[static_cast<std::size_t>(rec.winners[c])];
        }
    }
    for (auto& t : out.tallies)
        t.proportion_correct = static_cast<double>(t.histogram[kTrueModel]) / static_cast<double>(s.replicates);
    if (options.keep_replicate_log) out.per_replicate_log = std::move(records);
    out.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

}  // namespace meanaic
