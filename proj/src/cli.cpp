#include "meanaic/cli.hpp"

#include "meanaic/criterion.hpp"
#include "meanaic/dataset_io.hpp"
#include "meanaic/errors.hpp"
#include "meanaic/glmm_marginal.hpp"
#include "meanaic/parallel.hpp"
#include "meanaic/report_io.hpp"
#include "meanaic/scenario_config.hpp"
#include "meanaic/simulation.hpp"

#include <CLI11.hpp>
#include <fmt/chrono.h>
#include <fmt/format.h>
#include <fmt/os.h>
#include <fmt/ostream.h>

#include <chrono>
#include <filesystem>
#include <optional>

namespace meanaic {

namespace {

namespace fs = std::filesystem;

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    for (auto& field : split_delimited(text, ','))
        if (!field.empty()) out.push_back(field);
    return out;
}

// Timestamps and timings live here so the other outputs stay byte-identical across runs.
void write_metadata(const fs::path& dir, const std::string& command, double wall_time, unsigned threads) {
    auto out = fmt::output_file((dir / "metadata.txt").string());
    out.print("command: {}\n", command);
    out.print("finished: {:%Y-%m-%dT%H:%M:%S}\n", fmt::localtime(std::time(nullptr)));
    out.print("wall_time_seconds: {:.3f}\n", wall_time);
    out.print("threads: {}\n", threads);
}

struct SelectArgs {
    std::string data;
    std::string cluster;
    std::string response;
    std::string family = "poisson";
    std::string candidates;
    std::string forced;
    std::string criterion = "meanaic";
    double lambda = 2.0;
    std::string skip_policy = "drop-cluster";
    std::string penalty = "per-model";
    std::string out_dir;
    unsigned threads = 0;
    int nodes = 15;
};

int cmd_select(const SelectArgs& a, std::ostream& out, std::ostream& err) {
    const auto start = std::chrono::steady_clock::now();
    const unsigned threads = a.threads ? a.threads : default_thread_count();

    const auto candidate_names = split_list(a.candidates);
    const auto forced_names = split_list(a.forced);
    const Family family = Family::parse(a.family);
    DatasetSchema schema{a.cluster, a.response, candidate_names, family};
    schema.covariate_columns.insert(schema.covariate_columns.end(), forced_names.begin(), forced_names.end());

    std::vector<int> candidates;
    std::vector<int> forced;
    for (std::size_t k = 0; k < candidate_names.size(); ++k) candidates.push_back(static_cast<int>(k) + 1);
    for (std::size_t k = 0; k < forced_names.size(); ++k)
        forced.push_back(static_cast<int>(candidate_names.size() + k) + 1);

    std::vector<ClusterData> clusters;
    try {
        clusters = load_clusters(a.data, schema);
        for (const auto& c : clusters) validate(c, family);
    } catch (const InputError& e) {
        fmt::print(err, "error: {}\n", e.what());
        return kExitDataError;
    } catch (const std::invalid_argument& e) {
        fmt::print(err, "error: {}\n", e.what());
        return kExitDataError;
    }
    const auto models = enumerate_models(candidates, forced, family, schema.covariate_columns);

    FitControl ctrl;
    ctrl.quadrature_nodes = a.nodes;
    SelectionReport report;
    try {
        const auto criterion = parse_criterion(a.criterion, a.lambda);
        if (criterion.kind == CriterionKind::MarginalAIC) {
            report = maic_select(clusters, models, ctrl, threads);
        } else {
            SelectOptions opts;
            opts.skip_policy = parse_skip_policy(a.skip_policy);
            opts.penalty = parse_penalty_mode(a.penalty);
            opts.lambda = criterion.kind == CriterionKind::MeanAIC ? 2.0 : criterion.lambda;
            opts.threads = threads;
            report = select(clusters, models, ctrl, opts);
        }
    } catch (const SelectionAborted& e) {
        fmt::print(err, "fit failure: {}\n", e.what());
        return kExitFitFailure;
    } catch (const AllClustersSkipped& e) {
        fmt::print(err, "fit failure: {}\n", e.what());
        return kExitFitFailure;
    }

    print_ranking(out, report);
    for (const auto& s : report.per_model)
        if (s.non_converged > 0 || !s.converged)
            fmt::print(err, "warning: model {} has {} flagged clusters{}\n", s.model.label, s.non_converged,
                       s.converged ? "" : " and did not converge");
    if (!a.out_dir.empty()) {
        fs::create_directories(a.out_dir);
        write_ranking_csv(fs::path(a.out_dir) / "ranking.csv", report);
        write_cluster_matrix_csv(fs::path(a.out_dir) / "cluster_aic.csv", report);
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        write_metadata(a.out_dir, "select", wall, threads);
    }
    return kExitOk;
}

struct SimulateArgs {
    std::string scenario;
    std::optional<int> replicates;
    std::optional<std::uint64_t> seed;
    std::string criteria;
    std::optional<double> lambda;
    unsigned threads = 0;
    std::string out_dir;
    bool grid = false;
    bool log = false;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out, std::ostream& err) {
    const auto start = std::chrono::steady_clock::now();
    const unsigned threads = a.threads ? a.threads : default_thread_count();
    ScenarioConfig cfg;
    std::vector<Scenario> scenarios;
    std::vector<CriterionChoice> criteria;
    try {
        cfg = load_scenario_config(a.scenario);
        if (a.replicates) cfg.base.replicates = *a.replicates;
        if (a.seed) cfg.base.base_seed = *a.seed;
        const double lambda = a.lambda.value_or(cfg.lambda);
        if (!a.criteria.empty()) {
            for (const auto& name : split_list(a.criteria)) criteria.push_back(parse_criterion(name, lambda));
        } else if (!cfg.criteria.empty()) {
            criteria = cfg.criteria;
        } else {
            criteria = {{CriterionKind::MeanAIC, 2.0}, {CriterionKind::MarginalAIC, 2.0}};
        }
        cfg.base.validate();
        scenarios = cfg.expand(a.grid);
    } catch (const InputError& e) {
        fmt::print(err, "error: {}\n", e.what());
        return kExitDataError;
    } catch (const std::invalid_argument& e) {
        fmt::print(err, "error: {}\n", e.what());
        return kExitDataError;
    }

    RunOptions options;
    options.workers = threads;
    options.keep_replicate_log = a.log;
    std::vector<SimReport> reports;
    for (const auto& s : scenarios) {
        reports.push_back(run_scenario(s, criteria, options));
        for (const auto& t : reports.back().tallies)
            if (t.failures > 0)
                fmt::print(err, "warning: sigma0^2={} sigma1^2={}: {} replicate(s) failed under {}\n",
                           format_number(s.sigma0_sq), format_number(s.sigma1_sq), t.failures, t.criterion.name());
    }
    print_sim_table(out, reports);

    if (!a.out_dir.empty()) {
        const fs::path dir(a.out_dir);
        fs::create_directories(dir);
        write_sim_summary_csv(dir / "summary.csv", reports);
        write_sim_histogram_csv(dir / "histogram.csv", reports);
        if (a.log) {
            auto f = fmt::output_file((dir / "replicates.csv").string());
            f.print("sigma0_sq,sigma1_sq,replicate,criterion,winner,error\n");
            for (const auto& r : reports)
                for (const auto& rec : r.per_replicate_log)
                    for (std::size_t c = 0; c < rec.winners.size(); ++c)
                        f.print("{},{},{},{},{},\"{}\"\n", format_number(r.scenario.sigma0_sq),
                                format_number(r.scenario.sigma1_sq), rec.replicate, r.tallies[c].criterion.name(),
                                rec.winners[c] < 0 ? "NA" : lattice_labels()[static_cast<std::size_t>(rec.winners[c])],
                                rec.errors[c]);
        }
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        write_metadata(dir, "simulate", wall, threads);
    }
    return kExitOk;
}

struct GenerateArgs {
    std::string scenario;
    int replicate = 0;
    std::optional<std::uint64_t> seed;
    std::string output;
};

int cmd_generate(const GenerateArgs& a, std::ostream& out, std::ostream& err) {
    Scenario s;
    try {
        const auto cfg = load_scenario_config(a.scenario);
        s = cfg.expand(false).front();
        if (a.seed) s.base_seed = *a.seed;
    } catch (const InputError& e) {
        fmt::print(err, "error: {}\n", e.what());
        return kExitDataError;
    }
    const auto clusters = generate_dataset(s, a.replicate);
    write_clusters(a.output, clusters, {"x1", "x2"});
    fmt::print(out, "wrote {} clusters to {}\n", clusters.size(), a.output);
    return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Covariate selection for clustered GLM data by meanAIC"};
    app.require_subcommand(1);

    SelectArgs sel;
    auto* select_cmd = app.add_subcommand("select", "Rank all candidate submodels on a clustered dataset");
    select_cmd->add_option("--data", sel.data, "Delimited data file (comma or tab)")->required();
    select_cmd->add_option("--cluster", sel.cluster, "Cluster label column")->required();
    select_cmd->add_option("--response", sel.response, "Response column")->required();
    select_cmd->add_option("--family", sel.family, "poisson, bernoulli or gaussian");
    select_cmd->add_option("--candidates", sel.candidates, "Comma-separated candidate covariates")->required();
    select_cmd->add_option("--forced", sel.forced, "Comma-separated covariates kept in every model");
    select_cmd->add_option("--criterion", sel.criterion, "meanaic, maic-ri or gic");
    select_cmd->add_option("--lambda", sel.lambda, "Penalty weight for gic")->check(CLI::NonNegativeNumber);
    select_cmd->add_option("--skip-policy", sel.skip_policy, "fail-fast, drop-cluster or impute-worst");
    select_cmd->add_option("--penalty", sel.penalty, "per-model or fixed-r");
    select_cmd->add_option("--nodes", sel.nodes, "Adaptive Gauss-Hermite nodes for maic-ri")->check(CLI::PositiveNumber);
    select_cmd->add_option("--out", sel.out_dir, "Directory for ranking.csv and cluster_aic.csv");
    select_cmd->add_option("--threads", sel.threads, "Worker threads (default: MEANAIC_THREADS or all cores)");

    SimulateArgs sim;
    auto* simulate_cmd = app.add_subcommand("simulate", "Run a simulation scenario and tabulate proportion correct");
    simulate_cmd->add_option("--scenario", sim.scenario, "Scenario YAML file")->required();
    simulate_cmd->add_option("--replicates", sim.replicates, "Override replicate count")->check(CLI::PositiveNumber);
    simulate_cmd->add_option("--seed", sim.seed, "Override base seed");
    simulate_cmd->add_option("--criteria", sim.criteria, "Comma-separated: meanaic, maic, gic, gic:<lambda>");
    simulate_cmd->add_option("--lambda", sim.lambda, "Penalty weight for gic")->check(CLI::NonNegativeNumber);
    simulate_cmd->add_option("--threads", sim.threads, "Worker threads (default: MEANAIC_THREADS or all cores)");
    simulate_cmd->add_option("--out", sim.out_dir, "Directory for summary.csv and histogram.csv");
    simulate_cmd->add_flag("--grid", sim.grid, "Expand listed sigma0_sq x sigma1_sq values");
    simulate_cmd->add_flag("--log", sim.log, "Also write per-replicate winners to replicates.csv");

    GenerateArgs gen;
    auto* generate_cmd = app.add_subcommand("generate", "Write one simulated replicate as a delimited file");
    generate_cmd->add_option("--scenario", gen.scenario, "Scenario YAML file")->required();
    generate_cmd->add_option("--replicate", gen.replicate, "Replicate index")->check(CLI::NonNegativeNumber);
    generate_cmd->add_option("--seed", gen.seed, "Override base seed");
    generate_cmd->add_option("--output", gen.output, "Output file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*select_cmd) return cmd_select(sel, out, err);
        if (*simulate_cmd) return cmd_simulate(sim, out, err);
        if (*generate_cmd) return cmd_generate(gen, out, err);
    } catch (const LatticeTooLarge& e) {
        fmt::print(err, "error: {}\n", e.what());
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        fmt::print(err, "error: {}\n", e.what());
        return kExitUsage;
    } catch (const std::exception& e) {
        fmt::print(err, "error: {}\n", e.what());
        return kExitFitFailure;
    }
    return kExitUsage;
}

}  // namespace meanaic
