#include "meanaic/report_io.hpp"

#include <fmt/format.h>
#include <fmt/os.h>
#include <fmt/ostream.h>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace meanaic {

std::string format_number(double value) {
    if (std::isnan(value)) return "NA";
    return fmt::format("{}", value);
}

std::vector<std::size_t> ranking(const SelectionReport& report) {
    std::vector<std::size_t> order(report.per_model.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (a == report.best || b == report.best) return a == report.best && b != report.best;
        const double va = report.per_model[a].value;
        const double vb = report.per_model[b].value;
        if (std::isnan(va) != std::isnan(vb)) return std::isnan(vb);
        return va < vb;
    });
    return order;
}

void print_ranking(std::ostream& out, const SelectionReport& report) {
    const auto order = ranking(report);
    std::size_t width = 5;
    for (const auto& s : report.per_model) width = std::max(width, s.model.label.size());
    const double best = report.best_model().value;
    fmt::print(out, "{:>4}  {:<{}}  {:>12}  {:>10}  {:>13}\n", "rank", "model", width, report.criterion_name, "delta",
               "non-converged");
    for (std::size_t r = 0; r < order.size(); ++r) {
        const auto& s = report.per_model[order[r]];
        const std::string marker = order[r] == report.best ? "*" : " ";
        fmt::print(out, "{:>3}{}  {:<{}}  {:>12.2f}  {:>10.2f}  {:>13}\n", r + 1, marker, s.model.label, width, s.value,
                   s.value - best, s.non_converged);
    }
    const auto used = std::count(report.included.begin(), report.included.end(), true);
    fmt::print(out, "K = {} clusters ({} used)\n", report.K, used);
}

void write_ranking_csv(const std::filesystem::path& path, const SelectionReport& report) {
    auto out = fmt::output_file(path.string());
    out.print("rank,model,criterion,value,delta,best,non_converged\n");
    const auto order = ranking(report);
    const double best = report.best_model().value;
    for (std::size_t r = 0; r < order.size(); ++r) {
        const auto& s = report.per_model[order[r]];
        out.print("{},\"{}\",{},{},{},{},{}\n", r + 1, s.model.label, report.criterion_name, format_number(s.value),
                  format_number(s.value - best), order[r] == report.best ? 1 : 0, s.non_converged);
    }
}

void write_cluster_matrix_csv(const std::filesystem::path& path, const SelectionReport& report) {
    auto out = fmt::output_file(path.string());
    out.print("cluster,included");
    for (const auto& s : report.per_model) out.print(",\"{}\"", s.model.label);
    out.print("\n");
    for (std::size_t i = 0; i < report.K; ++i) {
        out.print("\"{}\",{}", report.cluster_ids[i], report.included[i] ? 1 : 0);
        for (const auto& s : report.per_model) out.print(",{}", format_number(s.per_cluster[i]));
        out.print("\n");
    }
}

void print_sim_table(std::ostream& out, const std::vector<SimReport>& reports) {
    if (reports.empty()) return;
    fmt::print(out, "{:>9} {:>9} {:>10}", "sigma0^2", "sigma1^2", "n_i");
    for (const auto& t : reports.front().tallies) fmt::print(out, " {:>9}", t.criterion.name());
    fmt::print(out, "\n");
    for (const auto& r : reports) {
        fmt::print(out, "{:>9} {:>9} {:>10}", format_number(r.scenario.sigma0_sq), format_number(r.scenario.sigma1_sq),
                   r.scenario.sizes_label());
        for (const auto& t : r.tallies) fmt::print(out, " {:>9.3f}", t.proportion_correct);
        fmt::print(out, "\n");
    }
}

void write_sim_summary_csv(const std::filesystem::path& path, const std::vector<SimReport>& reports) {
    auto out = fmt::output_file(path.string());
    out.print("sigma0_sq,sigma1_sq,cluster_sizes,beta1,re_law,replicates");
    if (!reports.empty())
        for (const auto& t : reports.front().tallies) out.print(",{}", t.criterion.name());
    out.print("\n");
    for (const auto& r : reports) {
        const auto& s = r.scenario;
        out.print("{},{},{},{},{},{}", format_number(s.sigma0_sq), format_number(s.sigma1_sq), s.sizes_label(),
                  format_number(s.beta1), to_string(s.re_law), s.replicates);
        for (const auto& t : r.tallies) out.print(",{}", format_number(t.proportion_correct));
        out.print("\n");
    }
}

void write_sim_histogram_csv(const std::filesystem::path& path, const std::vector<SimReport>& reports) {
    auto out = fmt::output_file(path.string());
    out.print("sigma0_sq,sigma1_sq,cluster_sizes,beta1,re_law,criterion");
    for (const auto& label : lattice_labels()) out.print(",{}", label);
    out.print(",failed\n");
    for (const auto& r : reports) {
        const auto& s = r.scenario;
        for (const auto& t : r.tallies) {
            out.print("{},{},{},{},{},{}", format_number(s.sigma0_sq), format_number(s.sigma1_sq), s.sizes_label(),
                      format_number(s.beta1), to_string(s.re_law), t.criterion.name());
            for (int count : t.histogram) out.print(",{}", count);
            out.print(",{}\n", t.failures);
        }
    }
}

}  // namespace meanaic
