#include "meanaic/dataset_io.hpp"

#include "meanaic/errors.hpp"

#include <fmt/format.h>
#include <fmt/os.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <unordered_map>

namespace meanaic {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \r\n");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \r\n");
    return s.substr(first, last - first + 1);
}

bool parse_double(const std::string& text, double& out) {
    const char* begin = text.data();
    const char* end = begin + text.size();
    if (begin != end && *begin == '+') ++begin;
    const auto [ptr, ec] = std::from_chars(begin, end, out);
    return ec == std::errc() && ptr == end && begin != end;
}

std::string quote_field(const std::string& s) {
    if (s.find_first_of(",\"\t\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + '"';
}

}  // namespace

std::vector<std::string> split_delimited(const std::string& line, char delimiter) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (std::size_t k = 0; k < line.size(); ++k) {
        const char ch = line[k];
        if (quoted) {
            if (ch == '"') {
                if (k + 1 < line.size() && line[k + 1] == '"') {
                    field += '"';
                    ++k;
                } else {
                    quoted = false;
                }
            } else {
                field += ch;
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == delimiter) {
            fields.push_back(trim(field));
            field.clear();
        } else {
            field += ch;
        }
    }
    fields.push_back(trim(field));
    return fields;
}

std::vector<ClusterData> load_clusters(const std::filesystem::path& path, const DatasetSchema& schema) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path.string() + "'");

    std::string header;
    if (!std::getline(in, header)) throw ParseError("'" + path.string() + "' is empty", 1);
    if (header.rfind("\xEF\xBB\xBF", 0) == 0) header.erase(0, 3);
    const char delimiter = header.find('\t') != std::string::npos ? '\t' : ',';
    const auto names = split_delimited(header, delimiter);

    auto column_of = [&](const std::string& name) -> std::size_t {
        for (std::size_t k = 0; k < names.size(); ++k)
            if (names[k] == name) return k;
        throw MissingColumn("column '" + name + "' not found in header", 1);
    };
    std::vector<std::string> wanted{schema.cluster_column, schema.response_column};
    wanted.insert(wanted.end(), schema.covariate_columns.begin(), schema.covariate_columns.end());
    for (std::size_t a = 0; a < wanted.size(); ++a)
        for (std::size_t b = a + 1; b < wanted.size(); ++b)
            if (wanted[a] == wanted[b]) throw InputError("column '" + wanted[a] + "' is named more than once");
    const std::size_t cluster_col = column_of(schema.cluster_column);
    const std::size_t response_col = column_of(schema.response_column);
    std::vector<std::size_t> covariate_cols;
    for (const auto& c : schema.covariate_columns) covariate_cols.push_back(column_of(c));

    struct Rows {
        std::vector<double> y;
        std::vector<std::vector<double>> x;
    };
    std::vector<std::string> order;
    std::unordered_map<std::string, Rows> groups;

    std::string line;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split_delimited(line, delimiter);
        if (fields.size() != names.size())
            throw ParseError("expected " + std::to_string(names.size()) + " fields, found " +
                                 std::to_string(fields.size()),
                             line_no);

        double y = 0.0;
        if (!parse_double(fields[response_col], y) || !schema.family.valid_response(y))
            throw InvalidResponse("response '" + fields[response_col] + "' is not valid for the " +
                                      schema.family.name() + " family",
                                  line_no);
        std::vector<double> x(covariate_cols.size());
        for (std::size_t k = 0; k < covariate_cols.size(); ++k) {
            const auto& text = fields[covariate_cols[k]];
            if (!parse_double(text, x[k]) || !std::isfinite(x[k]))
                throw ParseError("covariate '" + schema.covariate_columns[k] + "' value '" + text +
                                     "' is not a finite number",
                                 line_no);
        }
        const auto& label = fields[cluster_col];
        auto [it, inserted] = groups.try_emplace(label);
        if (inserted) order.push_back(label);
        it->second.y.push_back(y);
        it->second.x.push_back(std::move(x));
    }
    if (order.empty()) throw ParseError("'" + path.string() + "' has no data rows", line_no);

    std::vector<ClusterData> clusters;
    clusters.reserve(order.size());
    const auto r = static_cast<Eigen::Index>(covariate_cols.size());
    for (const auto& label : order) {
        const Rows& rows = groups.at(label);
        const auto n = static_cast<Eigen::Index>(rows.y.size());
        ClusterData c{label, Eigen::VectorXd(n), Eigen::MatrixXd(n, r + 1)};
        for (Eigen::Index j = 0; j < n; ++j) {
            c.y(j) = rows.y[static_cast<std::size_t>(j)];
            c.X(j, 0) = 1.0;
            for (Eigen::Index k = 0; k < r; ++k) c.X(j, k + 1) = rows.x[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)];
        }
        clusters.push_back(std::move(c));
    }
    return clusters;
}

std::vector<std::pair<std::string, std::size_t>> cluster_summary(const std::vector<ClusterData>& clusters) {
    std::vector<std::pair<std::string, std::size_t>> out;
    out.reserve(clusters.size());
    for (const auto& c : clusters) out.emplace_back(c.cluster_id, static_cast<std::size_t>(c.size()));
    return out;
}

void write_clusters(const std::filesystem::path& path, const std::vector<ClusterData>& clusters,
                    const std::vector<std::string>& covariate_names, const std::string& cluster_column,
                    const std::string& response_column) {
    auto out = fmt::output_file(path.string());
    out.print("{},{}", quote_field(cluster_column), quote_field(response_column));
    for (const auto& name : covariate_names) out.print(",{}", quote_field(name));
    out.print("\n");
    for (const auto& c : clusters) {
        if (c.covariate_count() != static_cast<Eigen::Index>(covariate_names.size()))
            throw std::invalid_argument("write_clusters: covariate names do not match cluster '" + c.cluster_id + "'");
        for (Eigen::Index j = 0; j < c.size(); ++j) {
            out.print("{},{}", quote_field(c.cluster_id), c.y(j));
            for (Eigen::Index k = 1; k < c.X.cols(); ++k) out.print(",{}", c.X(j, k));
            out.print("\n");
        }
    }
}

}  // namespace meanaic
