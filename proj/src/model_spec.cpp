#include "meanaic/model_spec.hpp"

#include <algorithm>
#include <stdexcept>

namespace meanaic {

std::vector<int> ModelSpec::design_columns() const {
    std::vector<int> cols;
    cols.reserve(active_columns.size() + 1);
    cols.push_back(0);
    cols.insert(cols.end(), active_columns.begin(), active_columns.end());
    return cols;
}

std::string default_label(const std::vector<int>& active_columns,
                          const std::vector<std::string>& column_names) {
    if (active_columns.empty()) return "(intercept only)";
    std::string label;
    for (int c : active_columns) {
        if (!label.empty()) label += '+';
        const auto idx = static_cast<std::size_t>(c - 1);
        label += idx < column_names.size() ? column_names[idx] : "x" + std::to_string(c);
    }
    return label;
}

ModelSpec make_model(std::vector<int> active_columns, Family family,
                     const std::vector<std::string>& column_names) {
    std::sort(active_columns.begin(), active_columns.end());
    if (std::adjacent_find(active_columns.begin(), active_columns.end()) != active_columns.end())
        throw std::invalid_argument("model has duplicate covariate columns");
    if (!active_columns.empty() && active_columns.front() < 1)
        throw std::invalid_argument("covariate indices start at 1 (0 is the intercept)");
    auto label = default_label(active_columns, column_names);
    return ModelSpec{std::move(active_columns), family, std::move(label)};
}

}  // namespace meanaic
