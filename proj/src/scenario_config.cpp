#include "meanaic/scenario_config.hpp"

#include "meanaic/errors.hpp"

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <set>
#include <sstream>

namespace meanaic {

namespace {

const std::set<std::string> kKnownKeys{"K",         "cluster_sizes", "beta1",   "sigma0_sq", "sigma1_sq", "re_law",
                                       "replicates", "seed",          "intercept", "criteria", "lambda"};

template <typename T>
T scalar(const YAML::Node& node, const std::string& key, const char* expected) {
    if (!node.IsScalar()) throw ConfigError("scenario." + key + ": expected " + expected);
    try {
        return node.as<T>();
    } catch (const YAML::Exception&) {
        throw ConfigError("scenario." + key + ": expected " + expected + ", got '" + node.Scalar() + "'");
    }
}

template <typename T>
std::vector<T> scalar_or_list(const YAML::Node& node, const std::string& key, const char* expected) {
    std::vector<T> out;
    if (node.IsSequence()) {
        for (std::size_t k = 0; k < node.size(); ++k)
            out.push_back(scalar<T>(node[k], key + "[" + std::to_string(k) + "]", expected));
        if (out.empty()) throw ConfigError("scenario." + key + ": list must not be empty");
    } else {
        out.push_back(scalar<T>(node, key, expected));
    }
    return out;
}

}  // namespace

ScenarioConfig parse_scenario_config(const std::string& yaml_text) {
    YAML::Node root;
    try {
        root = YAML::Load(yaml_text);
    } catch (const YAML::ParserException& e) {
        throw ConfigError(std::string("scenario: ") + e.what(), static_cast<std::size_t>(e.mark.line + 1));
    }
    if (!root.IsMap()) throw ConfigError("scenario: expected a mapping of keys to values");

    for (const auto& kv : root) {
        const auto key = kv.first.as<std::string>();
        if (!kKnownKeys.count(key)) throw ConfigError("scenario." + key + ": unknown key");
    }

    ScenarioConfig cfg;
    Scenario& s = cfg.base;
    if (root["K"]) s.K = scalar<int>(root["K"], "K", "an integer");
    if (root["cluster_sizes"]) s.cluster_sizes = scalar_or_list<int>(root["cluster_sizes"], "cluster_sizes", "an integer");
    if (root["beta1"]) s.beta1 = scalar<double>(root["beta1"], "beta1", "a number");
    if (root["intercept"]) s.intercept = scalar<double>(root["intercept"], "intercept", "a number");
    if (root["replicates"]) s.replicates = scalar<int>(root["replicates"], "replicates", "an integer");
    if (root["seed"]) s.base_seed = scalar<std::uint64_t>(root["seed"], "seed", "a non-negative integer");
    if (root["re_law"]) {
        const auto law = scalar<std::string>(root["re_law"], "re_law", "a law name");
        try {
            s.re_law = parse_re_law(law);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("scenario.re_law: ") + e.what());
        }
    }
    cfg.sigma0_values = root["sigma0_sq"] ? scalar_or_list<double>(root["sigma0_sq"], "sigma0_sq", "a number")
                                          : std::vector<double>{s.sigma0_sq};
    cfg.sigma1_values = root["sigma1_sq"] ? scalar_or_list<double>(root["sigma1_sq"], "sigma1_sq", "a number")
                                          : std::vector<double>{s.sigma1_sq};
    s.sigma0_sq = cfg.sigma0_values.front();
    s.sigma1_sq = cfg.sigma1_values.front();
    if (root["lambda"]) cfg.lambda = scalar<double>(root["lambda"], "lambda", "a number");
    if (root["criteria"]) {
        const auto names = scalar_or_list<std::string>(root["criteria"], "criteria", "a criterion name");
        for (std::size_t k = 0; k < names.size(); ++k) {
            try {
                cfg.criteria.push_back(parse_criterion(names[k], cfg.lambda));
            } catch (const std::exception& e) {
                throw ConfigError("scenario.criteria[" + std::to_string(k) + "]: " + e.what());
            }
        }
    }
    for (double v : cfg.sigma0_values)
        if (!(v >= 0.0)) throw ConfigError("scenario.sigma0_sq: variances must be non-negative");
    for (double v : cfg.sigma1_values)
        if (!(v >= 0.0)) throw ConfigError("scenario.sigma1_sq: variances must be non-negative");
    try {
        s.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("scenario: ") + e.what());
    }
    return cfg;
}

ScenarioConfig load_scenario_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open scenario file '" + path.string() + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_scenario_config(buffer.str());
}

std::vector<Scenario> ScenarioConfig::expand(bool grid) const {
    if (!grid && (sigma0_values.size() > 1 || sigma1_values.size() > 1))
        throw ConfigError(std::string("scenario.") + (sigma0_values.size() > 1 ? "sigma0_sq" : "sigma1_sq") +
                          ": several values need --grid");
    std::vector<Scenario> out;
    for (double s0 : sigma0_values) {
        for (double s1 : sigma1_values) {
            Scenario s = base;
            s.sigma0_sq = s0;
            s.sigma1_sq = s1;
            out.push_back(s);
        }
    }
    return out;
}

}  // namespace meanaic
