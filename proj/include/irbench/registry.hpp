#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "irbench/benchmark.hpp"
#include "irbench/clients.hpp"

namespace irbench {

/// Registry entry for one evaluated model. params_total is in billions and
/// uses the total parameter count for MoE models; it is absent for
/// closed-source models with unpublished sizes (those are excluded from
/// scale-correlation analyses). scores carries transcribed per-dimension
/// results when the registry doubles as an encoded score table.
struct ModelSpec {
    std::string name;
    std::string family;
    std::optional<double> params_total;
    std::optional<double> params_active;
    bool thinking = false;
    bool closed_source = false;
    std::optional<EndpointConfig> endpoint;
    std::optional<std::map<Dimension, double>> scores;

    json to_json() const;
    static ModelSpec from_json(const json& j);
};

struct Registry {
    std::vector<ModelSpec> models;
    // (thinking variant, non-thinking base) pairs for delta analyses.
    std::vector<std::pair<std::string, std::string>> thinking_pairs;

    const ModelSpec* find(const std::string& name) const;
    const ModelSpec& require(const std::string& name) const;  // throws MissingModel
};

Registry load_registry(const std::filesystem::path& path);
Registry parse_registry(const json& j);

}  // namespace irbench
