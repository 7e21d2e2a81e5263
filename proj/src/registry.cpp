#include "irbench/registry.hpp"

#include <set>

#include "irbench/errors.hpp"

namespace irbench {

json ModelSpec::to_json() const {
    json j{{"name", name},
           {"family", family},
           {"thinking", thinking},
           {"closed_source", closed_source}};
    if (params_total) j["params_total"] = *params_total;
    if (params_active) j["params_active"] = *params_active;
    if (endpoint) j["endpoint"] = endpoint->to_json();
    if (scores) {
        json s;
        for (const auto& [d, v] : *scores) s[std::string(dimension_code(d))] = v;
        j["scores"] = s;
    }
    return j;
}

ModelSpec ModelSpec::from_json(const json& j) {
    ModelSpec m;
    m.name = j.at("name").get<std::string>();
    m.family = j.value("family", "");
    if (j.contains("params_total")) m.params_total = j["params_total"].get<double>();
    if (j.contains("params_active")) m.params_active = j["params_active"].get<double>();
    m.thinking = j.value("thinking", false);
    m.closed_source = j.value("closed_source", false);
    if (j.contains("endpoint")) m.endpoint = EndpointConfig::from_json(j["endpoint"]);
    if (j.contains("scores")) {
        std::map<Dimension, double> s;
        for (const auto& [code, v] : j["scores"].items()) {
            auto d = parse_dimension(code);
            if (!d) throw ConfigError("registry: unknown dimension code '" + code + "' for " + m.name);
            s[*d] = v.get<double>();
        }
        m.scores = std::move(s);
    }
    if (m.params_total && *m.params_total <= 0)
        throw ConfigError("registry: params_total must be > 0 for " + m.name);
    if (m.params_active && m.params_total && *m.params_active > *m.params_total)
        throw ConfigError("registry: params_active exceeds params_total for " + m.name);
    return m;
}

const ModelSpec* Registry::find(const std::string& name) const {
    for (const auto& m : models)
        if (m.name == name) return &m;
    return nullptr;
}

const ModelSpec& Registry::require(const std::string& name) const {
    const ModelSpec* m = find(name);
    if (!m) throw MissingModel(name);
    return *m;
}

Registry parse_registry(const json& j) {
    Registry r;
    for (const auto& mj : j.at("models")) r.models.push_back(ModelSpec::from_json(mj));
    if (j.contains("thinking_pairs")) {
        for (const auto& p : j["thinking_pairs"]) {
            if (!p.is_array() || p.size() != 2)
                throw ConfigError("registry: thinking_pairs entries must be [thinking, base]");
            r.thinking_pairs.emplace_back(p[0].get<std::string>(), p[1].get<std::string>());
        }
    }
    std::set<std::string> names;
    for (const auto& m : r.models)
        if (!names.insert(m.name).second) throw ConfigError("registry: duplicate model " + m.name);
    return r;
}

Registry load_registry(const std::filesystem::path& path) {
    json j = json::parse(read_text_file(path), nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded()) throw ConfigError("registry is not valid json: " + path.string());
    return parse_registry(j);
}

}  // namespace irbench
