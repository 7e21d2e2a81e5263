#include "irbench/config.hpp"

#include <cstdlib>

#include "irbench/errors.hpp"

namespace irbench {

std::optional<EndpointConfig> Config::endpoint(const std::string& name) const {
    auto it = endpoints.find(name);
    if (it == endpoints.end()) return std::nullopt;
    return it->second;
}

Config Config::load_file(const std::filesystem::path& path) {
    json j = json::parse(read_text_file(path), nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded()) throw ConfigError("config is not valid json: " + path.string());
    Config cfg;
    if (j.contains("cache_dir")) cfg.cache_dir = j["cache_dir"].get<std::string>();
    if (j.contains("image_root")) cfg.image_root = j["image_root"].get<std::string>();
    if (j.contains("prompt_dir")) cfg.prompt_dir = j["prompt_dir"].get<std::string>();
    if (j.contains("registry")) cfg.registry = j["registry"].get<std::string>();
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("endpoints"))
        for (const auto& [name, ej] : j["endpoints"].items())
            cfg.endpoints[name] = EndpointConfig::from_json(ej);
    if (j.contains("curate")) cfg.curate = CurateThresholds::from_json(j["curate"]);
    if (j.contains("edit_prompt")) cfg.edit_prompt = j["edit_prompt"].get<std::string>();
    if (j.contains("edit_max_side")) cfg.edit_max_side = j["edit_max_side"].get<int>();
    return cfg;
}

void Config::apply_env() {
    if (const char* v = std::getenv("IRBENCH_CACHE_DIR"); v && *v) cache_dir = v;
    if (const char* v = std::getenv("IRBENCH_IMAGE_ROOT"); v && *v) image_root = v;
    if (const char* v = std::getenv("IRBENCH_PROMPT_DIR"); v && *v) prompt_dir = v;
    if (const char* v = std::getenv("IRBENCH_REGISTRY"); v && *v) registry = v;
}

}  // namespace irbench
