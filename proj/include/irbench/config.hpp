#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "irbench/clients.hpp"
#include "irbench/curate.hpp"

namespace irbench {

/// Declarative tool configuration (docs/config.md). Precedence when the CLI
/// assembles the effective value: flags > environment > file > defaults.
/// Environment overrides: IRBENCH_CONFIG, IRBENCH_CACHE_DIR,
/// IRBENCH_IMAGE_ROOT, IRBENCH_PROMPT_DIR, IRBENCH_REGISTRY.
struct Config {
    std::filesystem::path cache_dir = "cache";
    std::filesystem::path image_root = ".";
    std::filesystem::path prompt_dir = "prompts";
    std::filesystem::path registry;
    std::uint64_t seed = 0;
    std::map<std::string, EndpointConfig> endpoints;  // "judge", "edit", "vlm", ...
    CurateThresholds curate;
    std::string edit_prompt =
        "Translate the infrared image into the corresponding visible light (RGB) image.";
    int edit_max_side = 0;  // downscale bound before the edit call; 0 = pass-through

    std::optional<EndpointConfig> endpoint(const std::string& name) const;

    static Config load_file(const std::filesystem::path& path);
    void apply_env();
};

}  // namespace irbench
