#pragma once

#include <filesystem>
#include <future>
#include <map>
#include <mutex>
#include <optional>
#include <string>

#include "irbench/clients.hpp"
#include "irbench/expand.hpp"

namespace irbench {

/// One cached infrared -> RGB translation, keyed by (ir digest, edit model,
/// edit prompt) and reused across runs.
struct TranslationRecord {
    std::string ir_digest;
    std::string rgb_digest;
    std::string model;
    std::string prompt;
    int ir_width = 0, ir_height = 0;
    int rgb_width = 0, rgb_height = 0;
    std::filesystem::path rgb_path;

    json to_json() const;
    static TranslationRecord from_json(const json& j);
};

/// Translates infrared images through the edit endpoint, materializing
/// results under <dir>/<model>/<ir_digest>.png with a .json record alongside.
/// translate() is idempotent and concurrently callable; a per-digest
/// single-flight guard bounds edit calls to one per unique infrared image.
/// When the backend returns a different size, the result is resampled back to
/// the source resolution so spatial questions stay comparable.
class Translator {
public:
    /// max_edit_side > 0 downscales the infrared image (aspect preserved)
    /// before the edit call; 0 forwards it untouched. The result is always
    /// materialized at the source resolution either way.
    Translator(EditClient& client, std::filesystem::path translations_dir, std::string edit_prompt,
               int max_edit_side = 0);

    TranslationRecord translate(const std::vector<unsigned char>& ir_bytes);

    /// Cached record lookup without any network activity.
    std::optional<TranslationRecord> lookup(const std::string& ir_digest) const;

private:
    TranslationRecord do_translate(const std::vector<unsigned char>& ir_bytes,
                                   const std::string& ir_digest);

    EditClient& client_;
    std::filesystem::path dir_;
    std::string prompt_;
    int max_edit_side_;
    std::mutex mu_;
    std::map<std::string, std::shared_future<TranslationRecord>> in_flight_;
};

/// Binds image bytes to a rendered task payload according to its mode:
/// IF/IF_TEXT -> [ir]; RGB -> [rgb]; IF_RGB/IF_RGB_TEXT -> [ir, rgb], infrared
/// always first. The prior is already injected by render_prompt for *_TEXT
/// modes. Throws MissingTranslation when the mode needs rgb bytes that were
/// not supplied.
MessagePayload compose(const EvalTask& task, const PromptSet& prompts,
                       const std::vector<unsigned char>& ir_bytes,
                       const std::optional<std::vector<unsigned char>>& rgb_bytes);

}  // namespace irbench
