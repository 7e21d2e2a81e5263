#include "irbench/visual_prompt.hpp"

#include "irbench/digest.hpp"
#include "irbench/errors.hpp"
#include "irbench/image_ops.hpp"
#include "irbench/log.hpp"

namespace irbench {

json TranslationRecord::to_json() const {
    return json{{"ir_digest", ir_digest}, {"rgb_digest", rgb_digest},
                {"model", model},         {"prompt", prompt},
                {"ir_width", ir_width},   {"ir_height", ir_height},
                {"rgb_width", rgb_width}, {"rgb_height", rgb_height}};
}

TranslationRecord TranslationRecord::from_json(const json& j) {
    TranslationRecord r;
    r.ir_digest = j.at("ir_digest").get<std::string>();
    r.rgb_digest = j.at("rgb_digest").get<std::string>();
    r.model = j.at("model").get<std::string>();
    r.prompt = j.at("prompt").get<std::string>();
    r.ir_width = j.at("ir_width").get<int>();
    r.ir_height = j.at("ir_height").get<int>();
    r.rgb_width = j.at("rgb_width").get<int>();
    r.rgb_height = j.at("rgb_height").get<int>();
    return r;
}

namespace {

std::string sanitize_component(const std::string& name) {
    std::string out = name.empty() ? "default" : name;
    for (char& c : out)
        if (c == '/' || c == '\\' || c == ':') c = '_';
    return out;
}

}  // namespace

Translator::Translator(EditClient& client, std::filesystem::path translations_dir,
                       std::string edit_prompt, int max_edit_side)
    : client_(client),
      dir_(std::move(translations_dir)),
      prompt_(std::move(edit_prompt)),
      max_edit_side_(max_edit_side) {
    std::filesystem::create_directories(dir_ / sanitize_component(client_.config().model));
}

std::optional<TranslationRecord> Translator::lookup(const std::string& ir_digest) const {
    auto base = dir_ / sanitize_component(client_.config().model) / ir_digest;
    auto record_path = base;
    record_path += ".json";
    std::error_code ec;
    if (!std::filesystem::is_regular_file(record_path, ec)) return std::nullopt;
    json j = json::parse(read_text_file(record_path), nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded()) return std::nullopt;
    auto record = TranslationRecord::from_json(j);
    record.rgb_path = base;
    record.rgb_path += ".png";
    if (!std::filesystem::is_regular_file(record.rgb_path, ec)) return std::nullopt;
    return record;
}

TranslationRecord Translator::translate(const std::vector<unsigned char>& ir_bytes) {
    if (!decode_info(ir_bytes)) throw DecodeFailure("translate: infrared image does not decode");
    std::string ir_digest = sha256_hex(ir_bytes);

    if (auto cached = lookup(ir_digest); cached && cached->prompt == prompt_) return *cached;

    std::promise<TranslationRecord> promise;
    std::shared_future<TranslationRecord> fut;
    bool leader = false;
    {
        std::unique_lock lock(mu_);
        auto it = in_flight_.find(ir_digest);
        if (it != in_flight_.end()) {
            fut = it->second;
        } else {
            fut = promise.get_future().share();
            in_flight_.emplace(ir_digest, fut);
            leader = true;
        }
    }
    if (!leader) return fut.get();

    try {
        TranslationRecord rec = do_translate(ir_bytes, ir_digest);
        {
            std::unique_lock lock(mu_);
            in_flight_.erase(ir_digest);
        }
        promise.set_value(rec);
        return rec;
    } catch (...) {
        {
            std::unique_lock lock(mu_);
            in_flight_.erase(ir_digest);
        }
        promise.set_exception(std::current_exception());
        throw;
    }
}

TranslationRecord Translator::do_translate(const std::vector<unsigned char>& ir_bytes,
                                           const std::string& ir_digest) {
    auto info = decode_info(ir_bytes);
    const std::vector<unsigned char>* to_send = &ir_bytes;
    std::vector<unsigned char> downscaled;
    int longest = std::max(info->width, info->height);
    if (max_edit_side_ > 0 && longest > max_edit_side_) {
        double scale = static_cast<double>(max_edit_side_) / longest;
        downscaled = resample_png(ir_bytes,
                                  std::max(1, static_cast<int>(info->width * scale)),
                                  std::max(1, static_cast<int>(info->height * scale)));
        to_send = &downscaled;
    }
    auto rgb = client_.edit_image(*to_send, prompt_);
    auto rgb_info = decode_info(rgb);
    if (!rgb_info) throw DecodeFailure("translated image does not decode");
    if (rgb_info->width != info->width || rgb_info->height != info->height) {
        log_info("resampling translation " + ir_digest.substr(0, 12) + " from " +
                 std::to_string(rgb_info->width) + "x" + std::to_string(rgb_info->height) +
                 " to source " + std::to_string(info->width) + "x" + std::to_string(info->height));
        rgb = resample_png(rgb, info->width, info->height);
        rgb_info = decode_info(rgb);
    }

    TranslationRecord rec;
    rec.ir_digest = ir_digest;
    rec.rgb_digest = sha256_hex(rgb);
    rec.model = client_.config().model;
    rec.prompt = prompt_;
    rec.ir_width = info->width;
    rec.ir_height = info->height;
    rec.rgb_width = rgb_info->width;
    rec.rgb_height = rgb_info->height;

    auto base = dir_ / sanitize_component(rec.model) / ir_digest;
    rec.rgb_path = base;
    rec.rgb_path += ".png";
    // Image first, record last: a record on disk implies its image exists.
    write_file_atomic(rec.rgb_path, std::string_view(reinterpret_cast<const char*>(rgb.data()),
                                                     rgb.size()));
    auto record_path = base;
    record_path += ".json";
    write_file_atomic(record_path, canonical_dump(rec.to_json()));
    return rec;
}

MessagePayload compose(const EvalTask& task, const PromptSet& prompts,
                       const std::vector<unsigned char>& ir_bytes,
                       const std::optional<std::vector<unsigned char>>& rgb_bytes) {
    if (mode_needs_translation(task.mode) && !rgb_bytes)
        throw MissingTranslation("mode " + std::string(mode_code(task.mode)) +
                                 " requires a translated image for task " + task.task_id);
    MessagePayload payload = render_prompt(task, prompts);
    for (auto& slot : payload.images) {
        if (slot.tag == "ir") {
            slot.bytes = ir_bytes;
        } else if (slot.tag == "rgb") {
            slot.bytes = *rgb_bytes;
        }
    }
    return payload;
}

}  // namespace irbench
