#include "irbench/vqagen.hpp"

#include <set>

#include "irbench/errors.hpp"
#include "irbench/log.hpp"
#include "irbench/prompts.hpp"

namespace irbench {

json VqaDraft::to_json() const {
    json q;
    for (const auto& [lang, text] : question) q[lang] = text;
    return json{{"question", q},
                {"options", options},
                {"answer", answer_index},
                {"uncalibrated", uncalibrated}};
}

namespace {

// Finds the first top-level json array in the reply (models often wrap the
// answer in prose or markdown fences).
std::optional<json> extract_json_array(const std::string& text) {
    for (std::size_t start = text.find('['); start != std::string::npos;
         start = text.find('[', start + 1)) {
        int depth = 0;
        bool in_string = false;
        bool escaped = false;
        for (std::size_t i = start; i < text.size(); ++i) {
            char c = text[i];
            if (in_string) {
                if (escaped)
                    escaped = false;
                else if (c == '\\')
                    escaped = true;
                else if (c == '"')
                    in_string = false;
                continue;
            }
            if (c == '"') in_string = true;
            else if (c == '[') ++depth;
            else if (c == ']') {
                --depth;
                if (depth == 0) {
                    json j = json::parse(text.substr(start, i - start + 1), nullptr,
                                         /*allow_exceptions=*/false);
                    if (!j.is_discarded() && j.is_array()) return j;
                    break;  // try the next '['
                }
            }
        }
    }
    return std::nullopt;
}

std::optional<VqaDraft> validate_candidate(const json& cand, std::string& reason) {
    if (!cand.is_object()) {
        reason = "candidate is not an object";
        return std::nullopt;
    }
    VqaDraft d;
    if (!cand.contains("question") || !cand["question"].is_object()) {
        reason = "missing question object";
        return std::nullopt;
    }
    for (std::string_view lang : kLanguages) {
        std::string key(lang);
        if (!cand["question"].contains(key) || !cand["question"][key].is_string() ||
            cand["question"][key].get<std::string>().empty()) {
            reason = "missing question text for language '" + key + "'";
            return std::nullopt;
        }
        d.question[key] = cand["question"][key].get<std::string>();
    }
    if (!cand.contains("options") || !cand["options"].is_array() || cand["options"].size() != 4) {
        reason = "options must be an array of 4";
        return std::nullopt;
    }
    std::set<std::string> distinct;
    for (std::size_t i = 0; i < 4; ++i) {
        if (!cand["options"][i].is_string() || cand["options"][i].get<std::string>().empty()) {
            reason = "option " + std::to_string(i) + " is empty";
            return std::nullopt;
        }
        d.options[i] = cand["options"][i].get<std::string>();
        if (!distinct.insert(d.options[i]).second) {
            reason = "duplicate option text";
            return std::nullopt;
        }
    }
    if (!cand.contains("answer") || !cand["answer"].is_string()) {
        reason = "missing answer letter";
        return std::nullopt;
    }
    std::string answer = cand["answer"].get<std::string>();
    if (answer.size() != 1 || answer[0] < 'A' || answer[0] > 'D') {
        reason = "answer must be a single letter A-D";
        return std::nullopt;
    }
    d.answer_index = answer[0] - 'A';
    return d;
}

}  // namespace

VqaGenResult generate_vqa(const std::vector<unsigned char>& image,
                          const std::optional<VqaAnnotation>& annotation, ChatClient& client,
                          const std::string& prompt_template) {
    if (prompt_template.empty()) throw ConfigError("vqa generation prompt template is empty");

    MessagePayload payload;
    payload.system_text = fill_template(
        prompt_template, {{"description", annotation ? annotation->description : "(none)"},
                          {"bbox", annotation ? annotation->bbox : "(none)"}});
    payload.user_text = "Generate the questions for this image.";
    payload.images = {ImageSlot{"ir", image}};

    ModelResponse resp = client.chat(payload);

    VqaGenResult result;
    result.raw_text = resp.raw_text;
    auto array = extract_json_array(resp.raw_text);
    if (!array) throw ParseFailure(resp.raw_text);

    for (const auto& cand : *array) {
        if (result.drafts.size() == 4) {
            result.truncated = true;
            log_warn("generate_vqa: more than four candidates, truncating");
            break;
        }
        std::string reason;
        if (auto draft = validate_candidate(cand, reason)) {
            result.drafts.push_back(std::move(*draft));
        } else {
            result.rejected.push_back(reason);
        }
    }
    return result;
}

}  // namespace irbench
