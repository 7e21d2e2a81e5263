#include "irbench/prompts.hpp"

#include <algorithm>

#include "irbench/digest.hpp"
#include "irbench/errors.hpp"
#include "irbench/jsonl.hpp"

namespace irbench {

const std::string& PromptSet::require(const std::string& key) const {
    auto it = templates.find(key);
    if (it == templates.end() || it->second.empty()) throw MissingTemplate(key);
    return it->second;
}

const std::string& PromptSet::eval_system(const std::string& language, bool dual_image) const {
    return require(std::string("eval_") + (dual_image ? "dual_" : "single_") + language);
}

const std::string& PromptSet::prior(const std::string& language) const {
    auto it = templates.find("prior_" + language);
    if (it == templates.end() || it->second.empty())
        throw MissingPrior("no textual prior for language '" + language + "'");
    return it->second;
}

namespace {

std::string compute_digest(const std::map<std::string, std::string>& templates) {
    std::string buf;
    for (const auto& [key, text] : templates) {
        buf += key;
        buf += '\0';
        buf += text;
        buf += '\0';
    }
    return sha256_hex(buf);
}

std::string strip_trailing_newlines(std::string s) {
    while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
    return s;
}

}  // namespace

PromptSet load_prompt_set(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir))
        throw ConfigError("prompt directory not found: " + dir.string());
    PromptSet set;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
        set.templates[entry.path().stem().string()] =
            strip_trailing_newlines(read_text_file(entry.path()));
    }
    set.digest = compute_digest(set.templates);
    return set;
}

PromptSet make_prompt_set(std::map<std::string, std::string> templates) {
    PromptSet set;
    set.templates = std::move(templates);
    set.digest = compute_digest(set.templates);
    return set;
}

std::string fill_template(const std::string& tpl,
                          const std::map<std::string, std::string>& values) {
    std::string out;
    out.reserve(tpl.size());
    std::size_t pos = 0;
    while (pos < tpl.size()) {
        auto open = tpl.find('{', pos);
        if (open == std::string::npos) {
            out.append(tpl, pos, std::string::npos);
            break;
        }
        auto close = tpl.find('}', open);
        if (close == std::string::npos) {
            out.append(tpl, pos, std::string::npos);
            break;
        }
        out.append(tpl, pos, open - pos);
        std::string key = tpl.substr(open + 1, close - open - 1);
        auto it = values.find(key);
        if (it != values.end()) {
            out += it->second;
        } else {
            out.append(tpl, open, close - open + 1);
        }
        pos = close + 1;
    }
    return out;
}

}  // namespace irbench
