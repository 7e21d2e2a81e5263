#include "irbench/judge.hpp"

#include <algorithm>
#include <cctype>

#include "irbench/errors.hpp"

namespace irbench {

std::string_view verdict_path_code(VerdictPath p) {
    switch (p) {
        case VerdictPath::ExactMatch: return "exact";
        case VerdictPath::ParsedMatch: return "parsed";
        case VerdictPath::Unparseable: return "unparseable";
    }
    return "?";
}

std::optional<VerdictPath> parse_verdict_path(std::string_view code) {
    if (code == "exact") return VerdictPath::ExactMatch;
    if (code == "parsed") return VerdictPath::ParsedMatch;
    if (code == "unparseable") return VerdictPath::Unparseable;
    return std::nullopt;
}

json Verdict::to_json() const {
    json j{{"task_id", task_id},
           {"correct", correct},
           {"path", std::string(verdict_path_code(path))}};
    if (extracted_label) j["extracted_label"] = std::string(1, *extracted_label);
    if (judge_raw) j["judge_raw"] = *judge_raw;
    return j;
}

Verdict Verdict::from_json(const json& j) {
    Verdict v;
    v.task_id = j.at("task_id").get<std::string>();
    v.correct = j.at("correct").get<bool>();
    auto p = parse_verdict_path(j.at("path").get<std::string>());
    if (!p) throw Error("unknown verdict path: " + j.at("path").get<std::string>());
    v.path = *p;
    if (j.contains("extracted_label")) v.extracted_label = j["extracted_label"].get<std::string>()[0];
    if (j.contains("judge_raw")) v.judge_raw = j["judge_raw"].get<std::string>();
    return v;
}

namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::string normalize(std::string_view raw) {
    std::string s = trim(raw);
    if (!s.empty() && s.back() == '.') {
        s.pop_back();
        s = trim(s);
    }
    return s;
}

// Case-insensitive match of the letter position only; option text is exact.
bool matches_form(const std::string& norm, char letter, const std::string& text) {
    auto upper = [](char c) { return static_cast<char>(std::toupper(static_cast<unsigned char>(c))); };
    if (norm.size() == 1 && upper(norm[0]) == letter) return true;
    if (norm.size() == 3 && norm.front() == '(' && norm.back() == ')' && upper(norm[1]) == letter)
        return true;
    // "L. T"
    if (norm.size() == text.size() + 3 && upper(norm[0]) == letter && norm[1] == '.' &&
        norm[2] == ' ' && norm.compare(3, std::string::npos, text) == 0)
        return true;
    // "(L) T"
    if (norm.size() == text.size() + 4 && norm[0] == '(' && upper(norm[1]) == letter &&
        norm[2] == ')' && norm[3] == ' ' && norm.compare(4, std::string::npos, text) == 0)
        return true;
    return false;
}

}  // namespace

std::optional<bool> exact_match(std::string_view raw_text, const EvalTask& task) {
    std::string norm = normalize(raw_text);
    if (norm.empty()) return std::nullopt;
    int correct_pos = task.correct_label - 'A';
    if (matches_form(norm, task.correct_label, task.presented_options[correct_pos]))
        return true;
    for (int pos = 0; pos < 4; ++pos) {
        if (pos == correct_pos) continue;
        if (matches_form(norm, static_cast<char>('A' + pos), task.presented_options[pos]))
            return false;
    }
    return std::nullopt;
}

namespace {

std::string options_block(const EvalTask& task) {
    std::string out;
    for (int i = 0; i < 4; ++i) {
        out += static_cast<char>('A' + i);
        out += ". ";
        out += task.presented_options[static_cast<std::size_t>(i)];
        if (i != 3) out += '\n';
    }
    return out;
}

// Judge replies are constrained to a single letter or NONE; anything else is
// treated as unparseable rather than credited.
std::optional<char> parse_judge_reply(const std::string& reply) {
    std::string norm = normalize(reply);
    if (norm.size() == 1) {
        char u = static_cast<char>(std::toupper(static_cast<unsigned char>(norm[0])));
        if (u >= 'A' && u <= 'D') return u;
    }
    return std::nullopt;
}

}  // namespace

Verdict judge_response(const std::string& raw_text, const EvalTask& task,
                       ChatClient* judge_client, const PromptSet& prompts) {
    Verdict v;
    v.task_id = task.task_id;

    if (auto exact = exact_match(raw_text, task)) {
        v.correct = *exact;
        v.path = VerdictPath::ExactMatch;
        return v;
    }

    if (!judge_client) throw JudgeClientError("no judge endpoint configured");

    MessagePayload payload;
    payload.task_id = task.task_id;
    payload.user_text = fill_template(prompts.require("judge_extract"),
                                      {{"question", task.question},
                                       {"options", options_block(task)},
                                       {"response", raw_text}});
    ModelResponse reply;
    try {
        reply = judge_client->chat(payload);
    } catch (const std::exception& e) {
        throw JudgeClientError(e.what());
    }

    v.judge_raw = reply.raw_text;
    if (auto letter = parse_judge_reply(reply.raw_text)) {
        v.extracted_label = *letter;
        v.path = VerdictPath::ParsedMatch;
        v.correct = (*letter == task.correct_label);
    } else {
        v.path = VerdictPath::Unparseable;
        v.correct = false;
    }
    return v;
}

}  // namespace irbench
