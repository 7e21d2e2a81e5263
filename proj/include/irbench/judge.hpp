#pragma once

#include <optional>
#include <string>

#include "irbench/clients.hpp"
#include "irbench/expand.hpp"

namespace irbench {

enum class VerdictPath { ExactMatch, ParsedMatch, Unparseable };

std::string_view verdict_path_code(VerdictPath p);
std::optional<VerdictPath> parse_verdict_path(std::string_view code);

struct Verdict {
    std::string task_id;
    bool correct = false;
    VerdictPath path = VerdictPath::Unparseable;
    std::optional<char> extracted_label;  // A..D when the judge parsed one
    std::optional<std::string> judge_raw;

    json to_json() const;
    static Verdict from_json(const json& j);
};

/// Exact-matching stage. Accepted forms for a presented option at letter L
/// with text T: "L", "(L)", "L. T", "(L) T". Normalization: trim whitespace,
/// strip one trailing period, case-fold the letter.
/// Returns true/false when the response is an exact form of the correct /
/// a wrong option, nullopt otherwise (judge fallback required).
std::optional<bool> exact_match(std::string_view raw_text, const EvalTask& task);

/// Hybrid judgment: exact match first (no judge call), judge-model extraction
/// as fallback. The judge is prompted to reply with a single letter or the
/// literal token NONE; anything else is Unparseable and never correct.
/// Judge transport failures raise JudgeClientError — the task is left
/// undecided, never silently scored.
Verdict judge_response(const std::string& raw_text, const EvalTask& task,
                       ChatClient* judge_client, const PromptSet& prompts);

}  // namespace irbench
