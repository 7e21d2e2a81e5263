#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "irbench/benchmark.hpp"
#include "irbench/clients.hpp"

namespace irbench {

struct VqaAnnotation {
    std::string description;
    std::string bbox;  // e.g. "(0.54, 0.9, 0.06, 0.2)"
};

/// A generated question draft. Drafts are never auto-admitted into a
/// benchmark: import requires the explicit --accept-uncalibrated step.
struct VqaDraft {
    std::map<std::string, std::string> question;  // "en"/"zh"
    std::array<std::string, 4> options;
    int answer_index = 0;
    bool uncalibrated = true;

    json to_json() const;
};

struct VqaGenResult {
    std::vector<VqaDraft> drafts;            // at most 4
    std::vector<std::string> rejected;       // per-candidate rejection reasons
    bool truncated = false;                  // more than 4 candidates arrived
    std::string raw_text;
};

/// Asks the chat endpoint to draft at most four single-choice questions for
/// one image. The model must reply with a json array of
/// {"question":{"en","zh"},"options":[4],"answer":"A".."D"}; candidates that
/// do not validate are rejected with a reason. A reply with no parsable array
/// raises ParseFailure carrying the raw text.
VqaGenResult generate_vqa(const std::vector<unsigned char>& image,
                          const std::optional<VqaAnnotation>& annotation, ChatClient& client,
                          const std::string& prompt_template);

}  // namespace irbench
