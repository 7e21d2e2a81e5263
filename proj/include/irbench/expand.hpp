#pragma once

#include <array>
#include <string>
#include <vector>

#include "irbench/benchmark.hpp"
#include "irbench/input_mode.hpp"
#include "irbench/message.hpp"
#include "irbench/prompts.hpp"

namespace irbench {

/// Cyclic option permutation: canonical option i is presented at position
/// (i + shift) mod 4.
struct Permutation {
    int shift = 0;  // 0..3
    std::array<std::string, 4> apply(const std::array<std::string, 4>& canonical) const;
};

/// One (question x option-order x language) evaluation unit under a run-level
/// input mode.
struct EvalTask {
    std::string task_id;  // digest of (item id, shift, language, mode, run prompt hash)
    std::string item_id;
    int shift = 0;
    std::string language;  // "en" | "zh"
    std::array<std::string, 4> presented_options;
    char correct_label = 'A';  // letter of the correct option in presented order
    InputMode mode = InputMode::IF;

    // Carried from the item so rendering and scoring need no extra lookups.
    std::string question;
    std::string image;
    Dimension dimension = Dimension::SU;
};

/// Expands one item into its 8 evaluation tasks: 4 cyclic shifts x 2
/// languages. Across the 4 shifts of one language the correct label takes
/// each of A..D exactly once.
std::vector<EvalTask> expand_item(const BenchmarkItem& item, InputMode mode,
                                  const std::string& prompt_digest);

std::vector<EvalTask> expand_benchmark(const Benchmark& b, InputMode mode,
                                       const std::string& prompt_digest);

/// Renders the textual scaffold of a task: system prompt (dual-image variant
/// for dual modes, prior appended for *_TEXT modes), lettered options in
/// presented order, and empty image slots per mode. Pure: identical inputs
/// produce byte-identical payloads.
MessagePayload render_prompt(const EvalTask& task, const PromptSet& prompts);

}  // namespace irbench
