#pragma once

#include <filesystem>
#include <map>
#include <string>

namespace irbench {

/// Prompt templates loaded from a directory of text files, keyed by file stem.
/// Expected keys: eval_single_en, eval_single_zh, eval_dual_en, eval_dual_zh,
/// prior_en, prior_zh, judge_extract, vqa_gen, quality_rubric. The shipped
/// prompts/ directory provides editable defaults.
struct PromptSet {
    std::map<std::string, std::string> templates;
    std::string digest;  // over all template names and contents

    bool has(const std::string& key) const { return templates.count(key) > 0; }
    const std::string& require(const std::string& key) const;  // throws MissingTemplate

    const std::string& eval_system(const std::string& language, bool dual_image) const;
    const std::string& prior(const std::string& language) const;
};

PromptSet load_prompt_set(const std::filesystem::path& dir);

/// Builds a PromptSet from in-memory templates (tests).
PromptSet make_prompt_set(std::map<std::string, std::string> templates);

/// Replaces {name} placeholders; unknown placeholders are left verbatim.
std::string fill_template(const std::string& tpl,
                          const std::map<std::string, std::string>& values);

}  // namespace irbench
