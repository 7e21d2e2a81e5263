#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "irbench/benchmark.hpp"
#include "irbench/registry.hpp"
#include "irbench/runner.hpp"

namespace irbench {

/// Per-dimension scores (0..100) with bilingual sub-scores and question-level
/// correctness fractions. The headline Avg is the macro-average: the
/// unweighted mean over present dimensions, regardless of per-dimension
/// question counts.
struct ScoreTable {
    std::map<Dimension, double> by_dimension;
    std::map<std::string, std::map<Dimension, double>> language_dimension;  // "en"/"zh"
    std::map<std::string, double> question_fraction;  // item id -> fraction in [0,1]

    double avg() const;
    std::optional<double> language_avg(const std::string& language) const;

    static ScoreTable from_dimension_scores(const std::map<Dimension, double>& scores);
    json to_json() const;
    static ScoreTable from_json(const json& j);
};

struct ScoreOptions {
    bool allow_partial = false;
    bool strict = false;             // question correct only under every option order
    bool strict_all_orders = false;  // strict across both languages' orders at once
};

/// Scores one run directory against its benchmark. Question score is the mean
/// correctness over the 8 verdicts (strict: all-4-per-language, averaged
/// across languages); dimension score is the question mean x 100; Avg is the
/// macro-average. Refuses runs with failures or missing verdicts unless
/// allow_partial.
ScoreTable score_run(const std::filesystem::path& run_dir, const Benchmark& benchmark,
                     const ScoreOptions& opts = {});

// --- cross-model analyses ---

using ScoreColumn = std::string;  // "Avg" or a dimension code

std::vector<ScoreColumn> score_columns();

struct PearsonOptions {
    std::size_t min_family_size = 2;
    bool include_thinking = true;
};

struct FamilyCorrelation {
    std::string family;
    std::size_t members = 0;
    std::map<ScoreColumn, double> r;
};

struct PearsonResult {
    std::map<ScoreColumn, double> mean_r;  // unweighted mean over families
    std::vector<FamilyCorrelation> families;
    std::vector<std::string> skipped;  // family: reason
    json to_json() const;
};

/// Pearson correlation of params_total vs score, computed within each family
/// and averaged across families. Closed-source models and models without a
/// parameter count are excluded; families below min_family_size or with
/// degenerate variance are skipped with a warning.
PearsonResult pearson_by_family(const std::vector<std::pair<ModelSpec, ScoreTable>>& tables,
                                const PearsonOptions& opts = {});

struct DeltaResult {
    std::map<ScoreColumn, double> mean_delta;  // thinking minus non-thinking
    std::size_t pair_count = 0;
    json to_json() const;
};

/// Mean per-column difference over (thinking, base) pairs. Throws
/// MissingModel when a pair references an absent table.
DeltaResult thinking_deltas(const std::vector<std::pair<ModelSpec, ScoreTable>>& tables,
                            const std::vector<std::pair<std::string, std::string>>& pairs);

struct FiveNumberSummary {
    double min = 0, q1 = 0, median = 0, q3 = 0, max = 0, mean = 0;
    json to_json() const;
};

/// Five-number summary + mean of each dimension across models. Quartiles use
/// linear interpolation over the inclusive range (index p*(n-1)).
std::map<Dimension, FiveNumberSummary> dimension_distribution(
    const std::vector<std::pair<ModelSpec, ScoreTable>>& tables);

struct LanguageSplit {
    std::string model;
    double en = 0, zh = 0;
    double abs_diff = 0;
};

/// Per-model English/Chinese averages; models without per-language data are
/// skipped with a warning.
std::vector<LanguageSplit> language_split(
    const std::vector<std::pair<ModelSpec, ScoreTable>>& tables);

// --- reports ---

struct AnalysisReport {
    std::vector<std::pair<ModelSpec, ScoreTable>> tables;
    std::optional<PearsonResult> pearson;
    std::optional<DeltaResult> deltas;
    std::optional<std::map<Dimension, FiveNumberSummary>> distribution;
    std::optional<std::vector<LanguageSplit>> languages;

    json to_json() const;
    static AnalysisReport from_json(const json& j);
};

/// Writes report.<ext> for each requested format ("json", "md", "csv") into
/// out_dir. Output is deterministic: fixed ordering, fixed float formatting.
std::vector<std::filesystem::path> emit_report(const AnalysisReport& report,
                                               const std::filesystem::path& out_dir,
                                               const std::vector<std::string>& formats);

}  // namespace irbench
