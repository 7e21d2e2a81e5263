#pragma once

#include <filesystem>
#include <functional>
#include <optional>

#include "irbench/benchmark.hpp"
#include "irbench/clients.hpp"
#include "irbench/expand.hpp"
#include "irbench/visual_prompt.hpp"
#include "irbench/judge.hpp"

namespace irbench {

/// Immutable description of a run. Changing any constituent digest yields a
/// new run_id; resuming checks the stored manifest against the arguments.
struct RunManifest {
    std::string run_id;
    std::string benchmark_hash;
    std::string model;  // evaluated model name (registry reference)
    std::string mode;   // input-mode code
    std::string prompt_digest;
    std::string judge_digest;  // digest of the judge endpoint binding; "" = none
    std::int64_t created_at = 0;
    std::uint64_t seed = 0;
    std::size_t item_count = 0;
    std::size_t task_count = 0;

    static RunManifest create(const Benchmark& b, const std::string& model, InputMode mode,
                              const std::string& prompt_digest, const std::string& judge_digest,
                              std::uint64_t seed);
    json to_json() const;
    static RunManifest from_json(const json& j);
};

enum class TaskStatus { Pending, Responded, Judged, Failed };

struct RunState {
    std::size_t pending = 0;
    std::size_t responded = 0;
    std::size_t judged = 0;
    std::size_t failed = 0;
    std::size_t task_count = 0;

    bool complete() const { return judged == task_count && task_count > 0; }
    json to_json() const;
};

struct RunDeps {
    ChatClient* chat = nullptr;              // required unless dry_run
    ChatClient* judge = nullptr;             // optional; absence defers verbose tasks
    Translator* translator = nullptr;        // required for modes needing translation
    const PromptSet* prompts = nullptr;
    std::filesystem::path image_root = ".";
};

struct RunOptions {
    bool dry_run = false;
    int workers = 0;  // 0 = chat endpoint max_parallel
    std::function<void(const EvalTask&)> on_plan;  // dry-run plan sink
};

/// Executes (or resumes) a run in run_dir. Records are append-only jsonl
/// keyed by task_id, last record per task wins; a verdict is acknowledged
/// only after its line is flushed, so a killed run resumes to the identical
/// verdict set without re-sending judged or responded tasks.
RunState run_evaluation(const RunManifest& manifest, const Benchmark& benchmark,
                        const RunDeps& deps, const std::filesystem::path& run_dir,
                        const RunOptions& opts = {});

/// Status derived solely from persisted records. Corrupt lines (crash
/// artifacts) are skipped with a warning.
RunState read_run_state(const std::filesystem::path& run_dir);

/// Last-wins verdict map from a run directory.
std::map<std::string, Verdict> load_verdicts(const std::filesystem::path& run_dir);

RunManifest load_manifest(const std::filesystem::path& run_dir);

}  // namespace irbench
