#include "irbench/runner.hpp"

#include <atomic>
#include <chrono>
#include <set>
#include <thread>

#include "irbench/digest.hpp"
#include "irbench/errors.hpp"
#include "irbench/image_ops.hpp"
#include "irbench/log.hpp"

namespace irbench {

RunManifest RunManifest::create(const Benchmark& b, const std::string& model, InputMode mode,
                                const std::string& prompt_digest, const std::string& judge_digest,
                                std::uint64_t seed) {
    RunManifest m;
    m.benchmark_hash = b.meta.content_hash;
    m.model = model;
    m.mode = std::string(mode_code(mode));
    m.prompt_digest = prompt_digest;
    m.judge_digest = judge_digest;
    m.created_at = std::chrono::duration_cast<std::chrono::seconds>(
                       std::chrono::system_clock::now().time_since_epoch())
                       .count();
    m.seed = seed;
    m.item_count = b.items.size();
    m.task_count = b.items.size() * 8;
    m.run_id = short_digest(m.benchmark_hash + '\x1f' + model + '\x1f' + m.mode + '\x1f' +
                            prompt_digest + '\x1f' + judge_digest + '\x1f' + std::to_string(seed));
    return m;
}

json RunManifest::to_json() const {
    return json{{"run_id", run_id},
                {"benchmark_hash", benchmark_hash},
                {"model", model},
                {"mode", mode},
                {"prompt_digest", prompt_digest},
                {"judge_digest", judge_digest},
                {"created_at", created_at},
                {"seed", seed},
                {"item_count", item_count},
                {"task_count", task_count}};
}

RunManifest RunManifest::from_json(const json& j) {
    RunManifest m;
    m.run_id = j.at("run_id").get<std::string>();
    m.benchmark_hash = j.at("benchmark_hash").get<std::string>();
    m.model = j.at("model").get<std::string>();
    m.mode = j.at("mode").get<std::string>();
    m.prompt_digest = j.at("prompt_digest").get<std::string>();
    m.judge_digest = j.at("judge_digest").get<std::string>();
    m.created_at = j.at("created_at").get<std::int64_t>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.item_count = j.at("item_count").get<std::size_t>();
    m.task_count = j.at("task_count").get<std::size_t>();
    return m;
}

json RunState::to_json() const {
    return json{{"pending", pending},
                {"responded", responded},
                {"judged", judged},
                {"failed", failed},
                {"task_count", task_count},
                {"complete", complete()}};
}

RunManifest load_manifest(const std::filesystem::path& run_dir) {
    auto p = run_dir / "manifest.json";
    json j = json::parse(read_text_file(p), nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded()) throw StorageError("manifest unreadable: " + p.string());
    return RunManifest::from_json(j);
}

namespace {

struct PersistedRun {
    std::map<std::string, json> responses;  // task_id -> last record
    std::map<std::string, Verdict> verdicts;
    std::map<std::string, std::string> failure_stage;  // task_id -> stage of last failure
};

PersistedRun load_persisted(const std::filesystem::path& run_dir) {
    PersistedRun p;
    auto warn = [&](const std::filesystem::path& f) {
        return [f](std::size_t line, const std::string&) {
            log_warn(f.filename().string() + ": skipping corrupt record at line " +
                     std::to_string(line));
        };
    };
    for (const auto& rec : read_jsonl(run_dir / "responses.jsonl", warn(run_dir / "responses.jsonl")))
        if (rec.contains("task_id")) p.responses[rec["task_id"].get<std::string>()] = rec;
    for (const auto& rec : read_jsonl(run_dir / "verdicts.jsonl", warn(run_dir / "verdicts.jsonl"))) {
        try {
            Verdict v = Verdict::from_json(rec);
            p.verdicts[v.task_id] = v;
        } catch (const std::exception&) {
            log_warn("verdicts.jsonl: skipping malformed verdict record");
        }
    }
    for (const auto& rec : read_jsonl(run_dir / "failures.jsonl", warn(run_dir / "failures.jsonl")))
        if (rec.contains("task_id"))
            p.failure_stage[rec["task_id"].get<std::string>()] = rec.value("stage", "unknown");
    return p;
}

RunState state_from(const PersistedRun& p, std::size_t task_count) {
    RunState s;
    s.task_count = task_count;
    std::set<std::string> counted;
    for (const auto& [id, v] : p.verdicts) {
        ++s.judged;
        counted.insert(id);
    }
    for (const auto& [id, r] : p.responses) {
        if (counted.count(id)) continue;
        ++s.responded;  // judge failures leave tasks here, still retryable
        counted.insert(id);
    }
    for (const auto& [id, stage] : p.failure_stage) {
        if (counted.count(id)) continue;
        ++s.failed;
        counted.insert(id);
    }
    s.pending = task_count > counted.size() ? task_count - counted.size() : 0;
    return s;
}

}  // namespace

RunState read_run_state(const std::filesystem::path& run_dir) {
    if (!std::filesystem::is_directory(run_dir))
        throw StorageError("run directory not found: " + run_dir.string());
    auto manifest = load_manifest(run_dir);
    return state_from(load_persisted(run_dir), manifest.task_count);
}

std::map<std::string, Verdict> load_verdicts(const std::filesystem::path& run_dir) {
    return load_persisted(run_dir).verdicts;
}

RunState run_evaluation(const RunManifest& manifest, const Benchmark& benchmark,
                        const RunDeps& deps, const std::filesystem::path& run_dir,
                        const RunOptions& opts) {
    if (manifest.benchmark_hash != benchmark.meta.content_hash)
        throw ConfigError("manifest benchmark hash does not match the loaded benchmark");

    InputMode mode = parse_mode(manifest.mode).value_or(InputMode::IF);
    auto tasks = expand_benchmark(benchmark, mode, manifest.prompt_digest);

    if (opts.dry_run) {
        RunState s;
        s.task_count = tasks.size();
        s.pending = tasks.size();
        if (opts.on_plan)
            for (const auto& t : tasks) opts.on_plan(t);
        return s;
    }

    if (!deps.chat || !deps.prompts) throw ConfigError("run requires a chat client and prompts");
    if (mode_needs_translation(mode) && !deps.translator)
        throw ConfigError("mode " + manifest.mode + " requires an edit endpoint");

    std::filesystem::create_directories(run_dir);
    auto manifest_path = run_dir / "manifest.json";
    if (std::filesystem::exists(manifest_path)) {
        auto stored = load_manifest(run_dir);
        if (stored.run_id != manifest.run_id)
            throw ConfigError("run directory belongs to run " + stored.run_id +
                              ", refusing to mix with " + manifest.run_id);
    } else {
        write_file_atomic(manifest_path, canonical_dump(manifest.to_json()));
    }

    PersistedRun persisted = load_persisted(run_dir);
    JsonlWriter responses(run_dir / "responses.jsonl");
    JsonlWriter verdicts(run_dir / "verdicts.jsonl");
    JsonlWriter failures(run_dir / "failures.jsonl");

    // Image bytes are shared across the 8 tasks of an item.
    std::map<std::string, Bytes> ir_cache;
    std::mutex ir_mu;
    auto load_ir = [&](const std::string& rel) -> const Bytes& {
        std::lock_guard lock(ir_mu);
        auto it = ir_cache.find(rel);
        if (it == ir_cache.end())
            it = ir_cache.emplace(rel, read_file_bytes(deps.image_root / rel)).first;
        return it->second;
    };

    std::mutex persisted_mu;  // guards persisted maps during the run

    auto process_task = [&](const EvalTask& task) {
        std::optional<std::string> raw_text;
        {
            std::lock_guard lock(persisted_mu);
            if (persisted.verdicts.count(task.task_id)) return;  // already judged
            auto it = persisted.responses.find(task.task_id);
            if (it != persisted.responses.end())
                raw_text = it->second.value("raw_text", std::string());
        }

        try {
            if (!raw_text) {
                const Bytes& ir = load_ir(task.image);
                std::optional<Bytes> rgb;
                if (mode_needs_translation(task.mode)) {
                    auto rec = deps.translator->translate(ir);
                    rgb = read_file_bytes(rec.rgb_path);
                }
                MessagePayload payload = compose(task, *deps.prompts, ir, rgb);
                ModelResponse resp = deps.chat->chat(payload);
                json rec{{"task_id", task.task_id},
                         {"raw_text", resp.raw_text},
                         {"latency_ms", resp.latency_ms},
                         {"attempts", resp.attempts},
                         {"cache_hit", resp.cache_hit}};
                if (resp.usage)
                    rec["usage"] = json{{"prompt_tokens", resp.usage->prompt_tokens},
                                        {"completion_tokens", resp.usage->completion_tokens}};
                responses.append(rec);
                {
                    std::lock_guard lock(persisted_mu);
                    persisted.responses[task.task_id] = rec;
                }
                raw_text = resp.raw_text;
            }
        } catch (const std::exception& e) {
            failures.append(json{{"task_id", task.task_id}, {"stage", "chat"}, {"error", e.what()}});
            std::lock_guard lock(persisted_mu);
            persisted.failure_stage[task.task_id] = "chat";
            return;
        }

        try {
            Verdict v = judge_response(*raw_text, task, deps.judge, *deps.prompts);
            verdicts.append(v.to_json());
            std::lock_guard lock(persisted_mu);
            persisted.verdicts[task.task_id] = v;
        } catch (const std::exception& e) {
            // Judge trouble defers the task at Responded; it is never
            // silently scored, and a later pass retries from the stored
            // response.
            failures.append(json{{"task_id", task.task_id}, {"stage", "judge"}, {"error", e.what()}});
            std::lock_guard lock(persisted_mu);
            persisted.failure_stage[task.task_id] = "judge";
        }
    };

    int workers = opts.workers > 0 ? opts.workers : deps.chat->config().max_parallel;
    workers = std::max(1, std::min<int>(workers, static_cast<int>(tasks.size())));

    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                std::size_t i = next.fetch_add(1);
                if (i >= tasks.size()) return;
                process_task(tasks[i]);
            }
        });
    }
    for (auto& t : pool) t.join();

    return state_from(persisted, manifest.task_count);
}

}  // namespace irbench
