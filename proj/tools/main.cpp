// irbench: bilingual circular-evaluation harness for infrared VQA benchmarks,
// with infrared->RGB visual prompting and RGB-T pair curation.
//
// Workflow: validate -> run -> status/judge -> analyze -> report.
// curate and mock-serve stand alone. Exit codes: 0 ok/complete, 2 partial,
// 3 config or data error, 64 usage.

#include <csignal>
#include <cstdio>
#include <iostream>

#include "CLI11.hpp"
#include <fmt/format.h>

#include "irbench/analyze.hpp"
#include "irbench/benchmark.hpp"
#include "irbench/clients.hpp"
#include "irbench/config.hpp"
#include "irbench/curate.hpp"
#include "irbench/digest.hpp"
#include "irbench/errors.hpp"
#include "irbench/visual_prompt.hpp"
#include "irbench/image_ops.hpp"
#include "irbench/judge.hpp"
#include "irbench/log.hpp"
#include "irbench/mock_server.hpp"
#include "irbench/registry.hpp"
#include "irbench/runner.hpp"
#include "irbench/vqagen.hpp"

using namespace irbench;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitPartial = 2;
constexpr int kExitError = 3;
constexpr int kExitUsage = 64;

struct GlobalOpts {
    std::string config_path;
    std::string image_root;
    std::string cache_dir;
    std::string prompt_dir;
    std::string registry_path;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string format = "text";
    bool quiet = false;
};

Config effective_config(const GlobalOpts& g) {
    Config cfg;
    std::string path = g.config_path;
    if (path.empty()) {
        if (const char* v = std::getenv("IRBENCH_CONFIG"); v && *v) path = v;
    }
    if (!path.empty()) cfg = Config::load_file(path);
    cfg.apply_env();
    // Flags win over env and file.
    if (!g.image_root.empty()) cfg.image_root = g.image_root;
    if (!g.cache_dir.empty()) cfg.cache_dir = g.cache_dir;
    if (!g.prompt_dir.empty()) cfg.prompt_dir = g.prompt_dir;
    if (!g.registry_path.empty()) cfg.registry = g.registry_path;
    if (g.seed_set) cfg.seed = g.seed;
    return cfg;
}

bool structured(const GlobalOpts& g) { return g.format == "structured"; }

std::shared_ptr<ResponseCache> open_cache(const Config& cfg) {
    return std::make_shared<ResponseCache>(cfg.cache_dir);
}

std::unique_ptr<ChatClient> make_chat(const std::optional<EndpointConfig>& ep,
                                      const std::shared_ptr<ResponseCache>& cache) {
    if (!ep) return nullptr;
    return std::make_unique<ChatClient>(*ep, cache);
}

// --- validate ---

int cmd_validate(const GlobalOpts& g, const std::string& benchmark_path) {
    Config cfg = effective_config(g);
    LoadOptions opts;
    opts.image_root = cfg.image_root;
    Benchmark b = load_benchmark(benchmark_path, opts);
    auto balance = answer_balance(b);
    double expected = static_cast<double>(b.items.size()) / 4.0;
    bool skewed = false;
    for (auto c : balance)
        if (std::abs(static_cast<double>(c) - expected) > expected * 0.5 + 1.0) skewed = true;
    if (structured(g)) {
        json out{{"items", b.items.size()},
                 {"content_hash", b.meta.content_hash},
                 {"answer_balance", balance},
                 {"balanced", !skewed}};
        std::cout << out.dump() << "\n";
    } else {
        std::cout << fmt::format("{}: {} items, hash {}\n", b.meta.name, b.items.size(),
                                 b.meta.content_hash.substr(0, 12));
        std::cout << fmt::format("answer balance A/B/C/D: {}/{}/{}/{}\n", balance[0], balance[1],
                                 balance[2], balance[3]);
    }
    if (skewed) log_warn("answer positions are noticeably unbalanced");
    return kExitOk;
}

// --- run ---

struct RunArgs {
    std::string benchmark_path;
    std::string model;
    std::string mode = "if";
    std::string run_dir;
    std::string translations_dir = "translations";
    std::string plan_out;
    bool dry_run = false;
    int workers = 0;
};

int cmd_run(const GlobalOpts& g, const RunArgs& args) {
    Config cfg = effective_config(g);
    auto mode = parse_mode(args.mode);
    if (!mode) throw ConfigError("unknown mode: " + args.mode);

    LoadOptions load_opts;
    load_opts.image_root = cfg.image_root;
    Benchmark benchmark = load_benchmark(args.benchmark_path, load_opts);
    PromptSet prompts = load_prompt_set(cfg.prompt_dir);

    std::optional<EndpointConfig> judge_ep = cfg.endpoint("judge");
    std::string judge_digest =
        judge_ep ? sha256_hex(canonical_dump(judge_ep->to_json())).substr(0, 24) : "";
    RunManifest manifest =
        RunManifest::create(benchmark, args.model, *mode, prompts.digest, judge_digest, cfg.seed);

    if (args.dry_run) {
        std::unique_ptr<std::ofstream> plan_file;
        if (!args.plan_out.empty())
            plan_file = std::make_unique<std::ofstream>(args.plan_out, std::ios::trunc);
        RunOptions opts;
        opts.dry_run = true;
        bool as_json = structured(g) || !args.plan_out.empty();
        opts.on_plan = [&](const EvalTask& t) {
            std::ostream& out = plan_file ? *plan_file : std::cout;
            if (as_json) {
                out << json{{"task_id", t.task_id},
                            {"item_id", t.item_id},
                            {"shift", t.shift},
                            {"language", t.language},
                            {"correct_label", std::string(1, t.correct_label)},
                            {"mode", std::string(mode_code(t.mode))}}
                           .dump()
                    << "\n";
            } else {
                out << fmt::format("{}  {} shift={} lang={} correct={}\n", t.task_id, t.item_id,
                                   t.shift, t.language, t.correct_label);
            }
        };
        RunState state = run_evaluation(manifest, benchmark, RunDeps{}, args.run_dir, opts);
        if (!structured(g) && args.plan_out.empty())
            std::cout << fmt::format("planned {} tasks over {} items\n", state.task_count,
                                     manifest.item_count);
        return kExitOk;
    }

    if (args.run_dir.empty()) throw ConfigError("--run-dir is required");

    Registry registry;
    if (!cfg.registry.empty()) registry = load_registry(cfg.registry);
    const ModelSpec* spec = registry.find(args.model);
    if (!spec || !spec->endpoint)
        throw ConfigError("model '" + args.model + "' has no endpoint binding in the registry");

    auto cache = open_cache(cfg);
    ChatClient chat(*spec->endpoint, cache);
    auto judge_client = make_chat(judge_ep, cache);

    std::unique_ptr<EditClient> edit;
    std::unique_ptr<Translator> translator;
    if (mode_needs_translation(*mode)) {
        auto edit_ep = cfg.endpoint("edit");
        if (!edit_ep) throw ConfigError("mode " + args.mode + " needs an 'edit' endpoint");
        edit = std::make_unique<EditClient>(*edit_ep, cache);
        translator = std::make_unique<Translator>(*edit, args.translations_dir, cfg.edit_prompt,
                                                  cfg.edit_max_side);
    }

    RunDeps deps;
    deps.chat = &chat;
    deps.judge = judge_client.get();
    deps.translator = translator.get();
    deps.prompts = &prompts;
    deps.image_root = cfg.image_root;

    RunOptions opts;
    opts.workers = args.workers;
    RunState state = run_evaluation(manifest, benchmark, deps, args.run_dir, opts);

    if (structured(g))
        std::cout << state.to_json().dump() << "\n";
    else
        std::cout << fmt::format("run {}: {} judged, {} responded, {} failed, {} pending of {}\n",
                                 manifest.run_id, state.judged, state.responded, state.failed,
                                 state.pending, state.task_count);
    return state.complete() ? kExitOk : kExitPartial;
}

// --- status ---

int cmd_status(const GlobalOpts& g, const std::string& run_dir) {
    RunState state = read_run_state(run_dir);
    if (structured(g))
        std::cout << state.to_json().dump() << "\n";
    else
        std::cout << fmt::format("{} judged, {} responded, {} failed, {} pending of {}\n",
                                 state.judged, state.responded, state.failed, state.pending,
                                 state.task_count);
    return state.complete() ? kExitOk : kExitPartial;
}

// --- judge (re-run the judgment stage for responded tasks) ---

int cmd_judge(const GlobalOpts& g, const std::string& run_dir, const std::string& benchmark_path) {
    Config cfg = effective_config(g);
    LoadOptions load_opts;
    load_opts.image_root = cfg.image_root;
    load_opts.check_images = false;
    Benchmark benchmark = load_benchmark(benchmark_path, load_opts);
    PromptSet prompts = load_prompt_set(cfg.prompt_dir);
    RunManifest manifest = load_manifest(run_dir);
    if (manifest.benchmark_hash != benchmark.meta.content_hash)
        throw ConfigError("run belongs to a different benchmark");

    auto cache = open_cache(cfg);
    auto judge_client = make_chat(cfg.endpoint("judge"), cache);

    InputMode mode = parse_mode(manifest.mode).value_or(InputMode::IF);
    auto verdicts = load_verdicts(run_dir);
    std::map<std::string, std::string> responses;
    for (const auto& rec : read_jsonl(std::filesystem::path(run_dir) / "responses.jsonl"))
        if (rec.contains("task_id"))
            responses[rec["task_id"].get<std::string>()] = rec.value("raw_text", std::string());

    JsonlWriter verdict_writer(std::filesystem::path(run_dir) / "verdicts.jsonl");
    std::size_t judged = 0, deferred = 0;
    for (const auto& item : benchmark.items) {
        for (const auto& task : expand_item(item, mode, manifest.prompt_digest)) {
            if (verdicts.count(task.task_id)) continue;
            auto it = responses.find(task.task_id);
            if (it == responses.end()) continue;
            try {
                Verdict v = judge_response(it->second, task, judge_client.get(), prompts);
                verdict_writer.append(v.to_json());
                ++judged;
            } catch (const JudgeClientError& e) {
                log_warn("judge deferred for task " + task.task_id + ": " + e.what());
                ++deferred;
            }
        }
    }
    RunState state = read_run_state(run_dir);
    if (structured(g))
        std::cout << json{{"newly_judged", judged},
                          {"deferred", deferred},
                          {"state", state.to_json()}}
                         .dump()
                  << "\n";
    else
        std::cout << fmt::format("judged {} tasks ({} deferred); {} of {} now judged\n", judged,
                                 deferred, state.judged, state.task_count);
    return state.complete() ? kExitOk : kExitPartial;
}

// --- analyze / report ---

struct AnalyzeArgs {
    std::string benchmark_path;
    std::vector<std::string> run_dirs;
    bool from_registry = false;
    bool allow_partial = false;
    bool strict = false;
    bool strict_all_orders = false;
    bool pearson = false;
    std::size_t pearson_min_family = 2;
    bool pearson_exclude_thinking = false;
    bool deltas = false;
    bool distribution = false;
    bool languages = false;
    std::string out_dir;
    std::vector<std::string> formats{"json"};
};

int cmd_analyze(const GlobalOpts& g, const AnalyzeArgs& args) {
    Config cfg = effective_config(g);
    Registry registry;
    if (!cfg.registry.empty()) registry = load_registry(cfg.registry);

    AnalysisReport report;

    if (!args.run_dirs.empty()) {
        if (args.benchmark_path.empty())
            throw ConfigError("--benchmark is required when scoring run directories");
        LoadOptions load_opts;
        load_opts.image_root = cfg.image_root;
        load_opts.check_images = false;
        Benchmark benchmark = load_benchmark(args.benchmark_path, load_opts);
        ScoreOptions sopts;
        sopts.allow_partial = args.allow_partial;
        sopts.strict = args.strict || args.strict_all_orders;
        sopts.strict_all_orders = args.strict_all_orders;
        for (const auto& dir : args.run_dirs) {
            RunManifest manifest = load_manifest(dir);
            ScoreTable table = score_run(dir, benchmark, sopts);
            const ModelSpec* spec = registry.find(manifest.model);
            ModelSpec effective = spec ? *spec : ModelSpec{};
            if (!spec) effective.name = manifest.model;
            report.tables.emplace_back(effective, std::move(table));
        }
    }

    if (args.from_registry) {
        for (const auto& spec : registry.models)
            if (spec.scores)
                report.tables.emplace_back(spec, ScoreTable::from_dimension_scores(*spec.scores));
    }

    if (report.tables.empty()) throw ConfigError("nothing to analyze: no runs or encoded scores");

    if (args.pearson) {
        PearsonOptions popts;
        popts.min_family_size = args.pearson_min_family;
        popts.include_thinking = !args.pearson_exclude_thinking;
        report.pearson = pearson_by_family(report.tables, popts);
    }
    if (args.deltas) report.deltas = thinking_deltas(report.tables, registry.thinking_pairs);
    if (args.distribution) report.distribution = dimension_distribution(report.tables);
    if (args.languages) report.languages = language_split(report.tables);

    if (!args.out_dir.empty()) {
        auto written = emit_report(report, args.out_dir, args.formats);
        for (const auto& p : written) std::cout << p.string() << "\n";
    } else {
        std::cout << report.to_json().dump(structured(g) ? -1 : 2) << "\n";
    }
    return kExitOk;
}

int cmd_report(const GlobalOpts&, const std::string& analysis_path, const std::string& out_dir,
               const std::vector<std::string>& formats) {
    json j = json::parse(read_text_file(analysis_path), nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded()) throw ConfigError("analysis file is not valid json");
    AnalysisReport report = AnalysisReport::from_json(j);
    auto written = emit_report(report, out_dir, formats);
    for (const auto& p : written) std::cout << p.string() << "\n";
    return kExitOk;
}

// --- translate ---

int cmd_translate(const GlobalOpts& g, const std::vector<std::string>& images,
                  const std::string& translations_dir) {
    Config cfg = effective_config(g);
    auto edit_ep = cfg.endpoint("edit");
    if (!edit_ep) throw ConfigError("translate needs an 'edit' endpoint in the config");
    auto cache = open_cache(cfg);
    EditClient edit(*edit_ep, cache);
    Translator translator(edit, translations_dir, cfg.edit_prompt, cfg.edit_max_side);
    for (const auto& path : images) {
        auto rec = translator.translate(read_file_bytes(cfg.image_root / path));
        if (structured(g))
            std::cout << rec.to_json().dump() << "\n";
        else
            std::cout << fmt::format("{} -> {} ({}x{})\n", path, rec.rgb_path.string(),
                                     rec.rgb_width, rec.rgb_height);
    }
    return kExitOk;
}

// --- curate ---

struct CurateArgs {
    std::string pairs_path;
    std::string out_path;
    std::string root = ".";
    std::vector<std::string> stages{"resolution", "brightness", "edges", "dedup", "sample"};
    std::string ir_embeddings;
    std::string rgb_embeddings;
    std::string holdout_embeddings;
    std::size_t target = 0;
    std::size_t clusters = 0;
    bool quality = false;
};

int cmd_curate(const GlobalOpts& g, const CurateArgs& args) {
    Config cfg = effective_config(g);
    auto pairs = load_pair_manifest(args.pairs_path);
    auto has_stage = [&](const std::string& s) {
        return std::find(args.stages.begin(), args.stages.end(), s) != args.stages.end();
    };

    if (has_stage("resolution")) filter_resolution(pairs, cfg.curate.min_side, args.root);
    if (has_stage("brightness")) filter_brightness(pairs, cfg.curate.min_mean_luma, args.root);
    if (has_stage("edges"))
        filter_edge_alignment(pairs, cfg.curate.canny, cfg.curate.dice_threshold, args.root);
    if (args.quality || has_stage("quality")) {
        auto vlm_ep = cfg.endpoint("vlm");
        if (!vlm_ep) throw ConfigError("quality stage needs a 'vlm' endpoint");
        auto cache = open_cache(cfg);
        ChatClient vlm(*vlm_ep, cache);
        PromptSet prompts = load_prompt_set(cfg.prompt_dir);
        apply_quality_filter(pairs, vlm, prompts.require("quality_rubric"), args.root);
    }
    if (has_stage("dedup")) {
        if (args.ir_embeddings.empty() || args.holdout_embeddings.empty())
            throw ConfigError("dedup stage needs --ir-embeddings and --holdout-embeddings");
        dedup_against_holdout(pairs, load_embeddings(args.ir_embeddings),
                              load_embeddings(args.holdout_embeddings),
                              cfg.curate.dedup_threshold);
    }
    // Survivors of all filters are accepted before sampling.
    for (auto& p : pairs)
        if (p.status == PairStatus::Candidate) p.accept();
    if (has_stage("sample") && args.target > 0) {
        if (args.rgb_embeddings.empty()) throw ConfigError("sample stage needs --rgb-embeddings");
        auto linkage = parse_linkage(cfg.curate.linkage);
        if (!linkage) throw ConfigError("unknown linkage: " + cfg.curate.linkage);
        std::size_t k = args.clusters ? args.clusters : cfg.curate.clusters;
        sample_accepted(pairs, load_embeddings(args.rgb_embeddings), args.target, k, cfg.seed,
                        *linkage);
    }

    save_pair_manifest(pairs, args.out_path);

    std::map<std::string, std::size_t> funnel;
    for (const auto& p : pairs) {
        std::string key(pair_status_code(p.status));
        if (p.status == PairStatus::Rejected) key += ":" + p.reject_stage;
        funnel[key]++;
    }
    if (structured(g)) {
        std::cout << json{{"total", pairs.size()}, {"funnel", funnel}}.dump() << "\n";
    } else {
        std::cout << fmt::format("{} pairs -> {}\n", pairs.size(), args.out_path);
        for (const auto& [key, count] : funnel) std::cout << fmt::format("  {}: {}\n", key, count);
    }
    return kExitOk;
}

// --- mock-serve ---

volatile std::sig_atomic_t g_stop = 0;

int cmd_mock_serve(const GlobalOpts&, const std::string& scenario_path, int port) {
    MockScenario scenario =
        scenario_path.empty() ? MockScenario{} : MockScenario::from_file(scenario_path);
    MockServer server(std::move(scenario));
    int bound = server.start(port);
    std::cout << fmt::format("mock listening on http://127.0.0.1:{}\n", bound) << std::flush;
    std::signal(SIGINT, [](int) { g_stop = 1; });
    std::signal(SIGTERM, [](int) { g_stop = 1; });
    while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
    server.stop();
    return kExitOk;
}

// --- vqagen ---

struct VqagenArgs {
    std::string image;
    std::string description;
    std::string bbox;
    std::string endpoint = "vqagen";
    std::string out;
    // import mode
    std::string import_path;
    std::string into;
    std::string dimension = "SU";
    bool accept_uncalibrated = false;
};

int cmd_vqagen(const GlobalOpts& g, const VqagenArgs& args) {
    Config cfg = effective_config(g);

    if (!args.import_path.empty()) {
        if (!args.accept_uncalibrated)
            throw ConfigError(
                "drafts are uncalibrated; pass --accept-uncalibrated to import them anyway");
        if (args.into.empty() || args.image.empty())
            throw ConfigError("import needs --into and --image");
        auto dim = parse_dimension(args.dimension);
        if (!dim) throw ConfigError("unknown dimension: " + args.dimension);
        auto drafts = read_jsonl(args.import_path);
        JsonlWriter out(args.into);
        std::size_t n = 0;
        for (const auto& d : drafts) {
            BenchmarkItem item;
            item.image = args.image;
            item.dimension = *dim;
            for (const auto& [lang, text] : d.at("question").items())
                item.question[lang] = text.get<std::string>();
            for (std::size_t i = 0; i < 4; ++i)
                item.options[i] = d.at("options")[i].get<std::string>();
            item.answer_index = d.at("answer").get<int>();
            item.id = "gen-" + short_digest(canonical_dump(item.to_json())).substr(0, 12);
            out.append(item.to_json());
            ++n;
        }
        std::cout << fmt::format("imported {} drafts into {}\n", n, args.into);
        return kExitOk;
    }

    if (args.image.empty()) throw ConfigError("vqagen needs --image");
    auto ep = cfg.endpoint(args.endpoint);
    if (!ep) throw ConfigError("vqagen needs endpoint '" + args.endpoint + "' in the config");
    auto cache = open_cache(cfg);
    ChatClient client(*ep, cache);
    PromptSet prompts = load_prompt_set(cfg.prompt_dir);

    std::optional<VqaAnnotation> annotation;
    if (!args.description.empty() || !args.bbox.empty())
        annotation = VqaAnnotation{args.description, args.bbox};

    VqaGenResult result = generate_vqa(read_file_bytes(cfg.image_root / args.image), annotation,
                                       client, prompts.require("vqa_gen"));

    std::unique_ptr<JsonlWriter> out;
    if (!args.out.empty()) out = std::make_unique<JsonlWriter>(args.out);
    for (const auto& d : result.drafts) {
        if (out)
            out->append(d.to_json());
        else
            std::cout << d.to_json().dump() << "\n";
    }
    for (const auto& r : result.rejected) log_warn("rejected candidate: " + r);
    if (result.truncated) log_warn("model offered more than four questions; extra ones dropped");
    std::cout << fmt::format("{} drafts ({} rejected){}\n", result.drafts.size(),
                             result.rejected.size(), result.truncated ? ", truncated" : "");
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"infrared VQA evaluation and RGB-T curation toolkit"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all");

    GlobalOpts g;
    app.add_option("--config", g.config_path, "config file (json)");
    app.add_option("--image-root", g.image_root, "root for relative image paths");
    app.add_option("--cache-dir", g.cache_dir, "response cache directory");
    app.add_option("--prompt-dir", g.prompt_dir, "prompt template directory");
    app.add_option("--registry", g.registry_path, "model registry file");
    app.add_option("--seed", g.seed, "run seed")
        ->each([&g](const std::string&) { g.seed_set = true; });
    app.add_option("--format", g.format, "output format: text|structured")
        ->check(CLI::IsMember({"text", "structured"}));
    app.add_flag("--quiet", g.quiet, "suppress informational logging");

    // validate
    std::string validate_benchmark;
    auto* validate = app.add_subcommand("validate", "validate a benchmark file");
    validate->add_option("benchmark", validate_benchmark, "benchmark jsonl")->required();

    // run
    RunArgs run_args;
    auto* run = app.add_subcommand("run", "execute or resume an evaluation run");
    run->add_option("--benchmark", run_args.benchmark_path, "benchmark jsonl")->required();
    run->add_option("--model", run_args.model, "registry model name")->required();
    run->add_option("--mode", run_args.mode, "input mode: if|if-text|rgb|if-rgb|if-rgb-text");
    run->add_option("--run-dir", run_args.run_dir, "run directory");
    run->add_option("--translations-dir", run_args.translations_dir, "translation cache root");
    run->add_option("--workers", run_args.workers,
                    "worker threads (default endpoint max_parallel)");
    run->add_flag("--dry-run", run_args.dry_run, "print the task plan, no network");
    run->add_option("--plan-out", run_args.plan_out, "write the dry-run plan to a file (jsonl)");

    // status
    std::string status_dir;
    auto* status = app.add_subcommand("status", "summarize a run directory");
    status->add_option("run_dir", status_dir, "run directory")->required();

    // judge
    std::string judge_dir, judge_benchmark;
    auto* judge_cmd = app.add_subcommand("judge", "judge responded-but-unjudged tasks");
    judge_cmd->add_option("--run-dir", judge_dir, "run directory")->required();
    judge_cmd->add_option("--benchmark", judge_benchmark, "benchmark jsonl")->required();

    // analyze
    AnalyzeArgs analyze_args;
    auto* analyze = app.add_subcommand("analyze", "compute scores and derived statistics");
    analyze->add_option("--benchmark", analyze_args.benchmark_path, "benchmark jsonl");
    analyze->add_option("--run-dir", analyze_args.run_dirs, "run directories to score");
    analyze->add_flag("--from-registry", analyze_args.from_registry,
                      "include encoded score tables from the registry");
    analyze->add_flag("--allow-partial", analyze_args.allow_partial, "score incomplete runs");
    analyze->add_flag("--strict", analyze_args.strict,
                      "question correct only under every option order (per language)");
    analyze->add_flag("--strict-all-orders", analyze_args.strict_all_orders,
                      "strict across all 8 evaluations at once");
    analyze->add_flag("--pearson", analyze_args.pearson, "scale correlation by family");
    analyze->add_option("--pearson-min-family", analyze_args.pearson_min_family,
                        "minimum family size for correlation");
    analyze->add_flag("--pearson-exclude-thinking", analyze_args.pearson_exclude_thinking,
                      "exclude thinking variants from correlation");
    analyze->add_flag("--deltas", analyze_args.deltas, "thinking/non-thinking deltas");
    analyze->add_flag("--distribution", analyze_args.distribution, "per-dimension distribution");
    analyze->add_flag("--languages", analyze_args.languages, "per-model language split");
    analyze->add_option("--out", analyze_args.out_dir, "write report files to this directory");
    analyze->add_option("--formats", analyze_args.formats, "report formats: json md csv");

    // report
    std::string report_analysis, report_out;
    std::vector<std::string> report_formats{"md"};
    auto* report = app.add_subcommand("report", "render reports from an analysis json");
    report->add_option("--analysis", report_analysis, "analysis json from `analyze`")->required();
    report->add_option("--out", report_out, "output directory")->required();
    report->add_option("--formats", report_formats, "report formats: json md csv");

    // translate
    std::vector<std::string> translate_images;
    std::string translate_dir = "translations";
    auto* translate = app.add_subcommand("translate", "translate infrared images to RGB");
    translate->add_option("images", translate_images, "image paths (relative to --image-root)")
        ->required();
    translate->add_option("--translations-dir", translate_dir, "translation cache root");

    // curate
    CurateArgs curate_args;
    auto* curate = app.add_subcommand("curate", "run the RGB-T pair curation pipeline");
    curate->add_option("--pairs", curate_args.pairs_path, "pair manifest jsonl")->required();
    curate->add_option("--out", curate_args.out_path, "output manifest")->required();
    curate->add_option("--root", curate_args.root, "root for pair image paths");
    curate->add_option("--stages", curate_args.stages,
                       "stages to run: resolution brightness edges dedup sample");
    curate->add_flag("--quality", curate_args.quality, "run the VLM pairing-quality stage");
    curate->add_option("--ir-embeddings", curate_args.ir_embeddings, "ir-side embedding manifest");
    curate->add_option("--rgb-embeddings", curate_args.rgb_embeddings,
                       "rgb-side embedding manifest");
    curate->add_option("--holdout-embeddings", curate_args.holdout_embeddings,
                       "benchmark holdout embedding manifest");
    curate->add_option("--target", curate_args.target, "number of pairs to sample");
    curate->add_option("--clusters", curate_args.clusters, "cluster count (0 = ceil(sqrt(n)))");

    // mock-serve
    std::string mock_scenario;
    int mock_port = 0;
    auto* mock = app.add_subcommand("mock-serve", "serve the deterministic mock endpoint");
    mock->add_option("--scenario", mock_scenario, "scenario json");
    mock->add_option("--port", mock_port, "port (0 = ephemeral)");

    // vqagen
    VqagenArgs vqagen_args;
    auto* vqagen = app.add_subcommand("vqagen", "draft questions for an image (or import drafts)");
    vqagen->add_option("--image", vqagen_args.image, "image path (relative to --image-root)");
    vqagen->add_option("--description", vqagen_args.description, "annotated target description");
    vqagen->add_option("--bbox", vqagen_args.bbox, "annotated target bounding box");
    vqagen->add_option("--endpoint", vqagen_args.endpoint, "config endpoint name");
    vqagen->add_option("--out", vqagen_args.out, "write drafts to this jsonl");
    vqagen->add_option("--import", vqagen_args.import_path, "draft jsonl to import");
    vqagen->add_option("--into", vqagen_args.into, "benchmark file to append to");
    vqagen->add_option("--dimension", vqagen_args.dimension, "dimension code for imported items");
    vqagen->add_flag("--accept-uncalibrated", vqagen_args.accept_uncalibrated,
                     "acknowledge drafts skipped human calibration");

    // Global flags may appear before or after the subcommand.
    for (auto* sub : {validate, run, status, judge_cmd, analyze, report, translate, curate, mock,
                      vqagen})
        sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    set_quiet(g.quiet);

    try {
        if (*validate) return cmd_validate(g, validate_benchmark);
        if (*run) return cmd_run(g, run_args);
        if (*status) return cmd_status(g, status_dir);
        if (*judge_cmd) return cmd_judge(g, judge_dir, judge_benchmark);
        if (*analyze) return cmd_analyze(g, analyze_args);
        if (*report) return cmd_report(g, report_analysis, report_out, report_formats);
        if (*translate) return cmd_translate(g, translate_images, translate_dir);
        if (*curate) return cmd_curate(g, curate_args);
        if (*mock) return cmd_mock_serve(g, mock_scenario, mock_port);
        if (*vqagen) return cmd_vqagen(g, vqagen_args);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitError;
    }
    return kExitUsage;
}
