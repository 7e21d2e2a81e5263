#include <algorithm>
#include <fstream>
#include <set>

#include "doctest.h"

#include "irbench/analyze.hpp"
#include "irbench/errors.hpp"
#include "irbench/mock_server.hpp"
#include "irbench/runner.hpp"
#include "testutil.hpp"

using namespace irbench;
using namespace irbench::test;

namespace {

struct RunFixture {
    TempDir dir;
    Benchmark benchmark;
    PromptSet prompts = test_prompts();
    std::shared_ptr<ResponseCache> cache;

    explicit RunFixture(std::size_t items = 3) {
        auto path = write_fixture_benchmark(dir.path(), items);
        benchmark = load_benchmark(path, {dir.path(), true});
        cache = std::make_shared<ResponseCache>(dir / "cache");
    }

    EndpointConfig endpoint(const MockServer& mock, const std::string& model = "mock",
                            int max_attempts = 3) const {
        EndpointConfig cfg;
        cfg.base_url = mock.base_url();
        cfg.model = model;
        cfg.retry.max_attempts = max_attempts;
        cfg.retry.base_backoff_s = 0.01;
        return cfg;
    }

    std::map<std::string, std::string> oracle_sidecar(InputMode mode) const {
        std::map<std::string, std::string> sidecar;
        for (const auto& t : expand_benchmark(benchmark, mode, prompts.digest))
            sidecar[t.task_id] = std::string(1, t.correct_label);
        return sidecar;
    }

    RunManifest manifest(InputMode mode, const std::string& model = "mock") const {
        return RunManifest::create(benchmark, model, mode, prompts.digest, "judge0", 0);
    }
};

}  // namespace

TEST_CASE("oracle run judges every task correct") {
    RunFixture fx(3);
    MockScenario sc;
    sc.strategy = "oracle";
    sc.sidecar = fx.oracle_sidecar(InputMode::IF);
    MockServer mock(sc);
    mock.start();

    ChatClient chat(fx.endpoint(mock), fx.cache);
    RunDeps deps;
    deps.chat = &chat;
    deps.prompts = &fx.prompts;
    deps.image_root = fx.dir.path();

    auto run_dir = fx.dir / "run";
    RunState state = run_evaluation(fx.manifest(InputMode::IF), fx.benchmark, deps, run_dir);
    CHECK(state.complete());
    CHECK(state.judged == 24);
    CHECK(state.failed == 0);

    auto verdicts = load_verdicts(run_dir);
    CHECK(verdicts.size() == 24);
    for (const auto& [id, v] : verdicts) {
        CHECK(v.correct);
        CHECK(v.path == VerdictPath::ExactMatch);
    }

    SUBCASE("resume of a completed run performs zero network calls") {
        auto calls_before = mock.log_snapshot().chat_calls;
        RunState again = run_evaluation(fx.manifest(InputMode::IF), fx.benchmark, deps, run_dir);
        CHECK(again.complete());
        CHECK(mock.log_snapshot().chat_calls == calls_before);
    }
    SUBCASE("status is derived purely from disk") {
        RunState persisted = read_run_state(run_dir);
        CHECK(persisted.judged == 24);
        CHECK(persisted.pending == 0);
        CHECK(persisted.complete());
    }
    SUBCASE("a different manifest refuses the same run directory") {
        RunManifest other = fx.manifest(InputMode::IF, "different-model");
        CHECK_THROWS_AS(run_evaluation(other, fx.benchmark, deps, run_dir), ConfigError);
    }
    SUBCASE("scoring the oracle run gives 100 everywhere") {
        ScoreTable t = score_run(run_dir, fx.benchmark);
        for (const auto& [d, v] : t.by_dimension) CHECK(v == 100.0);
        CHECK(t.avg() == 100.0);
        ScoreOptions strict;
        strict.strict = true;
        ScoreTable s = score_run(run_dir, fx.benchmark, strict);
        CHECK(s.avg() == 100.0);
    }
}

TEST_CASE("dry run plans 8N tasks with zero network calls") {
    RunFixture fx(3);
    RunOptions opts;
    opts.dry_run = true;
    std::size_t planned = 0;
    std::map<std::pair<std::string, std::string>, std::set<char>> letters;
    opts.on_plan = [&](const EvalTask& t) {
        ++planned;
        letters[{t.item_id, t.language}].insert(t.correct_label);
    };
    RunState state =
        run_evaluation(fx.manifest(InputMode::IF), fx.benchmark, RunDeps{}, fx.dir / "plan", opts);
    CHECK(planned == 24);
    CHECK(state.pending == 24);
    CHECK(letters.size() == 6);
    for (const auto& [key, set] : letters) CHECK(set == std::set<char>{'A', 'B', 'C', 'D'});
}

TEST_CASE("fixed-letter run scores exactly 25 and strict scores exactly 0") {
    RunFixture fx(4);
    MockScenario sc;
    sc.strategy = "fixed-letter";
    sc.letter = "A";
    MockServer mock(sc);
    mock.start();

    ChatClient chat(fx.endpoint(mock), fx.cache);
    RunDeps deps;
    deps.chat = &chat;
    deps.prompts = &fx.prompts;
    deps.image_root = fx.dir.path();

    auto run_dir = fx.dir / "run";
    RunState state = run_evaluation(fx.manifest(InputMode::IF), fx.benchmark, deps, run_dir);
    REQUIRE(state.complete());

    ScoreTable t = score_run(run_dir, fx.benchmark);
    for (const auto& [item, fraction] : t.question_fraction) CHECK(fraction == 0.25);
    for (const auto& [d, v] : t.by_dimension) CHECK(v == 25.0);
    CHECK(t.avg() == 25.0);

    ScoreOptions strict;
    strict.strict = true;
    ScoreTable s = score_run(run_dir, fx.benchmark, strict);
    CHECK(s.avg() == 0.0);
    for (const auto& [d, v] : s.by_dimension) CHECK(v == 0.0);

    // strict never exceeds the lenient score anywhere
    for (const auto& [d, v] : s.by_dimension) CHECK(v <= t.by_dimension.at(d));
}

TEST_CASE("verbose replies without a judge endpoint stay responded, then judge completes them") {
    RunFixture fx(2);
    MockScenario sc;
    sc.strategy = "scripted";
    sc.replies = {"I think the answer must be A, given the thermal pattern."};
    MockServer mock(sc);
    mock.start();

    ChatClient chat(fx.endpoint(mock), fx.cache);
    RunDeps deps;
    deps.chat = &chat;
    deps.judge = nullptr;  // judge endpoint down / not configured
    deps.prompts = &fx.prompts;
    deps.image_root = fx.dir.path();

    auto run_dir = fx.dir / "run";
    RunState state = run_evaluation(fx.manifest(InputMode::IF), fx.benchmark, deps, run_dir);
    CHECK(!state.complete());
    CHECK(state.judged == 0);
    CHECK(state.responded == 16);  // stuck at Responded, never silently scored
    CHECK(state.failed == 0);

    CHECK_THROWS_AS(score_run(run_dir, fx.benchmark), IncompleteRun);

    SUBCASE("a working judge endpoint finishes the run without re-sending chat calls") {
        auto chat_calls = mock.log_snapshot().chat_calls;

        MockScenario judge_sc;
        judge_sc.strategy = "fixed-letter";
        judge_sc.letter = "A";
        MockServer judge_mock(judge_sc);
        judge_mock.start();
        ChatClient judge_client(fx.endpoint(judge_mock, "judge"), fx.cache);
        deps.judge = &judge_client;

        RunState resumed = run_evaluation(fx.manifest(InputMode::IF), fx.benchmark, deps, run_dir);
        CHECK(resumed.complete());
        CHECK(mock.log_snapshot().chat_calls == chat_calls);  // responses reused
        CHECK(judge_mock.log_snapshot().chat_calls == 16);

        // every verdict came through the parsed path with the extracted letter
        for (const auto& [id, v] : load_verdicts(run_dir)) {
            CHECK(v.path == VerdictPath::ParsedMatch);
            CHECK(v.extracted_label == 'A');
        }
    }
}

TEST_CASE("chat failures are recorded and excluded from scoring") {
    RunFixture fx(1);
    MockScenario sc;
    sc.failure_p = 1.0;
    MockServer mock(sc);
    mock.start();

    ChatClient chat(fx.endpoint(mock, "mock", 1), fx.cache);
    RunDeps deps;
    deps.chat = &chat;
    deps.prompts = &fx.prompts;
    deps.image_root = fx.dir.path();

    auto run_dir = fx.dir / "run";
    RunState state = run_evaluation(fx.manifest(InputMode::IF), fx.benchmark, deps, run_dir);
    CHECK(state.failed == 8);
    CHECK(state.judged == 0);
    CHECK_THROWS_AS(score_run(run_dir, fx.benchmark), IncompleteRun);

    ScoreOptions allow;
    allow.allow_partial = true;
    // failed tasks are excluded from scoring, never counted as wrong
    ScoreTable t = score_run(run_dir, fx.benchmark, allow);
    CHECK(t.question_fraction.count(fx.benchmark.items[0].id) == 0);
    CHECK(t.by_dimension.empty());
}

TEST_CASE("status tolerates a truncated final record") {
    RunFixture fx(1);
    MockScenario sc;
    sc.strategy = "oracle";
    sc.sidecar = fx.oracle_sidecar(InputMode::IF);
    MockServer mock(sc);
    mock.start();

    ChatClient chat(fx.endpoint(mock), fx.cache);
    RunDeps deps;
    deps.chat = &chat;
    deps.prompts = &fx.prompts;
    deps.image_root = fx.dir.path();
    auto run_dir = fx.dir / "run";
    run_evaluation(fx.manifest(InputMode::IF), fx.benchmark, deps, run_dir);

    // simulate a crash mid-write: drop the tail of the last verdict line
    auto verdict_path = run_dir / "verdicts.jsonl";
    std::string text = read_text_file(verdict_path);
    write_text_file(verdict_path, text.substr(0, text.size() - 20));

    RunState state = read_run_state(run_dir);
    CHECK(state.judged == 7);
    CHECK(state.responded == 1);  // the truncated task still has its response
    CHECK(state.pending == 0);

    SUBCASE("resuming re-judges only the truncated task from the stored response") {
        auto chat_calls = mock.log_snapshot().chat_calls;
        RunState resumed = run_evaluation(fx.manifest(InputMode::IF), fx.benchmark, deps, run_dir);
        CHECK(resumed.complete());
        CHECK(mock.log_snapshot().chat_calls == chat_calls);
        CHECK(load_verdicts(run_dir).size() == 8);
    }
}

TEST_CASE("verdicts are independent of completion order") {
    RunFixture fx(3);
    MockScenario sc;
    sc.strategy = "oracle";
    sc.sidecar = fx.oracle_sidecar(InputMode::IF);
    MockServer mock(sc);
    mock.start();

    auto run_with_workers = [&](const std::filesystem::path& run_dir, int workers) {
        ChatClient chat(fx.endpoint(mock), std::make_shared<ResponseCache>(run_dir / "cache"));
        RunDeps deps;
        deps.chat = &chat;
        deps.prompts = &fx.prompts;
        deps.image_root = fx.dir.path();
        RunOptions opts;
        opts.workers = workers;
        run_evaluation(fx.manifest(InputMode::IF), fx.benchmark, deps, run_dir, opts);
        auto records = read_jsonl(run_dir / "verdicts.jsonl");
        std::vector<std::string> lines;
        for (const auto& r : records) lines.push_back(canonical_dump(r));
        std::sort(lines.begin(), lines.end());
        return lines;
    };

    auto serial = run_with_workers(fx.dir / "run1", 1);
    auto parallel = run_with_workers(fx.dir / "run2", 8);
    CHECK(serial == parallel);
    CHECK(serial.size() == 24);
}

TEST_CASE("strict scoring follows the per-language all-orders rule") {
    // Hand-built run: one item, en 3/4 correct, zh 4/4 correct.
    RunFixture fx(1);
    auto run_dir = fx.dir / "run";
    std::filesystem::create_directories(run_dir);
    RunManifest manifest = fx.manifest(InputMode::IF);
    write_text_file(run_dir / "manifest.json", canonical_dump(manifest.to_json()));

    JsonlWriter verdicts(run_dir / "verdicts.jsonl");
    for (const auto& t : expand_benchmark(fx.benchmark, InputMode::IF, fx.prompts.digest)) {
        Verdict v;
        v.task_id = t.task_id;
        v.path = VerdictPath::ExactMatch;
        v.correct = !(t.language == "en" && t.shift == 2);  // one english miss
        verdicts.append(v.to_json());
    }

    ScoreTable lenient = score_run(run_dir, fx.benchmark);
    CHECK(lenient.question_fraction.begin()->second == doctest::Approx(7.0 / 8.0));

    ScoreOptions strict;
    strict.strict = true;
    ScoreTable s = score_run(run_dir, fx.benchmark, strict);
    // en fails the all-orders bar, zh passes: (0 + 1) / 2
    CHECK(s.question_fraction.begin()->second == doctest::Approx(0.5));
    CHECK(s.language_dimension.at("en").begin()->second == doctest::Approx(0.0));
    CHECK(s.language_dimension.at("zh").begin()->second == doctest::Approx(100.0));

    ScoreOptions strict8;
    strict8.strict = true;
    strict8.strict_all_orders = true;
    ScoreTable s8 = score_run(run_dir, fx.benchmark, strict8);
    CHECK(s8.question_fraction.begin()->second == doctest::Approx(0.0));

    // monotone dominance: strict <= lenient per cell
    for (const auto& [d, v] : s.by_dimension) CHECK(v <= lenient.by_dimension.at(d));
}

TEST_CASE("language split reflects per-language sub-scores") {
    RunFixture fx(2);
    auto run_dir = fx.dir / "run";
    std::filesystem::create_directories(run_dir);
    RunManifest manifest = fx.manifest(InputMode::IF);
    write_text_file(run_dir / "manifest.json", canonical_dump(manifest.to_json()));

    JsonlWriter verdicts(run_dir / "verdicts.jsonl");
    for (const auto& t : expand_benchmark(fx.benchmark, InputMode::IF, fx.prompts.digest)) {
        Verdict v;
        v.task_id = t.task_id;
        v.path = VerdictPath::ExactMatch;
        v.correct = (t.language == "zh");  // all zh right, all en wrong
        verdicts.append(v.to_json());
    }
    ScoreTable t = score_run(run_dir, fx.benchmark);
    ModelSpec spec;
    spec.name = "skewed";
    auto split = language_split({{spec, t}});
    REQUIRE(split.size() == 1);
    CHECK(split[0].en == doctest::Approx(0.0));
    CHECK(split[0].zh == doctest::Approx(100.0));
    CHECK(split[0].abs_diff == doctest::Approx(100.0));
}
