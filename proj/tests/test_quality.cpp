#include "doctest.h"

#include "irbench/curate.hpp"
#include "irbench/errors.hpp"
#include "irbench/judge.hpp"
#include "irbench/mock_server.hpp"
#include "testutil.hpp"

using namespace irbench;
using namespace irbench::test;

namespace {

struct QualityFixture {
    TempDir dir;
    std::shared_ptr<ResponseCache> cache = std::make_shared<ResponseCache>(dir / "cache");
    std::string rubric = test_prompts().require("quality_rubric");
    RgbtPair pair;

    QualityFixture() {
        write_file_bytes(dir / "ir.png", make_test_png(32, 24, 1));
        write_file_bytes(dir / "rgb.png", make_test_png(32, 24, 2));
        pair.pair_id = "q1";
        pair.ir = "ir.png";
        pair.rgb = "rgb.png";
    }

    ChatClient client_for(const MockServer& mock, int max_attempts = 1) {
        EndpointConfig cfg;
        cfg.base_url = mock.base_url();
        cfg.model = "vlm";
        cfg.retry.max_attempts = max_attempts;
        cfg.retry.base_backoff_s = 0.01;
        return ChatClient(cfg, cache);
    }
};

}  // namespace

TEST_CASE("quality_judge maps the PASS and FAIL tokens") {
    QualityFixture fx;
    SUBCASE("PASS") {
        MockScenario sc;
        sc.strategy = "scripted";
        sc.replies = {"PASS"};
        MockServer mock(sc);
        mock.start();
        auto client = fx.client_for(mock);
        QualityOutcome out = quality_judge(fx.pair, client, fx.rubric, fx.dir.path());
        CHECK(out.pass);
        CHECK(out.raw == "PASS");
    }
    SUBCASE("FAIL, with trailing punctuation tolerated") {
        MockScenario sc;
        sc.strategy = "scripted";
        sc.replies = {"FAIL."};
        MockServer mock(sc);
        mock.start();
        auto client = fx.client_for(mock);
        CHECK(!quality_judge(fx.pair, client, fx.rubric, fx.dir.path()).pass);
    }
    SUBCASE("prose fails closed") {
        MockScenario sc;
        sc.strategy = "scripted";
        sc.replies = {"The two images look roughly similar to me."};
        MockServer mock(sc);
        mock.start();
        auto client = fx.client_for(mock);
        CHECK(!quality_judge(fx.pair, client, fx.rubric, fx.dir.path()).pass);
    }
}

TEST_CASE("apply_quality_filter leaves pairs Candidate on client errors") {
    QualityFixture fx;
    MockScenario sc;
    sc.failure_p = 1.0;
    MockServer mock(sc);
    mock.start();
    auto client = fx.client_for(mock, 1);

    std::vector<RgbtPair> pairs{fx.pair};
    apply_quality_filter(pairs, client, fx.rubric, fx.dir.path());
    CHECK(pairs[0].status == PairStatus::Candidate);  // retryable, never silently passed

    SUBCASE("a later healthy pass rejects failures and accepts passes") {
        MockScenario ok;
        ok.strategy = "scripted";
        ok.replies = {"FAIL"};
        MockServer healthy(ok);
        healthy.start();
        auto client2 = fx.client_for(healthy);
        apply_quality_filter(pairs, client2, fx.rubric, fx.dir.path());
        CHECK(pairs[0].status == PairStatus::Rejected);
        CHECK(pairs[0].reject_stage == "quality");
    }
}

TEST_CASE("judging the same response twice is deterministic and cached") {
    QualityFixture fx;
    MockScenario sc;
    sc.strategy = "scripted";
    sc.replies = {"B"};
    MockServer judge_mock(sc);
    judge_mock.start();
    auto judge_client = fx.client_for(judge_mock, 3);

    PromptSet prompts = test_prompts();
    BenchmarkItem item = make_item("det", 1);
    EvalTask task = expand_item(item, InputMode::IF, prompts.digest)[1];  // correct label B

    const std::string raw = "Considering everything, I would go with B.";
    Verdict first = judge_response(raw, task, &judge_client, prompts);
    Verdict second = judge_response(raw, task, &judge_client, prompts);
    CHECK(canonical_dump(first.to_json()) == canonical_dump(second.to_json()));
    CHECK(first.path == VerdictPath::ParsedMatch);
    // the judge endpoint saw the extraction payload exactly once
    CHECK(judge_mock.log_snapshot().chat_calls == 1);
}
