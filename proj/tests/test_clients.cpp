#include <atomic>
#include <thread>

#include "doctest.h"

#include "irbench/clients.hpp"
#include "irbench/digest.hpp"
#include "irbench/errors.hpp"
#include "irbench/mock_server.hpp"
#include "testutil.hpp"

using namespace irbench;
using namespace irbench::test;

namespace {

EndpointConfig endpoint_for(const MockServer& mock, int max_attempts = 3, double backoff = 0.01) {
    EndpointConfig cfg;
    cfg.base_url = mock.base_url();
    cfg.model = "mock-model";
    cfg.retry.max_attempts = max_attempts;
    cfg.retry.base_backoff_s = backoff;
    cfg.timeout_s = 10;
    return cfg;
}

MessagePayload payload_with(const std::string& text, const std::string& task_id = "t1") {
    MessagePayload p;
    p.system_text = "sys";
    p.user_text = text;
    p.task_id = task_id;
    return p;
}

}  // namespace

TEST_CASE("chat retries transient failures and returns the verbatim reply") {
    MockScenario sc;
    sc.strategy = "scripted";
    sc.replies = {"B"};
    sc.status_seq = {503, 503, 200};
    MockServer mock(sc);
    mock.start();

    TempDir dir;
    auto cache = std::make_shared<ResponseCache>(dir / "cache");
    ChatClient client(endpoint_for(mock, 3), cache);

    ModelResponse r = client.chat(payload_with("q"));
    CHECK(r.raw_text == "B");
    CHECK(r.attempts == 3);
    CHECK(!r.cache_hit);
    CHECK(mock.log_snapshot().chat_calls == 3);

    SUBCASE("identical payload is served from cache with no network call") {
        ModelResponse again = client.chat(payload_with("q"));
        CHECK(again.cache_hit);
        CHECK(again.attempts == 0);
        CHECK(again.raw_text == "B");
        CHECK(mock.log_snapshot().chat_calls == 3);
    }
    SUBCASE("any payload byte change misses the cache") {
        ModelResponse other = client.chat(payload_with("q!"));
        CHECK(!other.cache_hit);
        CHECK(mock.log_snapshot().chat_calls == 4);
    }
}

TEST_CASE("exhausted after max_attempts of injected failures") {
    MockScenario sc;
    sc.failure_p = 1.0;
    MockServer mock(sc);
    mock.start();

    TempDir dir;
    auto cache = std::make_shared<ResponseCache>(dir / "cache");

    SUBCASE("max_attempts 1 gives up immediately") {
        ChatClient client(endpoint_for(mock, 1), cache);
        CHECK_THROWS_AS(client.chat(payload_with("q")), Exhausted);
        CHECK(mock.log_snapshot().chat_calls == 1);
    }
    SUBCASE("attempts never exceed max_attempts") {
        ChatClient client(endpoint_for(mock, 4), cache);
        CHECK_THROWS_AS(client.chat(payload_with("q")), Exhausted);
        CHECK(mock.log_snapshot().chat_calls == 4);
    }
}

TEST_CASE("non-429 4xx responses are terminal") {
    MockScenario sc;
    sc.strategy = "fixed-letter";
    sc.status_seq = {404, 200};
    MockServer mock(sc);
    mock.start();

    TempDir dir;
    auto cache = std::make_shared<ResponseCache>(dir / "cache");
    ChatClient client(endpoint_for(mock, 3), cache);
    CHECK_THROWS_AS(client.chat(payload_with("q")), ClientHttpError);
    CHECK(mock.log_snapshot().chat_calls == 1);  // no retry on 404
}

TEST_CASE("cache soundness holds under concurrent identical calls") {
    MockScenario sc;
    sc.strategy = "fixed-letter";
    sc.letter = "C";
    sc.latency_ms = 30;
    MockServer mock(sc);
    mock.start();

    TempDir dir;
    auto cache = std::make_shared<ResponseCache>(dir / "cache");
    ChatClient client(endpoint_for(mock), cache);

    std::vector<std::thread> threads;
    std::atomic<int> ok{0};
    for (int i = 0; i < 8; ++i)
        threads.emplace_back([&] {
            ModelResponse r = client.chat(payload_with("same"));
            if (r.raw_text == "C") ++ok;
        });
    for (auto& t : threads) t.join();
    CHECK(ok == 8);
    CHECK(mock.log_snapshot().chat_calls == 1);
}

TEST_CASE("in-flight requests never exceed max_parallel") {
    MockScenario sc;
    sc.strategy = "fixed-letter";
    sc.latency_ms = 40;
    MockServer mock(sc);
    mock.start();

    TempDir dir;
    auto cache = std::make_shared<ResponseCache>(dir / "cache");
    EndpointConfig cfg = endpoint_for(mock);
    cfg.max_parallel = 2;
    ChatClient client(cfg, cache);

    std::vector<std::thread> threads;
    for (int i = 0; i < 8; ++i)
        threads.emplace_back([&client, i] { client.chat(payload_with("q" + std::to_string(i))); });
    for (auto& t : threads) t.join();
    auto log = mock.log_snapshot();
    CHECK(log.chat_calls == 8);
    CHECK(log.max_in_flight <= 2);
}

TEST_CASE("auth and payload preconditions fail before any network call") {
    MockServer mock{MockScenario{}};
    mock.start();
    TempDir dir;
    auto cache = std::make_shared<ResponseCache>(dir / "cache");

    SUBCASE("missing auth env") {
        EndpointConfig cfg = endpoint_for(mock);
        cfg.auth_env = "IRBENCH_TEST_TOKEN_UNSET";
        CHECK_THROWS_AS(ChatClient(cfg, cache), AuthMissing);
        CHECK(mock.log_snapshot().chat_calls == 0);
    }
    SUBCASE("image payload over the byte cap") {
        EndpointConfig cfg = endpoint_for(mock);
        cfg.max_image_bytes = 64;
        ChatClient client(cfg, cache);
        MessagePayload p = payload_with("q");
        p.images = {ImageSlot{"ir", make_test_png(64, 64, 1)}};
        CHECK_THROWS_AS(client.chat(p), PayloadTooLarge);
        CHECK(mock.log_snapshot().chat_calls == 0);
    }
}

TEST_CASE("edit_image round-trips through the mock and caches by content") {
    MockScenario sc;
    sc.edit_mode = "identity";
    MockServer mock(sc);
    mock.start();

    TempDir dir;
    auto cache = std::make_shared<ResponseCache>(dir / "cache");
    EditClient client(endpoint_for(mock), cache);

    Bytes input = make_test_png(20, 16, 9);
    Bytes out = client.edit_image(input, "make it rgb");
    CHECK(out == input);  // identity mock echoes the input image
    CHECK(mock.log_snapshot().edit_calls == 1);

    SUBCASE("repeat call is served from cache") {
        Bytes again = client.edit_image(input, "make it rgb");
        CHECK(again == input);
        CHECK(mock.log_snapshot().edit_calls == 1);
    }
    SUBCASE("prompt change misses the cache") {
        client.edit_image(input, "different prompt");
        CHECK(mock.log_snapshot().edit_calls == 2);
    }
    SUBCASE("empty prompt is rejected before the network") {
        CHECK_THROWS(client.edit_image(input, ""));
        CHECK(mock.log_snapshot().edit_calls == 1);
    }
    SUBCASE("undecodable input is rejected before the network") {
        CHECK_THROWS_AS(client.edit_image(Bytes{'x', 'y'}, "p"), DecodeFailure);
        CHECK(mock.log_snapshot().edit_calls == 1);
    }
}

TEST_CASE("corrupt edit responses raise DecodeFailure") {
    MockScenario sc;
    sc.edit_mode = "corrupt";
    MockServer mock(sc);
    mock.start();

    TempDir dir;
    auto cache = std::make_shared<ResponseCache>(dir / "cache");
    EditClient client(endpoint_for(mock), cache);
    CHECK_THROWS_AS(client.edit_image(make_test_png(8, 8, 1), "p"), DecodeFailure);
}

TEST_CASE("mock scenario validation") {
    CHECK_THROWS_AS(MockScenario::from_json(json{{"strategy", "unknown"}}), BadScenario);
    CHECK_THROWS_AS(MockScenario::from_json(json{{"strategy", "scripted"}}), BadScenario);
    CHECK_THROWS_AS(MockScenario::from_json(json{{"edit_mode", "what"}}), BadScenario);
    MockScenario ok = MockScenario::from_json(
        json{{"strategy", "oracle"}, {"sidecar", json{{"t1", "B"}}}, {"latency_ms", 5}});
    CHECK(ok.sidecar.at("t1") == "B");
}

TEST_CASE("explicit port conflicts raise PortInUse") {
    MockServer first{MockScenario{}};
    int port = first.start();
    MockServer second{MockScenario{}};
    CHECK_THROWS_AS(second.start(port), PortInUse);
}
