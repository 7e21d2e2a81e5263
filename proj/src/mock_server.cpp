#include "irbench/mock_server.hpp"

#include <atomic>
#include <chrono>
#include <mutex>
#include <random>
#include <thread>

#include "httplib.h"
#include "irbench/digest.hpp"
#include "irbench/errors.hpp"
#include "irbench/image_ops.hpp"

namespace irbench {

MockScenario MockScenario::from_json(const json& j) {
    MockScenario s;
    try {
        s.strategy = j.value("strategy", "fixed-letter");
        s.letter = j.value("letter", "A");
        if (j.contains("sidecar")) {
            if (j["sidecar"].is_string()) {
                s.sidecar_path = j["sidecar"].get<std::string>();
            } else {
                for (const auto& [k, v] : j["sidecar"].items()) s.sidecar[k] = v.get<std::string>();
            }
        }
        if (j.contains("replies"))
            for (const auto& r : j["replies"]) s.replies.push_back(r.get<std::string>());
        if (j.contains("status_seq"))
            for (const auto& v : j["status_seq"]) s.status_seq.push_back(v.get<int>());
        s.failure_p = j.value("failure_p", 0.0);
        s.failure_seed = j.value("failure_seed", 0ULL);
        s.latency_ms = j.value("latency_ms", 0);
        s.latency_jitter_ms = j.value("latency_jitter_ms", 0);
        s.edit_mode = j.value("edit_mode", "identity");
        if (j.contains("edit_image")) s.edit_image_path = j["edit_image"].get<std::string>();
    } catch (const std::exception& e) {
        throw BadScenario(e.what());
    }
    if (s.strategy != "fixed-letter" && s.strategy != "oracle" && s.strategy != "scripted")
        throw BadScenario("unknown strategy: " + s.strategy);
    if (s.strategy == "scripted" && s.replies.empty())
        throw BadScenario("scripted strategy needs replies");
    if (s.edit_mode != "identity" && s.edit_mode != "fixed" && s.edit_mode != "corrupt")
        throw BadScenario("unknown edit_mode: " + s.edit_mode);
    return s;
}

MockScenario MockScenario::from_file(const std::filesystem::path& path) {
    json j = json::parse(read_text_file(path), nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded()) throw BadScenario("scenario file is not valid json: " + path.string());
    return from_json(j);
}

json MockLog::to_json() const {
    return json{{"chat_calls", chat_calls},
                {"edit_calls", edit_calls},
                {"failures_served", failures_served},
                {"max_in_flight", max_in_flight},
                {"task_counts", task_counts},
                {"payload_digests", payload_digests}};
}

struct MockServer::Impl {
    explicit Impl(MockScenario sc) : scenario(std::move(sc)) {
        if (!scenario.sidecar_path.empty()) {
            json j = json::parse(read_text_file(scenario.sidecar_path), nullptr, false);
            if (j.is_discarded()) throw BadScenario("sidecar is not valid json");
            for (const auto& [k, v] : j.items()) scenario.sidecar[k] = v.get<std::string>();
        }
        failure_rng.seed(scenario.failure_seed);
    }

    MockScenario scenario;
    httplib::Server server;
    std::thread serve_thread;
    int bound_port = 0;

    mutable std::mutex mu;
    MockLog log;
    std::size_t reply_cursor = 0;
    std::size_t status_cursor = 0;
    std::atomic<int> in_flight{0};
    std::mt19937_64 failure_rng;
    std::mt19937_64 latency_rng{12345};

    int next_latency_ms() {
        int ms = scenario.latency_ms;
        if (scenario.latency_jitter_ms > 0) {
            std::lock_guard lock(mu);
            ms += static_cast<int>(latency_rng() %
                                   static_cast<std::uint64_t>(scenario.latency_jitter_ms));
        }
        return ms;
    }

    // Returns 0 when the request should be served normally, else the status
    // to inject.
    int next_injected_status() {
        if (status_cursor < scenario.status_seq.size()) {
            int s = scenario.status_seq[status_cursor++];
            if (s != 200) return s;
            return 0;
        }
        if (scenario.failure_p > 0.0) {
            double u = std::uniform_real_distribution<double>(0.0, 1.0)(failure_rng);
            if (u < scenario.failure_p) return 503;
        }
        return 0;
    }

    std::string chat_reply_for(const json& req) {
        if (scenario.strategy == "fixed-letter") return scenario.letter;
        if (scenario.strategy == "oracle") {
            std::string task_id;
            if (req.contains("metadata") && req["metadata"].contains("task_id"))
                task_id = req["metadata"]["task_id"].get<std::string>();
            auto it = scenario.sidecar.find(task_id);
            if (it == scenario.sidecar.end())
                throw Error("oracle has no sidecar entry for task " + task_id);
            return it->second;
        }
        // scripted
        std::string reply = scenario.replies[std::min(reply_cursor, scenario.replies.size() - 1)];
        ++reply_cursor;
        return reply;
    }
};

MockServer::MockServer(MockScenario scenario) : impl_(std::make_unique<Impl>(std::move(scenario))) {
    auto& srv = impl_->server;

    // Default httplib options include SO_REUSEPORT, which would let two mocks
    // share a port silently; keep only address reuse so conflicts surface.
    srv.set_socket_options([](socket_t sock) {
        int yes = 1;
        setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes),
                   sizeof(yes));
    });

    auto track = [this](const httplib::Request& req, auto&& handler, httplib::Response& res) {
        int current = ++impl_->in_flight;
        {
            std::lock_guard lock(impl_->mu);
            impl_->log.max_in_flight = std::max(impl_->log.max_in_flight, current);
        }
        if (int delay = impl_->next_latency_ms(); delay > 0)
            std::this_thread::sleep_for(std::chrono::milliseconds(delay));
        handler(req, res);
        --impl_->in_flight;
    };

    srv.Post("/v1/chat/completions", [this, track](const httplib::Request& req, httplib::Response& res) {
        track(req, [this](const httplib::Request& rq, httplib::Response& rs) {
            json body = json::parse(rq.body, nullptr, false);
            std::lock_guard lock(impl_->mu);
            impl_->log.chat_calls++;
            impl_->log.payload_digests.push_back(sha256_hex(rq.body));
            if (!body.is_discarded() && body.contains("metadata") &&
                body["metadata"].contains("task_id"))
                impl_->log.task_counts[body["metadata"]["task_id"].get<std::string>()]++;
            if (int status = impl_->next_injected_status()) {
                impl_->log.failures_served++;
                rs.status = status;
                rs.set_content(json{{"error", "injected"}}.dump(), "application/json");
                return;
            }
            std::string reply;
            try {
                reply = impl_->chat_reply_for(body.is_discarded() ? json::object() : body);
            } catch (const std::exception& e) {
                rs.status = 500;
                rs.set_content(json{{"error", e.what()}}.dump(), "application/json");
                return;
            }
            json out{{"choices", json::array({json{{"message", json{{"role", "assistant"},
                                                                    {"content", reply}}}}})},
                     {"usage", json{{"prompt_tokens", 7}, {"completion_tokens", 1}}}};
            rs.set_content(out.dump(), "application/json");
        }, res);
    });

    srv.Post("/v1/images/edits", [this, track](const httplib::Request& req, httplib::Response& res) {
        track(req, [this](const httplib::Request& rq, httplib::Response& rs) {
            json body = json::parse(rq.body, nullptr, false);
            std::lock_guard lock(impl_->mu);
            impl_->log.edit_calls++;
            impl_->log.payload_digests.push_back(sha256_hex(rq.body));
            if (int status = impl_->next_injected_status()) {
                impl_->log.failures_served++;
                rs.status = status;
                rs.set_content(json{{"error", "injected"}}.dump(), "application/json");
                return;
            }
            std::string b64;
            if (impl_->scenario.edit_mode == "identity") {
                b64 = body.is_discarded() ? "" : body.value("image", "");
            } else if (impl_->scenario.edit_mode == "fixed") {
                b64 = base64_encode(read_file_bytes(impl_->scenario.edit_image_path));
            } else {  // corrupt
                b64 = base64_encode(std::vector<unsigned char>{'n', 'o', 't', 'p', 'n', 'g'});
            }
            rs.set_content(json{{"data", json::array({json{{"b64_json", b64}}})}}.dump(),
                           "application/json");
        }, res);
    });

    srv.Get("/__mock/log", [this](const httplib::Request&, httplib::Response& res) {
        res.set_content(log_snapshot().to_json().dump(), "application/json");
    });

    srv.Post("/__mock/reset", [this](const httplib::Request&, httplib::Response& res) {
        reset_log();
        res.set_content("{}", "application/json");
    });
}

MockServer::~MockServer() { stop(); }

int MockServer::start(int port) {
    auto& srv = impl_->server;
    if (port == 0) {
        impl_->bound_port = srv.bind_to_any_port("127.0.0.1");
        if (impl_->bound_port <= 0) throw Error("mock server failed to bind");
    } else {
        if (!srv.bind_to_port("127.0.0.1", port)) throw PortInUse(port);
        impl_->bound_port = port;
    }
    impl_->serve_thread = std::thread([this] { impl_->server.listen_after_bind(); });
    srv.wait_until_ready();
    return impl_->bound_port;
}

void MockServer::stop() {
    if (impl_->serve_thread.joinable()) {
        impl_->server.stop();
        impl_->serve_thread.join();
    }
}

int MockServer::port() const { return impl_->bound_port; }

std::string MockServer::base_url() const {
    return "http://127.0.0.1:" + std::to_string(impl_->bound_port);
}

MockLog MockServer::log_snapshot() const {
    std::lock_guard lock(impl_->mu);
    return impl_->log;
}

void MockServer::reset_log() {
    std::lock_guard lock(impl_->mu);
    impl_->log = MockLog{};
    impl_->reply_cursor = 0;
    impl_->status_cursor = 0;
}

}  // namespace irbench
