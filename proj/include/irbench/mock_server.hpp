#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "irbench/jsonl.hpp"

namespace irbench {

/// Deterministic scripted behaviour for the mock endpoint. Strategies:
///   fixed-letter  every chat reply is `letter`
///   oracle        replies with the correct letter from the sidecar, looked
///                 up by request metadata.task_id (the sidecar is visible
///                 only to the mock)
///   scripted      replies consumed from `replies` in arrival order; the
///                 last entry repeats once exhausted
/// Failure/latency injection applies to any strategy: `status_seq` forces
/// the first N responses to the given statuses (200 = serve normally),
/// `failure_p` fails requests with probability p (seeded), `latency_ms`
/// delays every reply.
struct MockScenario {
    std::string strategy = "fixed-letter";
    std::string letter = "A";
    std::map<std::string, std::string> sidecar;  // task_id -> letter
    std::filesystem::path sidecar_path;          // loaded lazily when set
    std::vector<std::string> replies;
    std::vector<int> status_seq;
    double failure_p = 0.0;
    std::uint64_t failure_seed = 0;
    int latency_ms = 0;         // base delay per reply
    int latency_jitter_ms = 0;  // plus uniform [0, jitter), seeded

    // Edit endpoint behaviour: identity echoes the input image back, fixed
    // serves edit_image_path, corrupt returns undecodable bytes.
    std::string edit_mode = "identity";
    std::filesystem::path edit_image_path;

    static MockScenario from_json(const json& j);
    static MockScenario from_file(const std::filesystem::path& path);
};

struct MockLog {
    std::size_t chat_calls = 0;
    std::size_t edit_calls = 0;
    std::size_t failures_served = 0;
    int max_in_flight = 0;
    std::map<std::string, int> task_counts;      // metadata.task_id -> request count
    std::vector<std::string> payload_digests;    // sha256 of each request body

    json to_json() const;
};

/// In-process HTTP mock of the chat and edit wire protocols, with a call log
/// for test assertions. Control endpoints: GET /__mock/log, POST
/// /__mock/reset.
class MockServer {
public:
    explicit MockServer(MockScenario scenario);
    ~MockServer();
    MockServer(const MockServer&) = delete;
    MockServer& operator=(const MockServer&) = delete;

    /// Binds 127.0.0.1 (an ephemeral port when port == 0) and serves in a
    /// background thread. Returns the bound port. Throws PortInUse.
    int start(int port = 0);
    void stop();

    int port() const;
    std::string base_url() const;

    MockLog log_snapshot() const;
    void reset_log();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace irbench
