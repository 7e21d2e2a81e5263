#pragma once

#include <condition_variable>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "irbench/jsonl.hpp"
#include "irbench/message.hpp"

namespace irbench {

struct RetryPolicy {
    int max_attempts = 3;
    double base_backoff_s = 0.5;
};

struct EndpointConfig {
    std::string base_url;   // e.g. http://127.0.0.1:8080
    std::string auth_env;   // env var holding the bearer token; empty = no auth
    std::string model;
    int max_parallel = 4;
    double timeout_s = 120.0;
    RetryPolicy retry;
    std::optional<bool> thinking;  // passed through opaquely when set
    std::optional<int> steps;      // editing endpoints that accept a step count
    std::size_t max_image_bytes = 20u << 20;

    void validate() const;  // max_parallel >= 1, max_attempts >= 1
    json to_json() const;
    static EndpointConfig from_json(const json& j);
};

struct TokenUsage {
    long prompt_tokens = 0;
    long completion_tokens = 0;
};

struct ModelResponse {
    std::string task_id;
    std::string raw_text;  // verbatim, including whitespace
    double latency_ms = 0;
    int attempts = 0;  // network attempts; 0 on cache hit
    bool cache_hit = false;
    std::optional<TokenUsage> usage;
};

/// Content-addressed response cache: cache/<first2>/<digest>.resp. Values for
/// one key are identical by construction, so concurrent writers may race
/// freely (write-to-temp + rename).
class ResponseCache {
public:
    explicit ResponseCache(std::filesystem::path dir);
    std::optional<json> get(const std::string& key) const;
    void put(const std::string& key, const json& value);
    const std::filesystem::path& dir() const { return dir_; }

private:
    std::filesystem::path path_for(const std::string& key) const;
    std::filesystem::path dir_;
};

/// Counting limiter gating per-endpoint admission.
class Limiter {
public:
    explicit Limiter(int capacity) : capacity_(capacity) {}
    void acquire();
    void release();

private:
    int capacity_;
    int in_use_ = 0;
    std::mutex mu_;
    std::condition_variable cv_;
};

/// Chat-completions client with response cache, bounded parallelism, and
/// retry with exponential backoff + jitter on transport errors, 5xx, and 429.
/// Other 4xx are terminal. A shared client is safe for concurrent callers.
class ChatClient {
public:
    ChatClient(EndpointConfig cfg, std::shared_ptr<ResponseCache> cache);
    ~ChatClient();
    ChatClient(const ChatClient&) = delete;
    ChatClient& operator=(const ChatClient&) = delete;

    ModelResponse chat(const MessagePayload& payload);
    /// Raw variant taking a pre-built wire request (the task_id is only used
    /// to label the response).
    ModelResponse chat_wire(const json& wire_request, const std::string& task_id);

    const EndpointConfig& config() const { return cfg_; }

private:
    struct Impl;
    EndpointConfig cfg_;
    std::shared_ptr<ResponseCache> cache_;
    std::unique_ptr<Impl> impl_;
};

/// Images-edit client sharing the retry/cache behaviour of ChatClient.
class EditClient {
public:
    EditClient(EndpointConfig cfg, std::shared_ptr<ResponseCache> cache);
    ~EditClient();
    EditClient(const EditClient&) = delete;
    EditClient& operator=(const EditClient&) = delete;

    /// Sends one input image and the editing prompt; returns the decoded
    /// result bytes. Results are cached by (image digest, prompt, model).
    std::vector<unsigned char> edit_image(const std::vector<unsigned char>& image,
                                          const std::string& prompt);

    const EndpointConfig& config() const { return cfg_; }

private:
    struct Impl;
    EndpointConfig cfg_;
    std::shared_ptr<ResponseCache> cache_;
    std::unique_ptr<Impl> impl_;
};

}  // namespace irbench
