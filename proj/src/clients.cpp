#include "irbench/clients.hpp"

#include <chrono>
#include <cstdlib>
#include <future>
#include <random>
#include <thread>

#include "httplib.h"
#include "irbench/digest.hpp"
#include "irbench/errors.hpp"
#include "irbench/image_ops.hpp"
#include "irbench/log.hpp"

namespace irbench {

void EndpointConfig::validate() const {
    if (base_url.empty()) throw ConfigError("endpoint base_url is empty");
    if (max_parallel < 1) throw ConfigError("max_parallel must be >= 1");
    if (retry.max_attempts < 1) throw ConfigError("retry.max_attempts must be >= 1");
}

json EndpointConfig::to_json() const {
    json j{{"base_url", base_url},
           {"auth_env", auth_env},
           {"model", model},
           {"max_parallel", max_parallel},
           {"timeout_s", timeout_s},
           {"retry", {{"max_attempts", retry.max_attempts}, {"base_backoff_s", retry.base_backoff_s}}}};
    if (thinking) j["thinking"] = *thinking;
    if (steps) j["steps"] = *steps;
    return j;
}

EndpointConfig EndpointConfig::from_json(const json& j) {
    EndpointConfig cfg;
    cfg.base_url = j.value("base_url", "");
    cfg.auth_env = j.value("auth_env", "");
    cfg.model = j.value("model", "");
    cfg.max_parallel = j.value("max_parallel", 4);
    cfg.timeout_s = j.value("timeout_s", 120.0);
    if (j.contains("retry")) {
        cfg.retry.max_attempts = j["retry"].value("max_attempts", 3);
        cfg.retry.base_backoff_s = j["retry"].value("base_backoff_s", 0.5);
    }
    if (j.contains("thinking")) cfg.thinking = j["thinking"].get<bool>();
    if (j.contains("steps")) cfg.steps = j["steps"].get<int>();
    if (j.contains("max_image_bytes")) cfg.max_image_bytes = j["max_image_bytes"].get<std::size_t>();
    cfg.validate();
    return cfg;
}

// --- cache ---

ResponseCache::ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
}

std::filesystem::path ResponseCache::path_for(const std::string& key) const {
    return dir_ / key.substr(0, 2) / (key + ".resp");
}

std::optional<json> ResponseCache::get(const std::string& key) const {
    auto p = path_for(key);
    std::error_code ec;
    if (!std::filesystem::is_regular_file(p, ec)) return std::nullopt;
    json j = json::parse(read_text_file(p), nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded()) {
        log_warn("cache entry unreadable, ignoring: " + p.string());
        return std::nullopt;
    }
    return j;
}

void ResponseCache::put(const std::string& key, const json& value) {
    write_file_atomic(path_for(key), canonical_dump(value));
}

// --- limiter ---

void Limiter::acquire() {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return in_use_ < capacity_; });
    ++in_use_;
}

void Limiter::release() {
    {
        std::lock_guard lock(mu_);
        --in_use_;
    }
    cv_.notify_one();
}

namespace {

struct LimiterGuard {
    explicit LimiterGuard(Limiter& l) : limiter(l) { limiter.acquire(); }
    ~LimiterGuard() { limiter.release(); }
    Limiter& limiter;
};

struct HttpResult {
    int status = 0;
    std::string body;
    std::string transport_error;  // non-empty when no response was received
};

bool retryable(const HttpResult& r) {
    return !r.transport_error.empty() || r.status >= 500 || r.status == 429;
}

class HttpEndpoint {
public:
    explicit HttpEndpoint(const EndpointConfig& cfg) : cfg_(cfg), limiter_(cfg.max_parallel) {
        cfg_.validate();
        if (!cfg_.auth_env.empty()) {
            const char* tok = std::getenv(cfg_.auth_env.c_str());
            if (!tok || !*tok) throw AuthMissing(cfg_.auth_env);
            token_ = tok;
        }
        rng_.seed(std::random_device{}());
    }

    // POSTs the body with bounded parallelism and the configured retry
    // policy; returns the successful body. Throws ClientHttpError on terminal
    // 4xx and Exhausted after max_attempts. attempts_out counts network
    // attempts actually made.
    std::string post_with_retries(const std::string& path, const std::string& body,
                                  int& attempts_out) {
        std::string last_error;
        for (int attempt = 1; attempt <= cfg_.retry.max_attempts; ++attempt) {
            attempts_out = attempt;
            HttpResult r = post_once(path, body);
            if (!r.transport_error.empty()) {
                last_error = "transport: " + r.transport_error;
            } else if (r.status == 200) {
                return r.body;
            } else if (!retryable(r)) {
                throw ClientHttpError(r.status, r.body);
            } else {
                last_error = "http " + std::to_string(r.status);
            }
            if (attempt < cfg_.retry.max_attempts) backoff(attempt);
        }
        throw Exhausted(last_error);
    }

private:
    HttpResult post_once(const std::string& path, const std::string& body) {
        LimiterGuard guard(limiter_);
        httplib::Client cli(cfg_.base_url);
        cli.set_connection_timeout(std::chrono::milliseconds(
            static_cast<long>(cfg_.timeout_s * 1000)));
        cli.set_read_timeout(std::chrono::milliseconds(static_cast<long>(cfg_.timeout_s * 1000)));
        cli.set_write_timeout(std::chrono::milliseconds(static_cast<long>(cfg_.timeout_s * 1000)));
        if (!token_.empty()) cli.set_bearer_token_auth(token_);
        auto res = cli.Post(path, body, "application/json");
        if (!res) return HttpResult{0, "", httplib::to_string(res.error())};
        return HttpResult{res->status, res->body, ""};
    }

    void backoff(int attempt) {
        double base = cfg_.retry.base_backoff_s * static_cast<double>(1 << (attempt - 1));
        double jitter;
        {
            std::lock_guard lock(rng_mu_);
            jitter = std::uniform_real_distribution<double>(0.0, cfg_.retry.base_backoff_s)(rng_);
        }
        std::this_thread::sleep_for(std::chrono::duration<double>(base + jitter));
    }

    EndpointConfig cfg_;
    Limiter limiter_;
    std::string token_;
    std::mt19937_64 rng_;
    std::mutex rng_mu_;
};

double now_ms() {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

// Coalesces concurrent identical requests so a payload reaches the network at
// most once even before it lands in the cache.
class FlightTable {
public:
    // Returns {future, leader}. The leader must call finish() or fail().
    std::pair<std::shared_future<json>, bool> begin(const std::string& key) {
        std::lock_guard lock(mu_);
        auto it = flights_.find(key);
        if (it != flights_.end()) return {it->second.fut, false};
        Flight f;
        f.fut = f.promise.get_future().share();
        auto [pos, inserted] = flights_.emplace(key, std::move(f));
        return {pos->second.fut, true};
    }

    void finish(const std::string& key, const json& value) {
        std::promise<json> p = take(key);
        p.set_value(value);
    }

    void fail(const std::string& key, std::exception_ptr e) {
        std::promise<json> p = take(key);
        p.set_exception(e);
    }

private:
    struct Flight {
        std::promise<json> promise;
        std::shared_future<json> fut;
    };

    std::promise<json> take(const std::string& key) {
        std::lock_guard lock(mu_);
        auto it = flights_.find(key);
        std::promise<json> p = std::move(it->second.promise);
        flights_.erase(it);
        return p;
    }

    std::mutex mu_;
    std::map<std::string, Flight> flights_;
};

std::optional<TokenUsage> parse_usage(const json& body) {
    if (!body.contains("usage") || !body["usage"].is_object()) return std::nullopt;
    TokenUsage u;
    u.prompt_tokens = body["usage"].value("prompt_tokens", 0L);
    u.completion_tokens = body["usage"].value("completion_tokens", 0L);
    return u;
}

}  // namespace

// --- chat client ---

struct ChatClient::Impl {
    explicit Impl(const EndpointConfig& cfg) : http(cfg) {}
    HttpEndpoint http;
    FlightTable flights;
};

ChatClient::ChatClient(EndpointConfig cfg, std::shared_ptr<ResponseCache> cache)
    : cfg_(std::move(cfg)), cache_(std::move(cache)), impl_(std::make_unique<Impl>(cfg_)) {}

ChatClient::~ChatClient() = default;

ModelResponse ChatClient::chat(const MessagePayload& payload) {
    std::size_t image_bytes = 0;
    for (const auto& slot : payload.images) image_bytes += slot.bytes.size();
    if (image_bytes > cfg_.max_image_bytes)
        throw PayloadTooLarge("image payload of " + std::to_string(image_bytes) +
                              " bytes exceeds cap of " + std::to_string(cfg_.max_image_bytes));
    return chat_wire(chat_wire_request(payload, cfg_.model, cfg_.thinking), payload.task_id);
}

ModelResponse ChatClient::chat_wire(const json& wire_request, const std::string& task_id) {
    std::string canonical = canonical_request(wire_request);
    std::string key = sha256_hex(cfg_.model + '\n' + canonical);

    ModelResponse out;
    out.task_id = task_id;
    double start = now_ms();

    if (cache_) {
        if (auto hit = cache_->get(key)) {
            out.raw_text = hit->at("raw_text").get<std::string>();
            out.cache_hit = true;
            out.attempts = 0;
            if (hit->contains("usage"))
                out.usage = TokenUsage{(*hit)["usage"].value("prompt_tokens", 0L),
                                       (*hit)["usage"].value("completion_tokens", 0L)};
            out.latency_ms = now_ms() - start;
            return out;
        }
    }

    auto [flight, leader] = impl_->flights.begin(key);
    if (!leader) {
        json entry = flight.get();  // rethrows the leader's failure
        out.raw_text = entry.at("raw_text").get<std::string>();
        out.cache_hit = true;
        out.attempts = 0;
        if (entry.contains("usage"))
            out.usage = TokenUsage{entry["usage"].value("prompt_tokens", 0L),
                                   entry["usage"].value("completion_tokens", 0L)};
        out.latency_ms = now_ms() - start;
        return out;
    }

    try {
        int attempts = 0;
        std::string body =
            impl_->http.post_with_retries("/v1/chat/completions", canonical, attempts);
        json parsed = json::parse(body, nullptr, /*allow_exceptions=*/false);
        if (parsed.is_discarded()) throw Error("chat response is not valid json");
        out.raw_text = chat_wire_reply_text(parsed);
        out.attempts = attempts;
        out.usage = parse_usage(parsed);
        out.latency_ms = now_ms() - start;

        json entry{{"raw_text", out.raw_text}};
        if (out.usage)
            entry["usage"] = json{{"prompt_tokens", out.usage->prompt_tokens},
                                  {"completion_tokens", out.usage->completion_tokens}};
        if (cache_) cache_->put(key, entry);
        impl_->flights.finish(key, entry);
    } catch (...) {
        impl_->flights.fail(key, std::current_exception());
        throw;
    }
    return out;
}

// --- edit client ---

struct EditClient::Impl {
    explicit Impl(const EndpointConfig& cfg) : http(cfg) {}
    HttpEndpoint http;
    FlightTable flights;
};

EditClient::EditClient(EndpointConfig cfg, std::shared_ptr<ResponseCache> cache)
    : cfg_(std::move(cfg)), cache_(std::move(cache)), impl_(std::make_unique<Impl>(cfg_)) {}

EditClient::~EditClient() = default;

std::vector<unsigned char> EditClient::edit_image(const std::vector<unsigned char>& image,
                                                  const std::string& prompt) {
    if (prompt.empty()) throw Error("edit prompt is empty");
    if (!decode_info(image)) throw DecodeFailure("edit input image does not decode");
    if (image.size() > cfg_.max_image_bytes)
        throw PayloadTooLarge("edit image of " + std::to_string(image.size()) +
                              " bytes exceeds cap of " + std::to_string(cfg_.max_image_bytes));

    json req{{"model", cfg_.model}, {"prompt", prompt}, {"image", base64_encode(image)}};
    if (cfg_.steps) req["steps"] = *cfg_.steps;
    std::string canonical = canonical_request(req);
    std::string key = sha256_hex(cfg_.model + '\n' + canonical);

    std::string b64;
    if (cache_) {
        if (auto hit = cache_->get(key)) b64 = hit->at("b64_json").get<std::string>();
    }
    if (b64.empty()) {
        auto [flight, leader] = impl_->flights.begin(key);
        if (!leader) {
            b64 = flight.get().at("b64_json").get<std::string>();
        } else {
            try {
                int attempts = 0;
                std::string body =
                    impl_->http.post_with_retries("/v1/images/edits", canonical, attempts);
                json parsed = json::parse(body, nullptr, /*allow_exceptions=*/false);
                if (parsed.is_discarded()) throw Error("edit response is not valid json");
                if (!parsed.contains("data") || !parsed["data"].is_array() ||
                    parsed["data"].empty() || !parsed["data"][0].contains("b64_json"))
                    throw Error("malformed edit response: no data[0].b64_json");
                b64 = parsed["data"][0]["b64_json"].get<std::string>();
                impl_->flights.finish(key, json{{"b64_json", b64}});
            } catch (...) {
                impl_->flights.fail(key, std::current_exception());
                throw;
            }
        }
    }

    std::vector<unsigned char> out;
    try {
        out = base64_decode(b64);
    } catch (const std::exception& e) {
        throw DecodeFailure(std::string("edit response is not valid base64: ") + e.what());
    }
    if (!decode_info(out)) throw DecodeFailure("edit response image does not decode");
    if (cache_) cache_->put(key, json{{"b64_json", b64}});
    return out;
}

}  // namespace irbench
