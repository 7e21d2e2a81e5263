#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace irbench {

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// --- benchmark loading ---

class MalformedRecord : public Error {
public:
    MalformedRecord(std::size_t line, const std::string& cause)
        : Error("line " + std::to_string(line) + ": " + cause), line(line) {}
    std::size_t line;
};

class BadOptionCount : public MalformedRecord {
public:
    BadOptionCount(std::size_t line, std::size_t count)
        : MalformedRecord(line, "expected 4 options, got " + std::to_string(count)) {}
};

class DuplicateId : public Error {
public:
    explicit DuplicateId(const std::string& id) : Error("duplicate item id: " + id) {}
};

class MissingImage : public Error {
public:
    explicit MissingImage(const std::string& path) : Error("missing or undecodable image: " + path) {}
};

// --- network clients ---

class AuthMissing : public Error {
public:
    explicit AuthMissing(const std::string& env) : Error("auth token env var not set: " + env) {}
};

class PayloadTooLarge : public Error {
public:
    explicit PayloadTooLarge(const std::string& what) : Error(what) {}
};

// Non-retryable HTTP response (4xx other than 429).
class ClientHttpError : public Error {
public:
    ClientHttpError(int status, const std::string& body)
        : Error("http " + std::to_string(status) + ": " + body), status(status) {}
    int status;
};

class Exhausted : public Error {
public:
    explicit Exhausted(const std::string& last_error)
        : Error("retries exhausted; last error: " + last_error) {}
};

class DecodeFailure : public Error {
public:
    explicit DecodeFailure(const std::string& what) : Error(what) {}
};

class PortInUse : public Error {
public:
    explicit PortInUse(int port) : Error("port in use: " + std::to_string(port)) {}
};

class BadScenario : public Error {
public:
    explicit BadScenario(const std::string& what) : Error("bad mock scenario: " + what) {}
};

// --- prompt rendering / composition ---

class MissingTemplate : public Error {
public:
    explicit MissingTemplate(const std::string& key) : Error("missing prompt template: " + key) {}
};

class MissingTranslation : public Error {
public:
    explicit MissingTranslation(const std::string& what) : Error(what) {}
};

class MissingPrior : public Error {
public:
    explicit MissingPrior(const std::string& what) : Error(what) {}
};

// --- judging ---

// Judge endpoint unavailable: the verdict is deferred, never silently scored.
class JudgeClientError : public Error {
public:
    explicit JudgeClientError(const std::string& what) : Error(what) {}
};

class ParseFailure : public Error {
public:
    explicit ParseFailure(std::string raw)
        : Error("model reply does not match the required output schema"), raw_text(std::move(raw)) {}
    std::string raw_text;
};

// --- analysis ---

class IncompleteRun : public Error {
public:
    explicit IncompleteRun(const std::string& what) : Error(what) {}
};

class MissingModel : public Error {
public:
    explicit MissingModel(const std::string& name) : Error("model not found: " + name) {}
};

// --- curation ---

class DimensionMismatch : public Error {
public:
    explicit DimensionMismatch(const std::string& what) : Error(what) {}
};

class TargetTooLarge : public Error {
public:
    TargetTooLarge(std::size_t target, std::size_t available)
        : Error("sample target " + std::to_string(target) + " exceeds accepted count " +
                std::to_string(available)) {}
};

// --- infrastructure ---

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(what) {}
};

class StorageError : public Error {
public:
    explicit StorageError(const std::string& what) : Error(what) {}
};

}  // namespace irbench
