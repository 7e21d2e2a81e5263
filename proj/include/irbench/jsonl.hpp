#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <vector>

#include "json.hpp"

namespace irbench {

// Sorted-key json is the canonical form everywhere a digest or a byte-stable
// file is involved.
using json = nlohmann::json;

inline std::string canonical_dump(const json& j) { return j.dump(); }

/// Append-only writer for line-delimited records. Every record is flushed
/// before append() returns; a record is durable (for process-kill purposes)
/// once acknowledged.
class JsonlWriter {
public:
    explicit JsonlWriter(const std::filesystem::path& path);
    void append(const json& record);
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
    std::ofstream out_;
    std::mutex mu_;
};

/// Reads all records from a jsonl file. Unparsable lines (e.g. a truncated
/// final line left by a crash) are skipped and reported through on_corrupt.
std::vector<json> read_jsonl(
    const std::filesystem::path& path,
    const std::function<void(std::size_t line, const std::string& text)>& on_corrupt = {});

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

/// Write-then-rename so readers never observe a partially written file.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

}  // namespace irbench
