#include "irbench/jsonl.hpp"

#include <unistd.h>

#include <sstream>

#include "irbench/errors.hpp"
#include "irbench/log.hpp"

namespace irbench {

JsonlWriter::JsonlWriter(const std::filesystem::path& path) : path_(path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    // A crash can leave a partial final line with no newline. Terminate it so
    // appended records stay parseable; readers skip the corrupt fragment.
    std::error_code ec;
    auto size = std::filesystem::file_size(path, ec);
    bool needs_newline = false;
    if (!ec && size > 0) {
        std::ifstream probe(path, std::ios::binary);
        probe.seekg(-1, std::ios::end);
        char last = '\n';
        probe.read(&last, 1);
        needs_newline = probe && last != '\n';
    }
    out_.open(path, std::ios::app | std::ios::binary);
    if (!out_) throw StorageError("cannot open for append: " + path.string());
    if (needs_newline) {
        out_ << '\n';
        out_.flush();
    }
}

void JsonlWriter::append(const json& record) {
    std::string line = canonical_dump(record);
    std::lock_guard lock(mu_);
    out_ << line << '\n';
    out_.flush();
    if (!out_) throw StorageError("write failed: " + path_.string());
}

std::vector<json> read_jsonl(
    const std::filesystem::path& path,
    const std::function<void(std::size_t, const std::string&)>& on_corrupt) {
    std::vector<json> records;
    std::ifstream in(path, std::ios::binary);
    if (!in) return records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
        if (j.is_discarded()) {
            if (on_corrupt)
                on_corrupt(line_no, line);
            else
                log_warn(path.filename().string() + ": skipping corrupt record at line " +
                         std::to_string(line_no));
            continue;
        }
        records.push_back(std::move(j));
    }
    return records;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw StorageError("cannot read: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw StorageError("cannot write: " + path.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw StorageError("write failed: " + path.string());
}

void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp." + std::to_string(::getpid());
    write_text_file(tmp, bytes);
    std::filesystem::rename(tmp, path);
}

}  // namespace irbench
