#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "irbench/jsonl.hpp"

namespace irbench {

// The ten understanding dimensions, grouped into three task categories.
enum class Dimension { SU, IT, VC, TL, SRU, OC, TFU, AR, TFR, CR };

enum class TaskCategory { CoarsePerception, FinePerception, Reasoning };

inline constexpr std::array<Dimension, 10> kAllDimensions = {
    Dimension::SU,  Dimension::IT, Dimension::VC,  Dimension::TL, Dimension::SRU,
    Dimension::OC,  Dimension::TFU, Dimension::AR, Dimension::TFR, Dimension::CR};

std::string_view dimension_code(Dimension d);
std::string_view dimension_name(Dimension d);
TaskCategory dimension_category(Dimension d);
std::optional<Dimension> parse_dimension(std::string_view code);

inline constexpr std::array<std::string_view, 2> kLanguages = {"en", "zh"};

struct BenchmarkItem {
    std::string id;
    std::string image;  // relative to the image root
    Dimension dimension = Dimension::SU;
    std::map<std::string, std::string> question;  // language -> text, {"en","zh"}
    std::array<std::string, 4> options;           // canonical order
    int answer_index = 0;                         // 0..3 into canonical order

    json to_json() const;
    static BenchmarkItem from_json(const json& j);
};

struct BenchmarkMeta {
    std::string name;
    std::string version;
    std::string content_hash;
};

struct Benchmark {
    std::vector<BenchmarkItem> items;
    BenchmarkMeta meta;

    const BenchmarkItem* find(const std::string& id) const;
};

struct LoadOptions {
    std::filesystem::path image_root = ".";
    bool check_images = true;  // verify each referenced image exists and decodes
};

/// One canonical record per line; meta.name/version derive from the file name
/// and content hash.
Benchmark load_benchmark(const std::filesystem::path& path, const LoadOptions& opts = {});

/// Parses records from memory (no image checks). Used by tests and by the
/// canonical round-trip.
Benchmark parse_benchmark(std::string_view text, const std::string& name = "mem");

/// Canonical line-delimited serialization: sorted keys, no insignificant
/// whitespace, one item per line. load(serialize(b)) == b and the bytes are
/// stable across key order in the source file.
std::string serialize_canonical(const Benchmark& b);

std::string compute_content_hash(const std::vector<BenchmarkItem>& items);

/// Histogram of answer_index over items (positions 0..3). Counts sum to the
/// item count. Imbalance is reported by callers as a warning, never an error.
std::array<std::size_t, 4> answer_balance(const Benchmark& b);

}  // namespace irbench
