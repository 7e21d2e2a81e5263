#include "irbench/benchmark.hpp"

#include <set>
#include <sstream>

#include "irbench/digest.hpp"
#include "irbench/errors.hpp"
#include "irbench/image_ops.hpp"

namespace irbench {

std::string_view dimension_code(Dimension d) {
    switch (d) {
        case Dimension::SU: return "SU";
        case Dimension::IT: return "IT";
        case Dimension::VC: return "VC";
        case Dimension::TL: return "TL";
        case Dimension::SRU: return "SRU";
        case Dimension::OC: return "OC";
        case Dimension::TFU: return "TFU";
        case Dimension::AR: return "AR";
        case Dimension::TFR: return "TFR";
        case Dimension::CR: return "CR";
    }
    return "??";
}

std::string_view dimension_name(Dimension d) {
    switch (d) {
        case Dimension::SU: return "Scene Understanding";
        case Dimension::IT: return "Image Theme";
        case Dimension::VC: return "Viewpoint of Capture";
        case Dimension::TL: return "Target Localization";
        case Dimension::SRU: return "Spatial Relationship Understanding";
        case Dimension::OC: return "Object Counting";
        case Dimension::TFU: return "Thermal Feature Understanding";
        case Dimension::AR: return "Action Recognition";
        case Dimension::TFR: return "Thermal Feature Reasoning";
        case Dimension::CR: return "Commonsense Reasoning";
    }
    return "??";
}

TaskCategory dimension_category(Dimension d) {
    switch (d) {
        case Dimension::SU:
        case Dimension::IT:
        case Dimension::VC: return TaskCategory::CoarsePerception;
        case Dimension::TL:
        case Dimension::SRU:
        case Dimension::OC:
        case Dimension::TFU:
        case Dimension::AR: return TaskCategory::FinePerception;
        case Dimension::TFR:
        case Dimension::CR: return TaskCategory::Reasoning;
    }
    return TaskCategory::Reasoning;
}

std::optional<Dimension> parse_dimension(std::string_view code) {
    for (Dimension d : kAllDimensions)
        if (dimension_code(d) == code) return d;
    return std::nullopt;
}

json BenchmarkItem::to_json() const {
    json q;
    for (const auto& [lang, text] : question) q[lang] = text;
    return json{{"id", id},
                {"image", image},
                {"dimension", std::string(dimension_code(dimension))},
                {"question", q},
                {"options", options},
                {"answer", answer_index}};
}

BenchmarkItem BenchmarkItem::from_json(const json& j) {
    BenchmarkItem item;
    item.id = j.at("id").get<std::string>();
    item.image = j.at("image").get<std::string>();
    auto dim = parse_dimension(j.at("dimension").get<std::string>());
    if (!dim) throw Error("unknown dimension: " + j.at("dimension").get<std::string>());
    item.dimension = *dim;
    for (const auto& [lang, text] : j.at("question").items())
        item.question[lang] = text.get<std::string>();
    const auto& opts = j.at("options");
    if (!opts.is_array() || opts.size() != 4) throw BadOptionCount(0, opts.is_array() ? opts.size() : 0);
    for (std::size_t i = 0; i < 4; ++i) item.options[i] = opts[i].get<std::string>();
    item.answer_index = j.at("answer").get<int>();
    return item;
}

const BenchmarkItem* Benchmark::find(const std::string& id) const {
    for (const auto& item : items)
        if (item.id == id) return &item;
    return nullptr;
}

namespace {

void validate_item(const BenchmarkItem& item, std::size_t line_no) {
    if (item.id.empty()) throw MalformedRecord(line_no, "empty id");
    if (item.image.empty()) throw MalformedRecord(line_no, "empty image reference");
    if (item.answer_index < 0 || item.answer_index > 3)
        throw MalformedRecord(line_no, "answer index out of range");
    for (std::string_view lang : kLanguages) {
        auto it = item.question.find(std::string(lang));
        if (it == item.question.end() || it->second.empty())
            throw MalformedRecord(line_no, "missing or empty question for language '" +
                                               std::string(lang) + "'");
    }
    std::set<std::string> distinct;
    for (const auto& opt : item.options) {
        if (opt.empty()) throw MalformedRecord(line_no, "empty option text");
        if (!distinct.insert(opt).second)
            throw MalformedRecord(line_no, "duplicate option text: " + opt);
    }
}

Benchmark parse_lines(std::istream& in, const std::string& name,
                      const LoadOptions* opts) {
    Benchmark b;
    b.meta.name = name;
    std::set<std::string> seen_ids;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
        if (j.is_discarded()) throw MalformedRecord(line_no, "not valid json");
        BenchmarkItem item;
        try {
            item = BenchmarkItem::from_json(j);
        } catch (const BadOptionCount&) {
            std::size_t n = j.contains("options") && j["options"].is_array() ? j["options"].size() : 0;
            throw BadOptionCount(line_no, n);
        } catch (const MalformedRecord&) {
            throw;
        } catch (const std::exception& e) {
            throw MalformedRecord(line_no, e.what());
        }
        validate_item(item, line_no);
        if (!seen_ids.insert(item.id).second) throw DuplicateId(item.id);
        if (opts && opts->check_images) {
            auto resolved = opts->image_root / item.image;
            if (!probe_image(resolved)) throw MissingImage(resolved.string());
        }
        b.items.push_back(std::move(item));
    }
    b.meta.content_hash = compute_content_hash(b.items);
    b.meta.version = b.meta.content_hash.substr(0, 12);
    return b;
}

}  // namespace

Benchmark load_benchmark(const std::filesystem::path& path, const LoadOptions& opts) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw StorageError("cannot read benchmark file: " + path.string());
    return parse_lines(in, path.stem().string(), &opts);
}

Benchmark parse_benchmark(std::string_view text, const std::string& name) {
    std::istringstream in{std::string(text)};
    return parse_lines(in, name, nullptr);
}

std::string serialize_canonical(const Benchmark& b) {
    std::string out;
    for (const auto& item : b.items) {
        out += canonical_dump(item.to_json());
        out += '\n';
    }
    return out;
}

std::string compute_content_hash(const std::vector<BenchmarkItem>& items) {
    std::string buf;
    for (const auto& item : items) {
        buf += canonical_dump(item.to_json());
        buf += '\n';
    }
    return sha256_hex(buf);
}

std::array<std::size_t, 4> answer_balance(const Benchmark& b) {
    std::array<std::size_t, 4> counts{0, 0, 0, 0};
    for (const auto& item : b.items) counts[static_cast<std::size_t>(item.answer_index)]++;
    return counts;
}

}  // namespace irbench
