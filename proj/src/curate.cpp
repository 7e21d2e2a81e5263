#include "irbench/curate.hpp"

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include <fmt/format.h>

#include "irbench/digest.hpp"
#include "irbench/errors.hpp"
#include "irbench/image_ops.hpp"
#include "irbench/log.hpp"

namespace irbench {

json CurateThresholds::to_json() const {
    return json{{"min_side", min_side},
                {"min_mean_luma", min_mean_luma},
                {"dice_threshold", dice_threshold},
                {"dedup_threshold", dedup_threshold},
                {"canny", {{"sigma", canny.sigma}, {"low", canny.low}, {"high", canny.high}}},
                {"linkage", linkage},
                {"clusters", clusters}};
}

CurateThresholds CurateThresholds::from_json(const json& j) {
    CurateThresholds t;
    t.min_side = j.value("min_side", 200);
    t.min_mean_luma = j.value("min_mean_luma", 20.0);
    t.dice_threshold = j.value("dice_threshold", 0.15);
    t.dedup_threshold = j.value("dedup_threshold", 0.95);
    if (j.contains("canny")) {
        t.canny.sigma = j["canny"].value("sigma", 1.4);
        t.canny.low = j["canny"].value("low", 50.0);
        t.canny.high = j["canny"].value("high", 150.0);
    }
    t.linkage = j.value("linkage", "average");
    t.clusters = j.value("clusters", 0u);
    return t;
}

std::string_view pair_status_code(PairStatus s) {
    switch (s) {
        case PairStatus::Candidate: return "candidate";
        case PairStatus::Rejected: return "rejected";
        case PairStatus::Accepted: return "accepted";
        case PairStatus::Sampled: return "sampled";
    }
    return "?";
}

std::optional<PairStatus> parse_pair_status(std::string_view code) {
    for (PairStatus s : {PairStatus::Candidate, PairStatus::Rejected, PairStatus::Accepted,
                         PairStatus::Sampled})
        if (pair_status_code(s) == code) return s;
    return std::nullopt;
}

void RgbtPair::reject(const std::string& stage, const std::string& reason) {
    if (status != PairStatus::Candidate)
        throw Error("pair " + pair_id + ": cannot reject from status " +
                    std::string(pair_status_code(status)));
    status = PairStatus::Rejected;
    reject_stage = stage;
    reject_reason = reason;
}

void RgbtPair::accept() {
    if (status != PairStatus::Candidate)
        throw Error("pair " + pair_id + ": cannot accept from status " +
                    std::string(pair_status_code(status)));
    status = PairStatus::Accepted;
}

void RgbtPair::mark_sampled() {
    if (status != PairStatus::Accepted)
        throw Error("pair " + pair_id + ": cannot sample from status " +
                    std::string(pair_status_code(status)));
    status = PairStatus::Sampled;
}

json RgbtPair::to_json() const {
    json j{{"pair_id", pair_id}, {"ir", ir},           {"rgb", rgb},
           {"source", source},   {"ir_width", ir_width}, {"ir_height", ir_height},
           {"rgb_width", rgb_width}, {"rgb_height", rgb_height},
           {"status", std::string(pair_status_code(status))}};
    if (status == PairStatus::Rejected) {
        j["stage"] = reject_stage;
        j["reason"] = reject_reason;
    }
    if (!metrics.empty()) j["metrics"] = metrics;
    return j;
}

RgbtPair RgbtPair::from_json(const json& j) {
    RgbtPair p;
    p.pair_id = j.at("pair_id").get<std::string>();
    p.ir = j.at("ir").get<std::string>();
    p.rgb = j.at("rgb").get<std::string>();
    p.source = j.value("source", "");
    p.ir_width = j.value("ir_width", 0);
    p.ir_height = j.value("ir_height", 0);
    p.rgb_width = j.value("rgb_width", 0);
    p.rgb_height = j.value("rgb_height", 0);
    auto s = parse_pair_status(j.value("status", "candidate"));
    if (!s) throw Error("unknown pair status in manifest");
    p.status = *s;
    p.reject_stage = j.value("stage", "");
    p.reject_reason = j.value("reason", "");
    if (j.contains("metrics"))
        for (const auto& [k, v] : j["metrics"].items()) p.metrics[k] = v.get<double>();
    return p;
}

std::vector<RgbtPair> load_pair_manifest(const std::filesystem::path& path) {
    std::vector<RgbtPair> pairs;
    for (const auto& rec : read_jsonl(path)) pairs.push_back(RgbtPair::from_json(rec));
    return pairs;
}

void save_pair_manifest(const std::vector<RgbtPair>& pairs, const std::filesystem::path& path) {
    std::string out;
    for (const auto& p : pairs) {
        out += canonical_dump(p.to_json());
        out += '\n';
    }
    write_file_atomic(path, out);
}

// --- edges & dice ---

EdgeMap edge_map_from_mask(int width, int height, std::vector<std::uint8_t> mask) {
    EdgeMap m;
    m.width = width;
    m.height = height;
    m.mask = std::move(mask);
    if (m.mask.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
        throw DimensionMismatch("edge mask size does not match dimensions");
    for (auto& v : m.mask) v = v ? 1 : 0;
    m.edge_count = static_cast<std::size_t>(
        std::count(m.mask.begin(), m.mask.end(), static_cast<std::uint8_t>(1)));
    return m;
}

EdgeMap compute_canny_edges(const std::filesystem::path& image, const CannyParams& params) {
    cv::Mat gray = cv::imread(image.string(), cv::IMREAD_GRAYSCALE);
    if (gray.empty()) throw DecodeFailure("cannot decode image: " + image.string());
    cv::Mat blurred;
    // Kernel size from sigma: covers +-3 sigma, forced odd.
    int ksize = std::max(3, (static_cast<int>(std::ceil(params.sigma * 3)) * 2) | 1);
    cv::GaussianBlur(gray, blurred, cv::Size(ksize, ksize), params.sigma);
    cv::Mat edges;
    cv::Canny(blurred, edges, params.low, params.high);
    std::vector<std::uint8_t> mask(edges.total());
    for (int y = 0; y < edges.rows; ++y)
        for (int x = 0; x < edges.cols; ++x)
            mask[static_cast<std::size_t>(y) * static_cast<std::size_t>(edges.cols) +
                 static_cast<std::size_t>(x)] = edges.at<std::uint8_t>(y, x) ? 1 : 0;
    return edge_map_from_mask(edges.cols, edges.rows, std::move(mask));
}

EdgeMap resample_nearest(const EdgeMap& src, int width, int height) {
    std::vector<std::uint8_t> mask(static_cast<std::size_t>(width) *
                                   static_cast<std::size_t>(height));
    for (int y = 0; y < height; ++y) {
        int sy = static_cast<int>(static_cast<std::int64_t>(y) * src.height / height);
        for (int x = 0; x < width; ++x) {
            int sx = static_cast<int>(static_cast<std::int64_t>(x) * src.width / width);
            mask[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                 static_cast<std::size_t>(x)] =
                src.mask[static_cast<std::size_t>(sy) * static_cast<std::size_t>(src.width) +
                         static_cast<std::size_t>(sx)];
        }
    }
    return edge_map_from_mask(width, height, std::move(mask));
}

double edge_dice(const EdgeMap& a, const EdgeMap& b) {
    const EdgeMap* bb = &b;
    EdgeMap resampled;
    if (a.width != b.width || a.height != b.height) {
        if (a.width <= 0 || a.height <= 0 || b.width <= 0 || b.height <= 0)
            throw DimensionMismatch("edge maps have invalid dimensions");
        resampled = resample_nearest(b, a.width, a.height);
        bb = &resampled;
    }
    if (a.mask.size() != bb->mask.size())
        throw DimensionMismatch("edge maps disagree in size after resampling");
    std::size_t inter = 0;
    for (std::size_t i = 0; i < a.mask.size(); ++i)
        if (a.mask[i] && bb->mask[i]) ++inter;
    std::size_t total = a.edge_count + bb->edge_count;
    if (total == 0) return 0.0;  // both empty: degenerate, defined as 0
    return 2.0 * static_cast<double>(inter) / static_cast<double>(total);
}

// --- stages ---

void filter_resolution(std::vector<RgbtPair>& pairs, int min_side,
                       const std::filesystem::path& root) {
    for (auto& p : pairs) {
        if (p.status != PairStatus::Candidate) continue;
        auto ir_info = probe_image(root / p.ir);
        auto rgb_info = probe_image(root / p.rgb);
        if (!ir_info || !rgb_info) {
            p.reject("resolution", "decode");
            continue;
        }
        p.ir_width = ir_info->width;
        p.ir_height = ir_info->height;
        p.rgb_width = rgb_info->width;
        p.rgb_height = rgb_info->height;
        int smallest = std::min({p.ir_width, p.ir_height, p.rgb_width, p.rgb_height});
        p.metrics["min_side"] = smallest;
        if (smallest < min_side)
            p.reject("resolution", fmt::format("min side {} below {}", smallest, min_side));
    }
}

void filter_brightness(std::vector<RgbtPair>& pairs, double min_mean_luma,
                       const std::filesystem::path& root) {
    for (auto& p : pairs) {
        if (p.status != PairStatus::Candidate) continue;
        double luma;
        try {
            // Measured on the rgb side: a dark rgb frame implies night
            // capture with weak cross-modal edges.
            luma = mean_luma(read_file_bytes(root / p.rgb));
        } catch (const std::exception&) {
            p.reject("brightness", "decode");
            continue;
        }
        p.metrics["mean_luma"] = luma;
        if (luma < min_mean_luma)
            p.reject("brightness", fmt::format("mean luma {:.2f} below {:.2f}", luma, min_mean_luma));
    }
}

void filter_edge_alignment(std::vector<RgbtPair>& pairs, const CannyParams& params,
                           double dice_threshold, const std::filesystem::path& root) {
    for (auto& p : pairs) {
        if (p.status != PairStatus::Candidate) continue;
        double dice;
        try {
            EdgeMap ir_edges = compute_canny_edges(root / p.ir, params);
            EdgeMap rgb_edges = compute_canny_edges(root / p.rgb, params);
            dice = edge_dice(ir_edges, rgb_edges);
        } catch (const std::exception& e) {
            p.reject("edges", e.what());
            continue;
        }
        p.metrics["dice"] = dice;
        if (dice < dice_threshold)
            p.reject("edges", fmt::format("dice {:.4f} below {:.4f}", dice, dice_threshold));
    }
}

QualityOutcome quality_judge(const RgbtPair& pair, ChatClient& vlm,
                             const std::string& rubric_prompt,
                             const std::filesystem::path& root) {
    MessagePayload payload;
    payload.task_id = "quality/" + pair.pair_id;
    payload.system_text = rubric_prompt;
    payload.user_text = "Assess the pairing quality of the two images.";
    payload.images = {ImageSlot{"ir", read_file_bytes(root / pair.ir)},
                      ImageSlot{"rgb", read_file_bytes(root / pair.rgb)}};
    ModelResponse resp = vlm.chat(payload);
    std::string norm = resp.raw_text;
    norm.erase(std::remove_if(norm.begin(), norm.end(),
                              [](unsigned char c) { return std::isspace(c) || c == '.'; }),
               norm.end());
    std::transform(norm.begin(), norm.end(), norm.begin(), ::toupper);
    QualityOutcome out;
    out.raw = resp.raw_text;
    if (norm == "PASS") {
        out.pass = true;
    } else if (norm == "FAIL") {
        out.pass = false;
    } else {
        log_warn("quality_judge: non-token reply for " + pair.pair_id + ", failing closed");
        out.pass = false;
    }
    return out;
}

void apply_quality_filter(std::vector<RgbtPair>& pairs, ChatClient& vlm,
                          const std::string& rubric_prompt, const std::filesystem::path& root) {
    for (auto& p : pairs) {
        if (p.status != PairStatus::Candidate) continue;
        QualityOutcome outcome;
        try {
            outcome = quality_judge(p, vlm, rubric_prompt, root);
        } catch (const std::exception& e) {
            // Retryable: the pair stays Candidate, never silently passed.
            log_warn("quality_judge: client error for " + p.pair_id + ": " + e.what());
            continue;
        }
        p.metrics["quality_pass"] = outcome.pass ? 1.0 : 0.0;
        if (!outcome.pass) p.reject("quality", "vlm pairing-quality fail");
    }
}

// --- embeddings ---

std::optional<std::size_t> EmbeddingSet::index_of(const std::string& id) const {
    for (std::size_t i = 0; i < ids.size(); ++i)
        if (ids[i] == id) return i;
    return std::nullopt;
}

EmbeddingSet load_embeddings(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw StorageError("cannot read embeddings: " + path.string());
    std::string header;
    if (!std::getline(in, header)) throw Error("embedding manifest is empty: " + path.string());
    json h = json::parse(header, nullptr, /*allow_exceptions=*/false);
    if (h.is_discarded() || !h.contains("dim"))
        throw Error("embedding manifest header must be json with a dim field");
    EmbeddingSet set;
    set.dim = h["dim"].get<std::size_t>();
    set.source = h.value("source", "");
    std::string line;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string id;
        ls >> id;
        std::vector<float> vec(set.dim);
        for (std::size_t i = 0; i < set.dim; ++i)
            if (!(ls >> vec[i]))
                throw Error(fmt::format("{}: line {}: expected {} components", path.string(),
                                        line_no, set.dim));
        double norm_sq = 0;
        for (float v : vec) norm_sq += static_cast<double>(v) * static_cast<double>(v);
        if (norm_sq <= 0)
            throw Error(fmt::format("{}: line {}: zero-norm vector", path.string(), line_no));
        set.ids.push_back(std::move(id));
        set.vectors.push_back(std::move(vec));
    }
    return set;
}

void save_embeddings(const EmbeddingSet& set, const std::filesystem::path& path) {
    std::string out = canonical_dump(json{{"dim", set.dim}, {"source", set.source}}) + "\n";
    for (std::size_t i = 0; i < set.ids.size(); ++i) {
        out += set.ids[i];
        for (float v : set.vectors[i]) out += fmt::format(" {}", v);
        out += '\n';
    }
    write_file_atomic(path, out);
}

double cosine_similarity(const std::vector<float>& a, const std::vector<float>& b) {
    if (a.size() != b.size()) throw DimensionMismatch("embedding dimensions differ");
    double dot = 0, na = 0, nb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += static_cast<double>(a[i]) * static_cast<double>(b[i]);
        na += static_cast<double>(a[i]) * static_cast<double>(a[i]);
        nb += static_cast<double>(b[i]) * static_cast<double>(b[i]);
    }
    if (na <= 0 || nb <= 0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

void dedup_against_holdout(std::vector<RgbtPair>& pairs, const EmbeddingSet& pair_embeddings,
                           const EmbeddingSet& holdout, double threshold) {
    if (pair_embeddings.dim != holdout.dim)
        throw DimensionMismatch(fmt::format("pair embeddings dim {} vs holdout dim {}",
                                            pair_embeddings.dim, holdout.dim));
    // Normalize the holdout once; max-similarity then reduces to dot products.
    std::vector<std::vector<float>> holdout_unit = holdout.vectors;
    for (auto& v : holdout_unit) {
        double n = 0;
        for (float x : v) n += static_cast<double>(x) * static_cast<double>(x);
        float inv = static_cast<float>(1.0 / std::sqrt(n));
        for (float& x : v) x *= inv;
    }
    for (auto& p : pairs) {
        if (p.status != PairStatus::Candidate) continue;
        auto idx = pair_embeddings.index_of(p.pair_id);
        if (!idx) {
            p.reject("dedup", "no embedding for pair");
            continue;
        }
        std::vector<float> q = pair_embeddings.vectors[*idx];
        double qn = 0;
        for (float x : q) qn += static_cast<double>(x) * static_cast<double>(x);
        float inv = static_cast<float>(1.0 / std::sqrt(qn));
        for (float& x : q) x *= inv;
        double max_sim = -1.0;
        for (const auto& h : holdout_unit) {
            double dot = 0;
            for (std::size_t i = 0; i < q.size(); ++i)
                dot += static_cast<double>(q[i]) * static_cast<double>(h[i]);
            max_sim = std::max(max_sim, dot);
        }
        p.metrics["max_holdout_cosine"] = max_sim;
        if (max_sim >= threshold)
            p.reject("dedup", fmt::format("cosine {:.4f} >= {:.4f} against holdout", max_sim,
                                          threshold));
    }
}

// --- clustering & sampling ---

std::optional<Linkage> parse_linkage(std::string_view name) {
    if (name == "average") return Linkage::Average;
    if (name == "single") return Linkage::Single;
    if (name == "complete") return Linkage::Complete;
    return std::nullopt;
}

std::vector<int> agglomerative_clusters(const std::vector<std::vector<float>>& vectors,
                                        std::size_t k, Linkage linkage) {
    std::size_t n = vectors.size();
    if (k == 0 || k > n) throw Error("cluster count must be in [1, n]");
    // Active cluster list with a full distance matrix, merged bottom-up
    // (Lance-Williams updates). Fine at desk scale.
    std::vector<std::vector<double>> dist(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            double d = 1.0 - cosine_similarity(vectors[i], vectors[j]);
            dist[i][j] = dist[j][i] = d;
        }

    std::vector<bool> active(n, true);
    std::vector<std::size_t> size(n, 1);
    std::vector<std::vector<std::size_t>> members(n);
    for (std::size_t i = 0; i < n; ++i) members[i] = {i};

    std::size_t clusters = n;
    while (clusters > k) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t bi = 0, bj = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (!active[i]) continue;
            for (std::size_t j = i + 1; j < n; ++j) {
                if (!active[j]) continue;
                if (dist[i][j] < best) {
                    best = dist[i][j];
                    bi = i;
                    bj = j;
                }
            }
        }
        // Merge bj into bi.
        for (std::size_t m = 0; m < n; ++m) {
            if (!active[m] || m == bi || m == bj) continue;
            double dim_ = dist[bi][m], djm = dist[bj][m];
            double merged;
            switch (linkage) {
                case Linkage::Average:
                    merged = (static_cast<double>(size[bi]) * dim_ +
                              static_cast<double>(size[bj]) * djm) /
                             static_cast<double>(size[bi] + size[bj]);
                    break;
                case Linkage::Single: merged = std::min(dim_, djm); break;
                case Linkage::Complete: merged = std::max(dim_, djm); break;
                default: merged = dim_;
            }
            dist[bi][m] = dist[m][bi] = merged;
        }
        size[bi] += size[bj];
        members[bi].insert(members[bi].end(), members[bj].begin(), members[bj].end());
        members[bj].clear();
        active[bj] = false;
        --clusters;
    }

    std::vector<int> labels(n, -1);
    int next_label = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!active[i]) continue;
        for (std::size_t m : members[i]) labels[m] = next_label;
        ++next_label;
    }
    return labels;
}

namespace {

// Platform-independent seeded shuffle (Fisher-Yates with rejection-sampled
// bounded draws): std::shuffle's output is implementation-defined.
class DetRng {
public:
    explicit DetRng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_below(std::uint64_t bound) {
        if (bound <= 1) return 0;
        std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
        std::uint64_t v;
        do {
            v = engine_();
        } while (v >= limit);
        return v % bound;
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i)
            std::swap(v[i - 1], v[next_below(i)]);
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace

std::vector<std::size_t> cluster_sample(const std::vector<std::vector<float>>& vectors,
                                        std::size_t target_n, std::size_t k, std::uint64_t seed,
                                        Linkage linkage) {
    if (target_n > vectors.size()) throw TargetTooLarge(target_n, vectors.size());
    if (target_n == 0) return {};
    if (k == 0) k = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(vectors.size()))));
    k = std::min(k, vectors.size());

    auto labels = agglomerative_clusters(vectors, k, linkage);
    std::vector<std::vector<std::size_t>> buckets(k);
    for (std::size_t i = 0; i < labels.size(); ++i)
        buckets[static_cast<std::size_t>(labels[i])].push_back(i);

    // Largest cluster first; ties broken by smallest member index so the
    // round-robin order is fully deterministic.
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (buckets[a].size() != buckets[b].size()) return buckets[a].size() > buckets[b].size();
        return buckets[a].front() < buckets[b].front();
    });

    DetRng rng(seed);
    for (std::size_t c : order) rng.shuffle(buckets[c]);

    std::vector<std::size_t> picked;
    picked.reserve(target_n);
    std::vector<std::size_t> cursor(k, 0);
    while (picked.size() < target_n) {
        bool progressed = false;
        for (std::size_t c : order) {
            if (picked.size() >= target_n) break;
            if (cursor[c] < buckets[c].size()) {
                picked.push_back(buckets[c][cursor[c]++]);
                progressed = true;
            }
        }
        if (!progressed) break;  // all clusters exhausted (cannot happen when target<=n)
    }
    std::sort(picked.begin(), picked.end());
    return picked;
}

void sample_accepted(std::vector<RgbtPair>& pairs, const EmbeddingSet& rgb_embeddings,
                     std::size_t target_n, std::size_t k, std::uint64_t seed, Linkage linkage) {
    std::vector<std::size_t> accepted_idx;
    std::vector<std::vector<float>> vecs;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        if (pairs[i].status != PairStatus::Accepted) continue;
        auto e = rgb_embeddings.index_of(pairs[i].pair_id);
        if (!e) throw Error("no rgb embedding for accepted pair " + pairs[i].pair_id);
        accepted_idx.push_back(i);
        vecs.push_back(rgb_embeddings.vectors[*e]);
    }
    if (target_n > accepted_idx.size()) throw TargetTooLarge(target_n, accepted_idx.size());
    auto picks = cluster_sample(vecs, target_n, k, seed, linkage);
    for (std::size_t p : picks) pairs[accepted_idx[p]].mark_sampled();
}

}  // namespace irbench
