#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "irbench/clients.hpp"
#include "irbench/jsonl.hpp"

namespace irbench {

struct CannyParams {
    double sigma = 1.4;    // Gaussian smoothing before gradient
    double low = 50.0;     // hysteresis thresholds on the 0..255 scale
    double high = 150.0;
};

struct CurateThresholds {
    int min_side = 200;
    double min_mean_luma = 20.0;
    double dice_threshold = 0.15;
    double dedup_threshold = 0.95;
    CannyParams canny;
    std::string linkage = "average";  // average | single | complete
    std::size_t clusters = 0;         // 0 = ceil(sqrt(n))

    json to_json() const;
    static CurateThresholds from_json(const json& j);
};

enum class PairStatus { Candidate, Rejected, Accepted, Sampled };
std::string_view pair_status_code(PairStatus s);
std::optional<PairStatus> parse_pair_status(std::string_view code);

/// One RGB-T candidate pair moving forward through the pipeline. Status
/// transitions are forward-only: Candidate -> Rejected | Accepted -> Sampled.
struct RgbtPair {
    std::string pair_id;
    std::string ir;   // paths relative to the curation root
    std::string rgb;
    std::string source;
    int ir_width = 0, ir_height = 0;
    int rgb_width = 0, rgb_height = 0;
    PairStatus status = PairStatus::Candidate;
    std::string reject_stage;
    std::string reject_reason;
    std::map<std::string, double> metrics;

    void reject(const std::string& stage, const std::string& reason);
    void accept();
    void mark_sampled();

    json to_json() const;
    static RgbtPair from_json(const json& j);
};

std::vector<RgbtPair> load_pair_manifest(const std::filesystem::path& path);
void save_pair_manifest(const std::vector<RgbtPair>& pairs, const std::filesystem::path& path);

/// Strictly binary edge mask; edge_count equals the number of set pixels.
struct EdgeMap {
    int width = 0, height = 0;
    std::vector<std::uint8_t> mask;  // 0 or 1
    std::size_t edge_count = 0;
};

EdgeMap compute_canny_edges(const std::filesystem::path& image, const CannyParams& params);
EdgeMap edge_map_from_mask(int width, int height, std::vector<std::uint8_t> mask);
EdgeMap resample_nearest(const EdgeMap& src, int width, int height);

/// Dice overlap 2|A&B| / (|A|+|B|); 0 when both maps are empty. The second
/// map is resampled (nearest-neighbour) to the first map's size when needed.
double edge_dice(const EdgeMap& a, const EdgeMap& b);

// --- pipeline stages (each only moves Candidate pairs forward) ---

void filter_resolution(std::vector<RgbtPair>& pairs, int min_side,
                       const std::filesystem::path& root);
void filter_brightness(std::vector<RgbtPair>& pairs, double min_mean_luma,
                       const std::filesystem::path& root);
void filter_edge_alignment(std::vector<RgbtPair>& pairs, const CannyParams& params,
                           double dice_threshold, const std::filesystem::path& root);

struct QualityOutcome {
    bool pass = false;
    std::string raw;
};

/// Dual-image pairing-quality check via a VLM endpoint; the rubric constrains
/// the reply to PASS/FAIL. Non-token replies fail closed with a warning;
/// client errors leave the pair Candidate (retryable), never silently passed.
QualityOutcome quality_judge(const RgbtPair& pair, ChatClient& vlm,
                             const std::string& rubric_prompt,
                             const std::filesystem::path& root);
void apply_quality_filter(std::vector<RgbtPair>& pairs, ChatClient& vlm,
                          const std::string& rubric_prompt, const std::filesystem::path& root);

// --- embeddings ---

/// Fixed-dimension vectors keyed by pair or holdout id. External inputs: the
/// pipeline stays model-agnostic and testable with synthetic vectors.
struct EmbeddingSet {
    std::size_t dim = 0;
    std::string source;  // "ir" | "rgb"
    std::vector<std::string> ids;
    std::vector<std::vector<float>> vectors;

    std::optional<std::size_t> index_of(const std::string& id) const;
};

/// Text manifest: a json header line {"dim":D,"source":...} followed by one
/// `id v1 .. vD` line per record. Vectors must be non-zero.
EmbeddingSet load_embeddings(const std::filesystem::path& path);
void save_embeddings(const EmbeddingSet& set, const std::filesystem::path& path);

double cosine_similarity(const std::vector<float>& a, const std::vector<float>& b);

/// Rejects pairs whose ir-side embedding has max cosine similarity >=
/// threshold against any holdout vector (leakage against the benchmark set).
void dedup_against_holdout(std::vector<RgbtPair>& pairs, const EmbeddingSet& pair_embeddings,
                           const EmbeddingSet& holdout, double threshold);

// --- clustering & sampling ---

enum class Linkage { Average, Single, Complete };
std::optional<Linkage> parse_linkage(std::string_view name);

/// Agglomerative clustering on cosine distance, cut at k clusters. Returns a
/// label in [0,k) per input vector, labels ordered by first occurrence.
std::vector<int> agglomerative_clusters(const std::vector<std::vector<float>>& vectors,
                                        std::size_t k, Linkage linkage);

/// Balanced sampling: seeded shuffle within each cluster, then round-robin
/// across clusters (largest first) until target_n picks. Per-cluster takes
/// differ by at most one until a cluster is exhausted. Deterministic for a
/// given seed on any platform.
std::vector<std::size_t> cluster_sample(const std::vector<std::vector<float>>& vectors,
                                        std::size_t target_n, std::size_t k, std::uint64_t seed,
                                        Linkage linkage = Linkage::Average);

/// Convenience for the pipeline: clusters the rgb embeddings of Accepted
/// pairs and marks target_n of them Sampled.
void sample_accepted(std::vector<RgbtPair>& pairs, const EmbeddingSet& rgb_embeddings,
                     std::size_t target_n, std::size_t k, std::uint64_t seed, Linkage linkage);

}  // namespace irbench
