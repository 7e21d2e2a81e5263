#include <random>

#include "doctest.h"

#include "irbench/curate.hpp"
#include "irbench/errors.hpp"
#include "testutil.hpp"

using namespace irbench;
using namespace irbench::test;

namespace {

EdgeMap mask_of(int w, int h, std::initializer_list<int> set_pixels) {
    std::vector<std::uint8_t> m(static_cast<std::size_t>(w) * h, 0);
    for (int p : set_pixels) m[static_cast<std::size_t>(p)] = 1;
    return edge_map_from_mask(w, h, std::move(m));
}

}  // namespace

TEST_CASE("edge_dice matches hand computations") {
    EdgeMap a = mask_of(10, 10, {1, 2, 3, 4});
    EdgeMap b = mask_of(10, 10, {2, 3, 4, 5, 6, 7});
    // |A|=4, |B|=6, overlap {2,3,4} = 3 -> 2*3/(4+6) = 0.6
    CHECK(edge_dice(a, b) == doctest::Approx(0.6));

    SUBCASE("identical maps give 1") {
        std::vector<std::uint8_t> m(100, 0);
        for (int i = 0; i < 100; i += 1) m[static_cast<std::size_t>(i)] = i % 2;
        EdgeMap x = edge_map_from_mask(10, 10, m);
        CHECK(x.edge_count == 50);
        CHECK(edge_dice(x, x) == doctest::Approx(1.0));
    }
    SUBCASE("disjoint maps give 0") {
        CHECK(edge_dice(mask_of(4, 4, {0, 1}), mask_of(4, 4, {10, 11})) == doctest::Approx(0.0));
    }
    SUBCASE("both empty is defined as 0") {
        CHECK(edge_dice(mask_of(4, 4, {}), mask_of(4, 4, {})) == doctest::Approx(0.0));
    }
}

TEST_CASE("edge_dice properties over random masks") {
    std::mt19937 rng(23);
    for (int round = 0; round < 200; ++round) {
        int w = 4 + static_cast<int>(rng() % 12);
        int h = 4 + static_cast<int>(rng() % 12);
        auto random_mask = [&] {
            std::vector<std::uint8_t> m(static_cast<std::size_t>(w) * h);
            for (auto& v : m) v = (rng() % 3) == 0;
            return edge_map_from_mask(w, h, std::move(m));
        };
        EdgeMap a = random_mask();
        EdgeMap b = random_mask();
        double dab = edge_dice(a, b);
        CHECK(dab == doctest::Approx(edge_dice(b, a)));
        CHECK(dab >= 0.0);
        CHECK(dab <= 1.0);
        if (a.edge_count > 0) CHECK(edge_dice(a, a) == doctest::Approx(1.0));
    }
}

TEST_CASE("edge maps of different sizes are resampled to the first map") {
    EdgeMap big = mask_of(8, 8, {0, 1, 8, 9});    // 2x2 block at origin
    EdgeMap small = mask_of(4, 4, {0});           // same block after 2x downscale
    CHECK(edge_dice(small, big) > 0.0);
    EdgeMap up = resample_nearest(small, 8, 8);
    CHECK(up.width == 8);
    CHECK(up.edge_count == 4);
}

TEST_CASE("compute_canny_edges produces a strictly binary map") {
    TempDir dir;
    write_file_bytes(dir / "img.png", make_test_png(64, 48, 5));
    EdgeMap e = compute_canny_edges(dir / "img.png", CannyParams{});
    CHECK(e.width == 64);
    CHECK(e.height == 48);
    std::size_t count = 0;
    for (auto v : e.mask) {
        CHECK((v == 0 || v == 1));
        count += v;
    }
    CHECK(count == e.edge_count);
    CHECK(e.edge_count > 0);  // the synthetic pattern has block borders
}

TEST_CASE("filter_resolution rejects below-threshold pairs at the boundary") {
    TempDir dir;
    auto add_pair = [&](const std::string& id, int iw, int ih, int rw, int rh) {
        write_file_bytes(dir / (id + "_ir.png"), make_test_png(iw, ih, 1));
        write_file_bytes(dir / (id + "_rgb.png"), make_test_png(rw, rh, 2));
        RgbtPair p;
        p.pair_id = id;
        p.ir = id + "_ir.png";
        p.rgb = id + "_rgb.png";
        return p;
    };
    std::vector<RgbtPair> pairs;
    pairs.push_back(add_pair("boundary_low", 199, 500, 300, 300));
    pairs.push_back(add_pair("boundary_ok", 200, 200, 200, 200));
    pairs.push_back(add_pair("rgb_small", 400, 400, 150, 400));
    RgbtPair broken;
    broken.pair_id = "no_file";
    broken.ir = "absent.png";
    broken.rgb = "absent.png";
    pairs.push_back(broken);

    filter_resolution(pairs, 200, dir.path());
    CHECK(pairs[0].status == PairStatus::Rejected);  // 199 < 200
    CHECK(pairs[0].reject_stage == "resolution");
    CHECK(pairs[1].status == PairStatus::Candidate);
    CHECK(pairs[1].ir_width == 200);
    CHECK(pairs[2].status == PairStatus::Rejected);
    CHECK(pairs[3].status == PairStatus::Rejected);
    CHECK(pairs[3].reject_reason == "decode");
}

TEST_CASE("filter_resolution partitions a mixed fixture like the hand list") {
    TempDir dir;
    std::vector<RgbtPair> pairs;
    std::vector<bool> expect_kept;
    std::mt19937 rng(3);
    for (int i = 0; i < 10; ++i) {
        int side = (i % 2 == 0) ? 64 + static_cast<int>(rng() % 64) : 16 + static_cast<int>(rng() % 16);
        std::string id = "p" + std::to_string(i);
        write_file_bytes(dir / (id + "_ir.png"), make_test_png(side, 64, i));
        write_file_bytes(dir / (id + "_rgb.png"), make_test_png(64, 64, i + 100));
        RgbtPair p;
        p.pair_id = id;
        p.ir = id + "_ir.png";
        p.rgb = id + "_rgb.png";
        pairs.push_back(p);
        expect_kept.push_back(side >= 48);
    }
    filter_resolution(pairs, 48, dir.path());
    std::size_t kept = 0, rejected = 0;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        CHECK((pairs[i].status == PairStatus::Candidate) == expect_kept[i]);
        (pairs[i].status == PairStatus::Candidate ? kept : rejected)++;
    }
    CHECK(kept + rejected == pairs.size());  // partition conserves the total
}

TEST_CASE("filter_brightness thresholds on rgb mean luma") {
    TempDir dir;
    write_file_bytes(dir / "ir.png", make_test_png(32, 32, 1));
    write_file_bytes(dir / "black.png", make_uniform_png(16, 16, 0));
    write_file_bytes(dir / "white.png", make_uniform_png(16, 16, 255));
    write_file_bytes(dir / "gray64.png", make_uniform_png(16, 16, 64));

    CHECK(mean_luma(read_file_bytes(dir / "black.png")) == doctest::Approx(0.0));
    CHECK(mean_luma(read_file_bytes(dir / "white.png")) == doctest::Approx(255.0));
    CHECK(mean_luma(read_file_bytes(dir / "gray64.png")) == doctest::Approx(64.0));

    auto pair_for = [&](const std::string& id, const std::string& rgb) {
        RgbtPair p;
        p.pair_id = id;
        p.ir = "ir.png";
        p.rgb = rgb;
        return p;
    };
    std::vector<RgbtPair> pairs{pair_for("black", "black.png"), pair_for("white", "white.png"),
                                pair_for("exact", "gray64.png")};

    SUBCASE("all-black rejected for any positive threshold, all-white kept") {
        filter_brightness(pairs, 20.0, dir.path());
        CHECK(pairs[0].status == PairStatus::Rejected);
        CHECK(pairs[0].reject_stage == "brightness");
        CHECK(pairs[1].status == PairStatus::Candidate);
        CHECK(pairs[2].status == PairStatus::Candidate);
    }
    SUBCASE("boundary: a mean exactly at the threshold is kept (reject is strict <)") {
        filter_brightness(pairs, 64.0, dir.path());
        CHECK(pairs[2].status == PairStatus::Candidate);
        std::vector<RgbtPair> fresh{pair_for("black", "black.png")};
        filter_brightness(fresh, 0.0, dir.path());
        CHECK(fresh[0].status == PairStatus::Candidate);  // luma 0 is not < 0
    }
    SUBCASE("boundary: threshold just above the mean rejects") {
        filter_brightness(pairs, 64.5, dir.path());
        CHECK(pairs[2].status == PairStatus::Rejected);
    }
}

TEST_CASE("pair status transitions are forward-only and serialized") {
    RgbtPair p;
    p.pair_id = "x";
    p.ir = "a";
    p.rgb = "b";
    p.accept();
    CHECK_THROWS(p.reject("late", "nope"));
    p.mark_sampled();
    CHECK(p.status == PairStatus::Sampled);

    TempDir dir;
    RgbtPair r;
    r.pair_id = "y";
    r.ir = "a";
    r.rgb = "b";
    r.reject("edges", "dice 0.01 below 0.15");
    r.metrics["dice"] = 0.01;
    save_pair_manifest({p, r}, dir / "pairs.jsonl");
    auto back = load_pair_manifest(dir / "pairs.jsonl");
    REQUIRE(back.size() == 2);
    CHECK(back[0].status == PairStatus::Sampled);
    CHECK(back[1].status == PairStatus::Rejected);
    CHECK(back[1].reject_stage == "edges");
    CHECK(back[1].metrics.at("dice") == doctest::Approx(0.01));
}

TEST_CASE("embedding manifests round-trip and validate") {
    TempDir dir;
    EmbeddingSet set;
    set.dim = 3;
    set.source = "ir";
    set.ids = {"a", "b"};
    set.vectors = {{1.0f, 0.0f, 0.0f}, {0.5f, 0.5f, 0.25f}};
    save_embeddings(set, dir / "emb.txt");
    EmbeddingSet back = load_embeddings(dir / "emb.txt");
    CHECK(back.dim == 3);
    CHECK(back.source == "ir");
    CHECK(back.ids == set.ids);
    CHECK(back.vectors[1][2] == doctest::Approx(0.25f));

    SUBCASE("zero-norm vectors are rejected") {
        std::ofstream out(dir / "bad.txt");
        out << "{\"dim\":2,\"source\":\"ir\"}\nz 0 0\n";
        out.close();
        CHECK_THROWS(load_embeddings(dir / "bad.txt"));
    }
    SUBCASE("wrong component count is rejected") {
        std::ofstream out(dir / "bad2.txt");
        out << "{\"dim\":3,\"source\":\"ir\"}\nz 1 2\n";
        out.close();
        CHECK_THROWS(load_embeddings(dir / "bad2.txt"));
    }
}

TEST_CASE("dedup against a holdout matches a brute-force cosine oracle") {
    std::mt19937 rng(7);
    auto random_vec = [&](std::size_t dim) {
        std::vector<float> v(dim);
        std::normal_distribution<float> g(0.0f, 1.0f);
        for (auto& x : v) x = g(rng);
        return v;
    };

    const std::size_t dim = 16;
    EmbeddingSet pair_embs;
    pair_embs.dim = dim;
    pair_embs.source = "ir";
    EmbeddingSet holdout;
    holdout.dim = dim;
    holdout.source = "ir";
    std::vector<RgbtPair> pairs;
    for (int i = 0; i < 50; ++i) {
        std::string id = "p" + std::to_string(i);
        pair_embs.ids.push_back(id);
        pair_embs.vectors.push_back(random_vec(dim));
        RgbtPair p;
        p.pair_id = id;
        p.ir = "x";
        p.rgb = "y";
        pairs.push_back(p);
    }
    for (int i = 0; i < 20; ++i) {
        holdout.ids.push_back("h" + std::to_string(i));
        holdout.vectors.push_back(random_vec(dim));
    }
    // plant an exact duplicate and a near-duplicate
    pair_embs.vectors[3] = holdout.vectors[5];
    pair_embs.vectors[11] = holdout.vectors[2];
    pair_embs.vectors[11][0] += 0.01f;

    const double threshold = 0.8;
    dedup_against_holdout(pairs, pair_embs, holdout, threshold);

    for (std::size_t i = 0; i < pairs.size(); ++i) {
        // oracle: definitional cosine over all holdout vectors
        double max_sim = -1.0;
        for (const auto& h : holdout.vectors)
            max_sim = std::max(max_sim, cosine_similarity(pair_embs.vectors[i], h));
        bool should_reject = max_sim >= threshold;
        INFO("pair ", i, " max_sim ", max_sim);
        CHECK((pairs[i].status == PairStatus::Rejected) == should_reject);
    }
    CHECK(pairs[3].status == PairStatus::Rejected);   // planted duplicate
    CHECK(pairs[11].status == PairStatus::Rejected);  // planted near-duplicate

    SUBCASE("orthogonal vector is kept") {
        std::vector<RgbtPair> single;
        RgbtPair p;
        p.pair_id = "only";
        p.ir = "x";
        p.rgb = "y";
        single.push_back(p);
        EmbeddingSet one;
        one.dim = 2;
        one.source = "ir";
        one.ids = {"only"};
        one.vectors = {{1.0f, 0.0f}};
        EmbeddingSet ho;
        ho.dim = 2;
        ho.source = "ir";
        ho.ids = {"h"};
        ho.vectors = {{0.0f, 1.0f}};
        dedup_against_holdout(single, one, ho, 0.95);
        CHECK(single[0].status == PairStatus::Candidate);
    }
    SUBCASE("dimension mismatch raises") {
        EmbeddingSet small;
        small.dim = 2;
        std::vector<RgbtPair> none;
        CHECK_THROWS_AS(dedup_against_holdout(none, pair_embs, small, 0.9), DimensionMismatch);
    }
}

TEST_CASE("agglomerative clustering separates two blobs") {
    std::mt19937 rng(31);
    std::normal_distribution<float> noise(0.0f, 0.05f);
    std::vector<std::vector<float>> vecs;
    for (int i = 0; i < 30; ++i) vecs.push_back({1.0f + noise(rng), noise(rng)});
    for (int i = 0; i < 30; ++i) vecs.push_back({noise(rng), 1.0f + noise(rng)});

    for (Linkage linkage : {Linkage::Average, Linkage::Single, Linkage::Complete}) {
        auto labels = agglomerative_clusters(vecs, 2, linkage);
        for (int i = 1; i < 30; ++i) CHECK(labels[static_cast<std::size_t>(i)] == labels[0]);
        for (int i = 31; i < 60; ++i) CHECK(labels[static_cast<std::size_t>(i)] == labels[30]);
        CHECK(labels[0] != labels[30]);
    }
}

TEST_CASE("cluster_sample balances across clusters deterministically") {
    std::mt19937 rng(41);
    std::normal_distribution<float> noise(0.0f, 0.05f);
    std::vector<std::vector<float>> vecs;
    for (int i = 0; i < 30; ++i) vecs.push_back({1.0f + noise(rng), noise(rng)});
    for (int i = 0; i < 30; ++i) vecs.push_back({noise(rng), 1.0f + noise(rng)});

    SUBCASE("two blobs, even target: half from each") {
        auto picks = cluster_sample(vecs, 4, 2, 99);
        REQUIRE(picks.size() == 4);
        std::size_t from_first = 0;
        for (auto p : picks)
            if (p < 30) ++from_first;
        CHECK(from_first == 2);
    }
    SUBCASE("same seed twice is identical; target == n is the identity") {
        auto a = cluster_sample(vecs, 10, 2, 7);
        auto b = cluster_sample(vecs, 10, 2, 7);
        CHECK(a == b);
        auto all = cluster_sample(vecs, vecs.size(), 2, 7);
        CHECK(all.size() == vecs.size());
        for (std::size_t i = 0; i < all.size(); ++i) CHECK(all[i] == i);
    }
    SUBCASE("per-cluster take differs by at most one until exhaustion") {
        // unbalanced clusters: 30 vs 5
        std::vector<std::vector<float>> uneven(vecs.begin(), vecs.begin() + 35);
        auto picks = cluster_sample(uneven, 9, 2, 3);
        std::size_t big = 0, small = 0;
        for (auto p : picks) (p < 30 ? big : small)++;
        // 9 picks round-robin over clusters of 30 and 5: 5 + 4
        CHECK(small + big == 9);
        CHECK((big == 5 || big == 4));
        CHECK(std::max(big, small) - std::min(big, small) <= 1);
    }
    SUBCASE("target larger than n raises") {
        CHECK_THROWS_AS(cluster_sample(vecs, vecs.size() + 1, 2, 1), TargetTooLarge);
    }
}
