#include "doctest.h"

#include "irbench/benchmark.hpp"
#include "irbench/errors.hpp"
#include "testutil.hpp"

using namespace irbench;
using namespace irbench::test;

TEST_CASE("dimension categories follow the task grouping") {
    CHECK(dimension_category(Dimension::SU) == TaskCategory::CoarsePerception);
    CHECK(dimension_category(Dimension::IT) == TaskCategory::CoarsePerception);
    CHECK(dimension_category(Dimension::VC) == TaskCategory::CoarsePerception);
    CHECK(dimension_category(Dimension::TL) == TaskCategory::FinePerception);
    CHECK(dimension_category(Dimension::SRU) == TaskCategory::FinePerception);
    CHECK(dimension_category(Dimension::OC) == TaskCategory::FinePerception);
    CHECK(dimension_category(Dimension::TFU) == TaskCategory::FinePerception);
    CHECK(dimension_category(Dimension::AR) == TaskCategory::FinePerception);
    CHECK(dimension_category(Dimension::TFR) == TaskCategory::Reasoning);
    CHECK(dimension_category(Dimension::CR) == TaskCategory::Reasoning);
    for (Dimension d : kAllDimensions) CHECK(parse_dimension(dimension_code(d)) == d);
    CHECK(!parse_dimension("XX").has_value());
}

TEST_CASE("load_benchmark accepts a valid fixture and hashes deterministically") {
    TempDir dir;
    auto path = write_fixture_benchmark(dir.path(), 3);
    LoadOptions opts{dir.path(), true};
    Benchmark a = load_benchmark(path, opts);
    Benchmark b = load_benchmark(path, opts);
    CHECK(a.items.size() == 3);
    CHECK(a.meta.content_hash == b.meta.content_hash);
    CHECK(a.meta.content_hash.size() == 64);
    // order preserved
    CHECK(a.items[0].id == "q0");
    CHECK(a.items[2].id == "q2");
}

TEST_CASE("load_benchmark rejects malformed records with line numbers") {
    TempDir dir;
    write_file_bytes(dir / "img.png", make_test_png(16, 16, 1));
    auto ok = make_item("a").to_json();

    SUBCASE("three options") {
        auto bad = ok;
        bad["options"] = json::array({"x", "y", "z"});
        std::ofstream(dir / "b.jsonl") << ok.dump() << "\n" << bad.dump() << "\n";
        try {
            load_benchmark(dir / "b.jsonl", {dir.path(), false});
            FAIL("expected BadOptionCount");
        } catch (const BadOptionCount& e) {
            CHECK(e.line == 2);
        }
    }
    SUBCASE("empty zh question") {
        auto bad = make_item("b").to_json();
        bad["question"]["zh"] = "";
        std::ofstream(dir / "b.jsonl") << bad.dump() << "\n";
        CHECK_THROWS_AS(load_benchmark(dir / "b.jsonl", {dir.path(), false}), MalformedRecord);
    }
    SUBCASE("duplicate ids") {
        std::ofstream(dir / "b.jsonl") << ok.dump() << "\n" << ok.dump() << "\n";
        CHECK_THROWS_AS(load_benchmark(dir / "b.jsonl", {dir.path(), false}), DuplicateId);
    }
    SUBCASE("missing image") {
        auto bad = make_item("c", 0, Dimension::SU, "nope.png").to_json();
        std::ofstream(dir / "b.jsonl") << bad.dump() << "\n";
        CHECK_THROWS_AS(load_benchmark(dir / "b.jsonl", {dir.path(), true}), MissingImage);
    }
    SUBCASE("duplicate option text") {
        auto bad = ok;
        bad["options"] = json::array({"x", "x", "y", "z"});
        std::ofstream(dir / "b.jsonl") << bad.dump() << "\n";
        CHECK_THROWS_AS(load_benchmark(dir / "b.jsonl", {dir.path(), false}), MalformedRecord);
    }
    SUBCASE("not json") {
        std::ofstream(dir / "b.jsonl") << "{truncated\n";
        CHECK_THROWS_AS(load_benchmark(dir / "b.jsonl", {dir.path(), false}), MalformedRecord);
    }
}

TEST_CASE("canonical serialization round-trips and ignores source key order") {
    TempDir dir;
    auto path = write_fixture_benchmark(dir.path(), 4);
    Benchmark b = load_benchmark(path, {dir.path(), false});
    std::string canon = serialize_canonical(b);
    // the fixture writer already emits canonical lines
    CHECK(canon == read_text_file(path));

    // same record with scrambled key order parses to the same canonical bytes
    json j = b.items[0].to_json();
    std::string scrambled = "{\"question\":" + j["question"].dump() + ",\"answer\":" +
                            j["answer"].dump() + ",\"options\":" + j["options"].dump() +
                            ",\"image\":" + j["image"].dump() + ",\"dimension\":" +
                            j["dimension"].dump() + ",\"id\":" + j["id"].dump() + "}";
    Benchmark one = parse_benchmark(scrambled + "\n");
    CHECK(serialize_canonical(one) == canonical_dump(j) + "\n");
    CHECK(one.meta.content_hash == compute_content_hash({b.items[0]}));
}

TEST_CASE("content hash changes iff any item field changes") {
    BenchmarkItem base = make_item("m", 1, Dimension::OC);
    std::string h0 = compute_content_hash({base});
    CHECK(compute_content_hash({base}) == h0);

    auto mutated_hash = [&](auto mutate) {
        BenchmarkItem copy = base;
        mutate(copy);
        return compute_content_hash({copy});
    };
    CHECK(mutated_hash([](BenchmarkItem& i) { i.id = "m2"; }) != h0);
    CHECK(mutated_hash([](BenchmarkItem& i) { i.image = "other.png"; }) != h0);
    CHECK(mutated_hash([](BenchmarkItem& i) { i.dimension = Dimension::CR; }) != h0);
    CHECK(mutated_hash([](BenchmarkItem& i) { i.question["en"] += "?"; }) != h0);
    CHECK(mutated_hash([](BenchmarkItem& i) { i.question["zh"] += "呢"; }) != h0);
    for (int k = 0; k < 4; ++k)
        CHECK(mutated_hash([k](BenchmarkItem& i) { i.options[k] += "x"; }) != h0);
    CHECK(mutated_hash([](BenchmarkItem& i) { i.answer_index = 2; }) != h0);
}

TEST_CASE("answer_balance counts positions") {
    Benchmark b;
    SUBCASE("empty") { CHECK(answer_balance(b) == std::array<std::size_t, 4>{0, 0, 0, 0}); }
    SUBCASE("one each") {
        for (int i = 0; i < 4; ++i) b.items.push_back(make_item("q" + std::to_string(i), i));
        CHECK(answer_balance(b) == std::array<std::size_t, 4>{1, 1, 1, 1});
    }
    SUBCASE("eight items match a hand count") {
        int answers[] = {0, 0, 3, 1, 3, 3, 2, 0};  // hand count: 3,1,1,3
        for (int i = 0; i < 8; ++i)
            b.items.push_back(make_item("q" + std::to_string(i), answers[i]));
        CHECK(answer_balance(b) == std::array<std::size_t, 4>{3, 1, 1, 3});
    }
}
