#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "promptpress/errors.hpp"
#include "promptpress/records.hpp"

#include "support/temp_dir.hpp"
#include "support/test_rng.hpp"

namespace pp = promptpress;

namespace {

struct TempDir : testsupport::TempDir {
    TempDir() : testsupport::TempDir("records") {}
};

}  // namespace

TEST_CASE("pair records round-trip") {
    TempDir dir;
    pp::PairRecord rec;
    rec.pair = {"doc-1", "The original text.", "original text.", {0, 18}};
    rec.extra["note"] = "keep me";

    pp::write_records(std::vector<pp::PairRecord>{rec}, dir.file("pairs.jsonl"));
    const auto back = pp::read_records<pp::PairRecord>(dir.file("pairs.jsonl"));
    REQUIRE(back.size() == 1);
    CHECK(back[0].pair.doc_id == "doc-1");
    CHECK(back[0].pair.original == "The original text.");
    CHECK(back[0].pair.compressed == "original text.");
    CHECK(back[0].pair.chunk_boundaries == std::vector<std::size_t>{0, 18});
    CHECK(back[0].extra["note"] == "keep me");
}

TEST_CASE("unknown fields survive a read-write cycle") {
    TempDir dir;
    {
        std::ofstream out(dir.file("in.jsonl"));
        out << R"({"doc_id":"d","text":"hello","provenance":{"batch":7},"lang":"en"})" << "\n";
    }
    auto docs = pp::read_records<pp::DocRecord>(dir.file("in.jsonl"));
    REQUIRE(docs.size() == 1);
    docs[0].text = "changed";
    pp::write_records(docs, dir.file("out.jsonl"));

    const auto back = pp::read_records<pp::DocRecord>(dir.file("out.jsonl"));
    REQUIRE(back.size() == 1);
    CHECK(back[0].text == "changed");
    CHECK(back[0].extra["provenance"]["batch"] == 7);
    CHECK(back[0].extra["lang"] == "en");
}

TEST_CASE("annotation labels accept both 0/1 and booleans") {
    TempDir dir;
    {
        std::ofstream out(dir.file("ann.jsonl"));
        out << R"({"doc_id":"a","words":["x","y"],"labels":[0,1]})" << "\n";
        out << R"({"doc_id":"b","words":["x","y"],"labels":[true,false]})" << "\n";
    }
    const auto records = pp::read_records<pp::AnnotationRecord>(dir.file("ann.jsonl"));
    REQUIRE(records.size() == 2);
    CHECK(records[0].labels == std::vector<bool>{false, true});
    CHECK(records[1].labels == std::vector<bool>{true, false});
}

TEST_CASE("label and word counts must agree") {
    TempDir dir;
    {
        std::ofstream out(dir.file("ann.jsonl"));
        out << R"({"doc_id":"a","words":["x","y"],"labels":[1]})" << "\n";
    }
    CHECK_THROWS_AS(pp::read_records<pp::AnnotationRecord>(dir.file("ann.jsonl")),
                    pp::SchemaError);
}

TEST_CASE("malformed line errors carry the line number") {
    TempDir dir;
    {
        std::ofstream out(dir.file("docs.jsonl"));
        out << R"({"doc_id":"a","text":"fine"})" << "\n";
        out << R"({"doc_id":"b","text":)" << "\n";  // truncated mid-object
        out << R"({"doc_id":"c","text":"fine"})" << "\n";
    }
    try {
        pp::read_records<pp::DocRecord>(dir.file("docs.jsonl"));
        FAIL("expected SchemaError");
    } catch (const pp::SchemaError& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
}

TEST_CASE("blank lines are skipped") {
    TempDir dir;
    {
        std::ofstream out(dir.file("docs.jsonl"));
        out << R"({"doc_id":"a","text":"one"})" << "\n";
        out << "\n   \n";
        out << R"({"doc_id":"b","text":"two"})" << "\n";
    }
    CHECK(pp::read_records<pp::DocRecord>(dir.file("docs.jsonl")).size() == 2);
}

TEST_CASE("missing input file raises FileError") {
    CHECK_THROWS_AS(pp::read_records<pp::DocRecord>("/nonexistent/nowhere.jsonl"),
                    pp::FileError);
}

TEST_CASE("non-finite achieved ratio becomes null and comes back infinite") {
    TempDir dir;
    pp::ResultRecord rec;
    rec.doc_id = "empty";
    rec.compressed = "";
    rec.achieved_ratio = std::numeric_limits<double>::infinity();
    pp::write_records(std::vector<pp::ResultRecord>{rec}, dir.file("res.jsonl"));

    {
        std::ifstream in(dir.file("res.jsonl"));
        std::string line;
        std::getline(in, line);
        CHECK(line.find("\"achieved_ratio\":null") != std::string::npos);
    }
    const auto back = pp::read_records<pp::ResultRecord>(dir.file("res.jsonl"));
    REQUIRE(back.size() == 1);
    CHECK(std::isinf(back[0].achieved_ratio));
}

TEST_CASE("score probabilities keep full precision through serialization") {
    TempDir dir;
    pp::ScoreRecord rec;
    rec.doc_id = "p";
    rec.probs = {0.123456789012345, 1.0 / 3.0, 0.9999999999999999};
    pp::write_records(std::vector<pp::ScoreRecord>{rec}, dir.file("scores.jsonl"));
    const auto back = pp::read_records<pp::ScoreRecord>(dir.file("scores.jsonl"));
    REQUIRE(back.size() == 1);
    REQUIRE(back[0].probs.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(back[0].probs[i] == rec.probs[i]);  // bit-exact round trip
    }
}

TEST_CASE("subword maps round-trip when present and stay absent otherwise") {
    TempDir dir;
    pp::ScoreRecord with_map;
    with_map.doc_id = "m";
    with_map.probs = {0.5, 0.75, 0.25};
    with_map.subword_map = std::vector<std::vector<std::size_t>>{{0}, {1, 2}};
    pp::ScoreRecord without_map;
    without_map.doc_id = "n";
    without_map.probs = {0.5};

    pp::write_records(std::vector<pp::ScoreRecord>{with_map, without_map},
                      dir.file("scores.jsonl"));
    const auto back = pp::read_records<pp::ScoreRecord>(dir.file("scores.jsonl"));
    REQUIRE(back.size() == 2);
    REQUIRE(back[0].subword_map.has_value());
    CHECK(*back[0].subword_map == *with_map.subword_map);
    CHECK_FALSE(back[1].subword_map.has_value());
}

TEST_CASE("record io is a bijection on random quality records") {
    TempDir dir;
    testsupport::Rng rng(99);
    std::vector<pp::QualityRecord> records;
    for (int i = 0; i < 50; ++i) {
        pp::QualityRecord q;
        q.doc_id = "doc-" + std::to_string(i);
        q.vr = rng.unit();
        q.mr = rng.unit();
        q.hr = rng.unit() * 1.5;
        q.ag = q.hr - q.mr;
        q.kept = rng.chance(0.8);
        records.push_back(std::move(q));
    }
    pp::write_records(records, dir.file("q.jsonl"));
    const auto back = pp::read_records<pp::QualityRecord>(dir.file("q.jsonl"));
    REQUIRE(back.size() == records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        CHECK(back[i].doc_id == records[i].doc_id);
        CHECK(back[i].vr == records[i].vr);
        CHECK(back[i].mr == records[i].mr);
        CHECK(back[i].hr == records[i].hr);
        CHECK(back[i].ag == records[i].ag);
        CHECK(back[i].kept == records[i].kept);
    }

    // writing the re-read records again produces identical bytes
    pp::write_records(back, dir.file("q2.jsonl"));
    std::ifstream a(dir.file("q.jsonl"), std::ios::binary);
    std::ifstream b(dir.file("q2.jsonl"), std::ios::binary);
    const std::string bytes_a((std::istreambuf_iterator<char>(a)),
                              std::istreambuf_iterator<char>());
    const std::string bytes_b((std::istreambuf_iterator<char>(b)),
                              std::istreambuf_iterator<char>());
    CHECK(bytes_a == bytes_b);
}
