#include <doctest.h>

#include <sstream>

#include "memetrace/errors.hpp"
#include "memetrace/posts.hpp"

using namespace memetrace;

namespace {

std::string line(const std::string& id, const std::string& community, std::int64_t ts, const std::string& hash) {
    return R"({"id":")" + id + R"(","community":")" + community + R"(","timestamp":)" + std::to_string(ts) +
           R"(,"phash":")" + hash + "\"}\n";
}

} // namespace

TEST_CASE("duplicate (community, id) keeps the first") {
    std::istringstream in(line("1", "pol", 10, "0000000000000001") + line("1", "pol", 20, "0000000000000002"));
    const auto store = ingest_posts(in);
    CHECK(store.size() == 1);
    CHECK(store.duplicates_dropped() == 1);
    CHECK(store.posts()[0].timestamp == 10);
}

TEST_CASE("same id on another community is a different post") {
    std::istringstream in(line("1", "pol", 10, "0000000000000001") + line("1", "gab", 20, "0000000000000001"));
    const auto store = ingest_posts(in);
    CHECK(store.size() == 2);
    REQUIRE(store.find("gab", "1"));
    CHECK(store.find("gab", "1")->timestamp == 20);
    CHECK(store.find("reddit", "1") == nullptr);
}

TEST_CASE("bad hash is a line error in strict mode") {
    std::istringstream in(line("1", "pol", 10, "0000000000000001") + line("2", "pol", 10, "xyz"));
    try {
        ingest_posts(in);
        FAIL("expected a line error");
    } catch (const LineError& e) {
        CHECK(e.line() == 2);
        CHECK(e.reason() == "invalid phash hex");
    }
}

TEST_CASE("lenient mode skips and counts") {
    std::istringstream in(line("1", "pol", 10, "0000000000000001") + "not json\n" + line("2", "pol", 10, "xyz") +
                          R"({"id":"3","community":"pol"})" + "\n" + line("4", "pol", 5, "00000000000000ff"));
    IngestOptions opts;
    opts.strict = false;
    const auto store = ingest_posts(in, opts);
    CHECK(store.size() == 2);
    REQUIRE(store.skipped().size() == 3);
    CHECK(store.skipped()[0].line == 2);
    CHECK(store.skipped()[1].reason == "invalid phash hex");
}

TEST_CASE("posts and unique hashes are counted separately") {
    std::string text;
    const char* hashes[] = {"00000000000000aa", "00000000000000bb", "00000000000000aa", "00000000000000cc",
                            "00000000000000bb"};
    for (int i = 0; i < 5; ++i) text += line(std::to_string(i), i < 3 ? "pol" : "gab", i, hashes[i]);
    std::istringstream in(text);
    const auto store = ingest_posts(in);
    CHECK(store.size() == 5);
    CHECK(store.unique_hashes().size() == 3);
    CHECK(store.unique_hashes({"gab"}).size() == 2);
    CHECK(store.community_counts().at("pol") == 3);
}

TEST_CASE("study window") {
    std::istringstream in(line("1", "pol", 10, "0000000000000001") + line("2", "pol", 100, "0000000000000001"));
    IngestOptions opts;
    opts.strict = false;
    opts.window_end = 50;
    const auto store = ingest_posts(in, opts);
    CHECK(store.size() == 1);
    CHECK(store.skipped().size() == 1);
}

TEST_CASE("optional fields and roundtrip") {
    std::istringstream in(
        R"({"id":7,"community":"reddit","timestamp":1470000000,"phash":"ABCDEF0123456789","score":-3,"subcommunity":"r/x"})"
        "\n");
    const auto store = ingest_posts(in);
    REQUIRE(store.size() == 1);
    const auto& p = store.posts()[0];
    CHECK(p.id == "7");
    CHECK(p.score == -3);
    CHECK(p.subcommunity == "r/x");
    std::ostringstream out;
    write_posts(out, store.posts());
    std::istringstream again(out.str());
    const auto store2 = ingest_posts(again);
    REQUIRE(store2.size() == 1);
    CHECK(store2.posts()[0].hash == p.hash);
    CHECK(store2.posts()[0].score == p.score);
    CHECK(store2.posts()[0].subcommunity == p.subcommunity);
}
