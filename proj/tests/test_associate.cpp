#include <doctest.h>

#include <sstream>

#include "memetrace/associate.hpp"
#include "memetrace/errors.hpp"
#include "memetrace/ks.hpp"

using namespace memetrace;

namespace {

constexpr std::int64_t kDay = 86400;
constexpr std::int64_t kStart = 1467331200;  // 2016-07-01

Post post(std::string id, std::string community, std::int64_t ts, std::uint64_t hash,
          std::optional<std::int64_t> score = {}, std::optional<std::string> sub = {}) {
    Post p;
    p.id = std::move(id);
    p.community = std::move(community);
    p.timestamp = ts;
    p.hash = PHash64{hash};
    p.score = score;
    p.subcommunity = std::move(sub);
    return p;
}

MemeEntry entry(std::string id, std::string name, Category cat, std::set<std::string> tags = {}) {
    MemeEntry e;
    e.entry_id = std::move(id);
    e.name = std::move(name);
    e.category = cat;
    e.tags = std::move(tags);
    return e;
}

ClusterAnnotation ann(int cid, std::string entry_id) {
    ClusterAnnotation a;
    a.cluster_id = cid;
    EntryMatch m;
    m.entry_id = entry_id;
    m.matched_gallery_count = 1;
    m.gallery_size = 1;
    a.matches.push_back(m);
    a.representative = entry_id;
    return a;
}

Assignment assign(std::string id, std::string community, int cid) { return {std::move(id), std::move(community), cid, 0}; }

// three clusters: 0 -> Pepe (racist), 1 -> Smug (political), 2 -> Trump (person, political)
struct Fixture {
    Corpus corpus{entry("e1", "Pepe", Category::Meme, {"racism"}), entry("e2", "Smug", Category::Meme, {"politics"}),
                  entry("e3", "Trump", Category::Person, {"trump"})};
    std::vector<ClusterAnnotation> anns{ann(0, "e1"), ann(1, "e2"), ann(2, "e3")};
    AnnotationIndex index{anns, corpus};
};

} // namespace

TEST_CASE("nearest medoid") {
    PostStore store;
    store.add(post("exact", "pol", 0, 0xf0f0f0f000000000ULL));
    store.add(post("far", "pol", 0, 0x1ff00000ULL));  // 9 bits from everything below
    store.add(post("tie", "pol", 0, 0x1f));            // 5 from cluster 7 and from cluster 3
    const std::vector<std::pair<int, PHash64>> medoids{
        {7, PHash64{0x3ff}}, {3, PHash64{0x0}}, {9, PHash64{0xf0f0f0f000000000ULL}}};
    const auto a = associate_posts(store, medoids, 8);
    REQUIRE(a.size() == 2);
    CHECK(a[0].post_id == "exact");
    CHECK(a[0].cluster_id == 9);
    CHECK(a[0].distance == 0);
    CHECK(a[1].post_id == "tie");
    CHECK(a[1].cluster_id == 3);
    CHECK(a[1].distance == 5);
}

TEST_CASE("assignments roundtrip") {
    const std::vector<Assignment> a{{"1", "pol", 3, 2}, {"x,y", "gab", 0, 0}};
    std::stringstream buf;
    write_assignments(buf, a);
    CHECK(read_assignments(buf) == a);
}

TEST_CASE("popularity") {
    Fixture f;
    SUBCASE("one meme") {
        std::vector<Assignment> a;
        for (int i = 0; i < 10; ++i) a.push_back(assign(std::to_string(i), "pol", 0));
        const auto t = popularity_report(a, f.index, GroupBy::Entry);
        REQUIRE(t.size() == 1);
        CHECK(t[0].key == "Pepe");
        CHECK(t[0].pct == 100.0);
    }
    SUBCASE("empty") { CHECK(popularity_report({}, f.index, GroupBy::Entry).empty()); }
    SUBCASE("5/3/2 mix") {
        std::vector<Assignment> a;
        for (int i = 0; i < 10; ++i) a.push_back(assign(std::to_string(i), "pol", i < 5 ? 0 : i < 8 ? 1 : 2));
        const auto t = popularity_report(a, f.index, GroupBy::Entry);
        REQUIRE(t.size() == 3);
        CHECK(t[0].key == "Pepe");
        CHECK(t[0].pct == doctest::Approx(50.0));
        CHECK(t[1].pct == doctest::Approx(30.0));
        CHECK(t[2].pct == doctest::Approx(20.0));
        const auto cat = popularity_report(a, f.index, GroupBy::Category);
        REQUIRE(cat.size() == 2);
        CHECK(cat[0].key == "Meme");
        CHECK(cat[0].count == 8);
        const auto people = popularity_report(a, f.index, GroupBy::PersonEntry);
        REQUIRE(people.size() == 1);
        CHECK(people[0].key == "Trump");
        CHECK(people[0].pct == doctest::Approx(20.0));
        const auto tags = popularity_report(a, f.index, GroupBy::TagGroup);
        CHECK(tags.size() == 2);
        CHECK(popularity_report(a, f.index, GroupBy::Entry, 1).size() == 1);
    }
    SUBCASE("unannotated clusters are ignored") {
        const std::vector<Assignment> a{assign("1", "pol", 0), assign("2", "pol", 42)};
        const auto t = popularity_report(a, f.index, GroupBy::Entry);
        REQUIRE(t.size() == 1);
        CHECK(t[0].pct == 100.0);
    }
}

TEST_CASE("subcommunities") {
    Fixture f;
    PostStore store;
    std::vector<Assignment> a;
    for (int i = 0; i < 10; ++i) {
        store.add(post(std::to_string(i), "reddit", kStart, 0, 1, i < 6 ? "r/a" : "r/b"));
        a.push_back(assign(std::to_string(i), "reddit", 0));
    }
    const auto t = subcommunity_report(store, a, f.index, TagFilter::All);
    REQUIRE(t.size() == 2);
    CHECK(t[0].key == "r/a");
    CHECK(t[0].pct == doctest::Approx(60.0));
    CHECK(t[1].pct == doctest::Approx(40.0));
    CHECK(subcommunity_report(store, a, f.index, TagFilter::Political).empty());
    CHECK(subcommunity_report(store, {}, f.index, TagFilter::All).empty());
    PostStore one;
    one.add(post("1", "reddit", kStart, 0, 1, "r/x"));
    const auto single = subcommunity_report(one, std::vector<Assignment>{assign("1", "reddit", 1)}, f.index, TagFilter::All);
    REQUIRE(single.size() == 1);
    CHECK(single[0].pct == 100.0);
}

TEST_CASE("temporal") {
    Fixture f;
    SUBCASE("one day") {
        PostStore store;
        store.add(post("1", "pol", kStart + 10, 0));
        store.add(post("2", "pol", kStart + 500, 0));
        const auto s = temporal_report(store, std::vector<Assignment>{assign("1", "pol", 0), assign("2", "pol", 1)},
                                       f.index, TagFilter::All);
        REQUIRE(s.size() == 1);
        CHECK(s[0].day == "2016-07-01");
        CHECK(s[0].pct == 100.0);
    }
    SUBCASE("filter excludes everything") {
        PostStore store;
        std::vector<Assignment> a;
        for (int d = 0; d < 4; ++d) {
            store.add(post(std::to_string(d), "pol", kStart + d * kDay, 0));
            a.push_back(assign(std::to_string(d), "pol", 1));
        }
        const auto s = temporal_report(store, a, f.index, TagFilter::Racist);
        REQUIRE(s.size() == 4);
        for (const auto& p : s) CHECK(p.pct == 0.0);
    }
    SUBCASE("uniform stream is flat, gaps are zero-filled") {
        PostStore store;
        std::vector<Assignment> a;
        int id = 0;
        for (int d = 0; d < 10; ++d) {
            if (d == 4) continue;  // a quiet day
            for (int k = 0; k < 4; ++k) {
                store.add(post(std::to_string(id), "gab", kStart + d * kDay + k * 3600, 0));
                if (k == 0) a.push_back(assign(std::to_string(id), "gab", 0));
                ++id;
            }
        }
        const auto s = temporal_report(store, a, f.index, TagFilter::All);
        REQUIRE(s.size() == 10);
        CHECK(s[4].posts == 0);
        CHECK(s[4].day == "2016-07-05");
        for (std::size_t i = 0; i < s.size(); ++i)
            if (i != 4) CHECK(s[i].pct == doctest::Approx(25.0));
    }
}

TEST_CASE("ecdf") {
    const auto e = make_ecdf({3, 1, 2});
    REQUIRE(e.steps.size() == 3);
    CHECK(e.steps[0] == std::pair<double, double>{1, 1.0 / 3});
    CHECK(e.steps[1].second == doctest::Approx(2.0 / 3));
    CHECK(e.steps[2].second == 1.0);
    CHECK(e.mean == 2.0);
    CHECK(e.median == 2.0);
    const auto ties = make_ecdf({1, 1, 2, 2});
    REQUIRE(ties.steps.size() == 2);
    CHECK(ties.steps[0].second == 0.5);
    CHECK(ties.median == 1.5);
}

TEST_CASE("score comparison") {
    Fixture f;
    SUBCASE("identical sides") {
        PostStore store;
        std::vector<Assignment> a;
        for (int i = 0; i < 20; ++i) {
            store.add(post(std::to_string(i), "reddit", kStart, 0, i / 2));
            if (i % 2 == 0) a.push_back(assign(std::to_string(i), "reddit", 0));
        }
        const auto c = score_cdf(store, a, f.index, "reddit", TagFilter::All);
        CHECK(c.group.steps == c.complement.steps);
        std::vector<double> g, r;
        for (int i = 0; i < 10; ++i) g.push_back(i), r.push_back(i);
        CHECK(ks_two_sample(g, r).D == 0.0);
    }
    SUBCASE("shifted by construction") {
        PostStore store;
        std::vector<Assignment> a;
        for (int i = 0; i < 50; ++i) {
            store.add(post("m" + std::to_string(i), "gab", kStart, 0, 100 + i));
            store.add(post("n" + std::to_string(i), "gab", kStart, 0, i));
            a.push_back(assign("m" + std::to_string(i), "gab", i % 2));
        }
        const auto all = score_cdf(store, a, f.index, "gab", TagFilter::All);
        CHECK(all.group.n == 50);
        CHECK(all.complement.n == 50);
        CHECK(all.group.mean > all.complement.mean);
        const auto racist = score_cdf(store, a, f.index, "gab", TagFilter::Racist);
        CHECK(racist.group.n == 25);
        CHECK(racist.complement.n == 25);
        std::ostringstream out;
        write_score_cdf_csv(out, all);
        CHECK(out.str().rfind("community,side,n,mean,median\n", 0) == 0);
    }
    SUBCASE("community without scores") {
        PostStore store;
        store.add(post("1", "pol", kStart, 0));
        CHECK_THROWS_AS(score_cdf(store, {}, f.index, "pol", TagFilter::All), UnsupportedCommunity);
    }
}

TEST_CASE("parsers") {
    CHECK(parse_tag_filter("racist") == TagFilter::Racist);
    CHECK(parse_group_by("person") == GroupBy::PersonEntry);
    CHECK_THROWS(parse_tag_filter("funny"));
    CHECK_THROWS(parse_group_by("color"));
    CHECK(to_string(TagFilter::Political) == "political");
}
