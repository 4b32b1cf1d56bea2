#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>

#include "memetrace/cluster.hpp"
#include "oracles.hpp"

using namespace memetrace;

namespace {

std::vector<PHash64> wrap(const std::vector<std::uint64_t>& v) {
    std::vector<PHash64> out;
    for (auto x : v) out.emplace_back(x);
    return out;
}

std::vector<int> labels_of(const Clustering& c, std::size_t n) {
    std::vector<int> l(n, -1);
    for (const auto& cl : c.clusters)
        for (auto m : cl.members) l[m] = cl.id;
    return l;
}

// brute force: argmin of squared distance sums, ties to smaller hash then index
std::uint32_t naive_medoid(const std::vector<std::uint32_t>& members, const std::vector<PHash64>& h) {
    std::uint32_t best = members[0];
    long best_cost = -1;
    for (auto i : members) {
        long cost = 0;
        for (auto j : members) {
            const long d = oracle::hamming(h[i].bits, h[j].bits);
            cost += d * d;
        }
        if (best_cost < 0 || cost < best_cost || (cost == best_cost && (h[i] < h[best] || (h[i] == h[best] && i < best)))) {
            best = i;
            best_cost = cost;
        }
    }
    return best;
}

} // namespace

TEST_CASE("six identical hashes form one cluster") {
    const std::vector<PHash64> h(6, PHash64{0xabc});
    const auto c = cluster_hashes(h, 8, 5);
    REQUIRE(c.clusters.size() == 1);
    CHECK(c.clusters[0].members.size() == 6);
    CHECK(c.noise.empty());
    CHECK(c.clusters[0].medoid == 0);
}

TEST_CASE("too few neighbors means noise") {
    std::vector<PHash64> h(4, PHash64{0});
    h.push_back(PHash64{~0ULL});
    const auto c = cluster_hashes(h, 8, 5);
    CHECK(c.clusters.empty());
    CHECK(c.noise.size() == 5);
}

TEST_CASE("dbscan matches the brute-force reference") {
    const auto raw = oracle::clustered_hashes(1000, 25, 8, 0.3, 31);
    const auto h = wrap(raw);
    for (int eps : {2, 4, 6, 8, 10}) {
        const auto c = cluster_hashes(h, eps, 5);
        CHECK(labels_of(c, h.size()) == oracle::dbscan(raw, eps, 5));
    }
}

TEST_CASE("border point goes to the core with the smaller hash") {
    // x is 2 bits from core p1 (hash 0) and from core q1 (hash 0xf), and core itself nowhere
    const std::uint64_t q1 = 0xf;
    const std::vector<std::uint64_t> raw{q1,      q1 | 1ULL << 20, q1 | 3ULL << 20, q1 | 1ULL << 22,  // q group first
                                         0,       1ULL << 10,      3ULL << 10,      1ULL << 12,       // p group
                                         0x3};
    const auto c = cluster_hashes(wrap(raw), 2, 4);
    REQUIRE(c.clusters.size() == 2);
    const auto labels = labels_of(c, raw.size());
    CHECK(labels == oracle::dbscan(raw, 2, 4));
    CHECK(labels[8] == labels[4]);
    CHECK(labels[8] != labels[0]);
}

TEST_CASE("partition is invariant under permutation") {
    auto raw = oracle::clustered_hashes(600, 15, 8, 0.3, 2);
    const auto base = cluster_hashes(wrap(raw), 8, 5);
    std::map<std::uint64_t, std::set<std::uint64_t>> by_hash;  // hash -> hashes sharing its cluster
    auto groups = [](const Clustering& c, const std::vector<std::uint64_t>& r) {
        std::set<std::multiset<std::uint64_t>> g;
        for (const auto& cl : c.clusters) {
            std::multiset<std::uint64_t> s;
            for (auto m : cl.members) s.insert(r[m]);
            g.insert(s);
        }
        return g;
    };
    const auto want = groups(base, raw);
    std::mt19937_64 rng(9);
    for (int round = 0; round < 5; ++round) {
        std::shuffle(raw.begin(), raw.end(), rng);
        CHECK(groups(cluster_hashes(wrap(raw), 8, 5), raw) == want);
    }
}

TEST_CASE("medoid") {
    SUBCASE("identical members pick the lowest index") {
        const std::vector<PHash64> h(4, PHash64{7});
        const std::vector<std::uint32_t> m{1, 2, 3};
        CHECK(medoid(m, h) == 1);
    }
    SUBCASE("middle of a line wins 72 vs 180") {
        const std::vector<PHash64> h{PHash64{0}, PHash64{0x3f}, PHash64{0xfff}};
        const std::vector<std::uint32_t> m{0, 1, 2};
        CHECK(oracle::hamming(0, 0x3f) == 6);
        CHECK(oracle::hamming(0x3f, 0xfff) == 6);
        CHECK(oracle::hamming(0, 0xfff) == 12);
        CHECK(medoid(m, h) == 1);
    }
    SUBCASE("singleton") {
        const std::vector<PHash64> h{PHash64{1}, PHash64{2}};
        const std::vector<std::uint32_t> m{1};
        CHECK(medoid(m, h) == 1);
    }
    SUBCASE("brute force on clusters") {
        const auto h = wrap(oracle::clustered_hashes(400, 6, 8, 0.0, 12));
        const auto c = cluster_hashes(h, 8, 5);
        REQUIRE(!c.clusters.empty());
        for (const auto& cl : c.clusters) CHECK(cl.medoid == naive_medoid(cl.members, h));
    }
}

TEST_CASE("sweep edge cases") {
    const std::vector<int> eps{2, 4, 6, 8, 10};
    SUBCASE("all identical") {
        const std::vector<PHash64> h(10, PHash64{3});
        for (const auto& row : eps_sweep(h, eps, 5)) {
            CHECK(row.clusters == 1);
            CHECK(row.noise_pct == 0.0);
        }
    }
    SUBCASE("four far points") {
        const std::vector<PHash64> h{PHash64{0}, PHash64{0xfffff}, PHash64{0xfffffULL << 20}, PHash64{0xfffffULL << 40}};
        for (const auto& row : eps_sweep(h, eps, 5)) {
            CHECK(row.clusters == 0);
            CHECK(row.noise_pct == 100.0);
        }
    }
}

TEST_CASE("sweep rows agree with per-eps clustering, noise non-increasing") {
    const auto raw = oracle::clustered_hashes(800, 2, 10, 0.2, 77);  // two blobs
    const auto h = wrap(raw);
    const std::vector<int> eps{2, 4, 6, 8, 10};
    const auto rows = eps_sweep(h, eps, 5);
    REQUIRE(rows.size() == 5);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto labels = oracle::dbscan(raw, eps[i], 5);
        const auto noise = std::count(labels.begin(), labels.end(), -1);
        CHECK(rows[i].noise_pct == doctest::Approx(100.0 * noise / raw.size()));
        CHECK(rows[i].clusters == static_cast<std::size_t>(*std::max_element(labels.begin(), labels.end()) + 1));
        if (i) CHECK(rows[i].noise_pct <= rows[i - 1].noise_pct);
    }
    std::ostringstream out;
    write_sweep_csv(out, rows);
    CHECK(out.str().rfind("eps,clusters,noise_pct\n", 0) == 0);
}

TEST_CASE("clustering json roundtrip") {
    const auto h = wrap(oracle::clustered_hashes(300, 5, 6, 0.2, 6));
    const auto c = cluster_hashes(h, 8, 5);
    std::stringstream buf;
    write_clustering_json(buf, c, h);
    std::size_t noise = 0;
    const auto recs = read_clustering_json(buf, &noise);
    CHECK(noise == c.noise.size());
    REQUIRE(recs.size() == c.clusters.size());
    for (std::size_t i = 0; i < recs.size(); ++i) {
        CHECK(recs[i].id == c.clusters[i].id);
        CHECK(recs[i].medoid == h[c.clusters[i].medoid]);
        CHECK(recs[i].members.size() == c.clusters[i].members.size());
    }
}
