#pragma once

// Slow, obviously-correct references used by the tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <vector>

namespace oracle {

// Nibble table popcount, independent of std::popcount.
inline int hamming(std::uint64_t a, std::uint64_t b) {
    static constexpr int kBits[16] = {0, 1, 1, 2, 1, 2, 2, 3, 1, 2, 2, 3, 2, 3, 3, 4};
    std::uint64_t x = a ^ b;
    int n = 0;
    for (int i = 0; i < 16; ++i, x >>= 4) n += kBits[x & 0xf];
    return n;
}

struct Pair {
    std::uint32_t i, j;
    int d;
    bool operator==(const Pair&) const = default;
};

inline std::vector<Pair> pairs_within(const std::vector<std::uint64_t>& h, int t) {
    std::vector<Pair> out;
    for (std::uint32_t i = 0; i < h.size(); ++i)
        for (std::uint32_t j = 0; j < h.size(); ++j)
            if (i != j && hamming(h[i], h[j]) <= t) out.push_back({i, j, hamming(h[i], h[j])});
    return out;
}

// DBSCAN the long way: core test by counting, clusters by flood fill over
// cores, border to the reaching core with the smallest (hash, index).
// Returns a label per point, -1 for noise, clusters numbered by smallest member.
inline std::vector<int> dbscan(const std::vector<std::uint64_t>& h, int eps, int min_pts) {
    const std::size_t n = h.size();
    std::vector<bool> core(n);
    for (std::size_t i = 0; i < n; ++i) {
        int count = 0;
        for (std::size_t j = 0; j < n; ++j) count += hamming(h[i], h[j]) <= eps;
        core[i] = count >= min_pts;
    }
    std::vector<int> comp(n, -1);
    int next = 0;
    for (std::size_t s = 0; s < n; ++s) {
        if (!core[s] || comp[s] >= 0) continue;
        std::vector<std::size_t> stack{s};
        comp[s] = next;
        while (!stack.empty()) {
            auto i = stack.back();
            stack.pop_back();
            for (std::size_t j = 0; j < n; ++j)
                if (core[j] && comp[j] < 0 && hamming(h[i], h[j]) <= eps) {
                    comp[j] = next;
                    stack.push_back(j);
                }
        }
        ++next;
    }
    std::vector<int> label = comp;
    for (std::size_t i = 0; i < n; ++i) {
        if (core[i]) continue;
        std::size_t best = n;
        for (std::size_t j = 0; j < n; ++j)
            if (core[j] && hamming(h[i], h[j]) <= eps &&
                (best == n || h[j] < h[best] || (h[j] == h[best] && j < best)))
                best = j;
        label[i] = best == n ? -1 : comp[best];
    }
    // renumber by smallest member
    std::map<int, int> renum;
    for (std::size_t i = 0; i < n; ++i)
        if (label[i] >= 0 && !renum.contains(label[i])) renum.emplace(label[i], static_cast<int>(renum.size()));
    for (auto& l : label)
        if (l >= 0) l = renum[l];
    return label;
}

// Hashes that actually cluster: centers with a few flipped bits, plus background.
inline std::vector<std::uint64_t> clustered_hashes(std::size_t n, std::size_t centers, int max_flips,
                                                   double noise_share, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<std::uint64_t> c(centers);
    for (auto& x : c) x = rng();
    std::vector<std::uint64_t> out;
    std::uniform_real_distribution<double> u(0, 1);
    while (out.size() < n) {
        if (u(rng) < noise_share) {
            out.push_back(rng());
            continue;
        }
        std::uint64_t x = c[rng() % centers];
        const int flips = static_cast<int>(rng() % (max_flips + 1));
        for (int f = 0; f < flips; ++f) x ^= 1ULL << (rng() % 64);
        out.push_back(x);
    }
    return out;
}

// Components of the graph on n nodes with an edge where d(i, j) < kappa.
template <class Dist>
std::vector<int> threshold_components(std::size_t n, Dist d, double kappa) {
    std::vector<int> comp(n, -1);
    int next = 0;
    for (std::size_t s = 0; s < n; ++s) {
        if (comp[s] >= 0) continue;
        std::vector<std::size_t> stack{s};
        comp[s] = next;
        while (!stack.empty()) {
            auto i = stack.back();
            stack.pop_back();
            for (std::size_t j = 0; j < n; ++j)
                if (comp[j] < 0 && d(i, j) < kappa) {
                    comp[j] = next;
                    stack.push_back(j);
                }
        }
        ++next;
    }
    return comp;
}

// Naive agglomeration: repeatedly merge the two closest groups (min over members).
template <class Dist>
std::vector<double> single_linkage_heights(std::size_t n, Dist d) {
    std::vector<std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < n; ++i) groups.push_back({i});
    std::vector<double> heights;
    while (groups.size() > 1) {
        double best = INFINITY;
        std::size_t ba = 0, bb = 1;
        for (std::size_t a = 0; a < groups.size(); ++a)
            for (std::size_t b = a + 1; b < groups.size(); ++b)
                for (auto i : groups[a])
                    for (auto j : groups[b])
                        if (d(i, j) < best) {
                            best = d(i, j);
                            ba = a;
                            bb = b;
                        }
        heights.push_back(best);
        groups[ba].insert(groups[ba].end(), groups[bb].begin(), groups[bb].end());
        groups.erase(groups.begin() + static_cast<long>(bb));
    }
    return heights;
}

// Two labelings describe the same partition.
inline bool same_partition(const std::vector<int>& a, const std::vector<std::size_t>& b) {
    if (a.size() != b.size()) return false;
    std::map<int, std::size_t> ab;
    std::map<std::size_t, int> ba;
    for (std::size_t i = 0; i < a.size(); ++i) {
        auto [x, ins1] = ab.emplace(a[i], b[i]);
        auto [y, ins2] = ba.emplace(b[i], a[i]);
        if (x->second != b[i] || y->second != a[i]) return false;
    }
    return true;
}

// sup |F_x - F_y| over every sample point.
inline double ks_statistic(std::vector<double> x, std::vector<double> y) {
    std::vector<double> pts = x;
    pts.insert(pts.end(), y.begin(), y.end());
    double best = 0;
    for (double p : pts) {
        double fx = 0, fy = 0;
        for (double v : x) fx += v <= p;
        for (double v : y) fy += v <= p;
        best = std::max(best, std::fabs(fx / x.size() - fy / y.size()));
    }
    return best;
}

} // namespace oracle
