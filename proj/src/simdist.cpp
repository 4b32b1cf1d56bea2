#include "memetrace/simdist.hpp"

#include <algorithm>
#include <bit>
#include <istream>
#include <ostream>
#include <string_view>

#include "memetrace/errors.hpp"
#include "memetrace/parallel.hpp"

namespace memetrace {

namespace {

constexpr std::size_t kTile = 1024;

struct Edge {
    std::uint32_t i;
    std::uint32_t j;
    HammingScore d;
};

void check_threshold(int threshold) {
    if (threshold < 0 || threshold > kMaxHamming) throw InvalidInput("threshold must be in [0, 64]");
}

// Compares block a against block b; when `upper` only pairs with local j > local i are kept.
template <typename Emit>
inline void sweep_tile(const std::uint64_t* a, std::size_t na, const std::uint64_t* b, std::size_t nb,
                       bool upper, int threshold, Emit&& emit) {
    const unsigned t = static_cast<unsigned>(threshold);
    for (std::size_t i = 0; i < na; ++i) {
        const std::uint64_t x = a[i];
        for (std::size_t j = upper ? i + 1 : 0; j < nb; ++j) {
            const unsigned d = static_cast<unsigned>(std::popcount(x ^ b[j]));
            if (d <= t) [[unlikely]]
                emit(i, j, d);
        }
    }
}

template <typename T>
void put(std::ostream& out, T v) {
    unsigned char buf[sizeof(T)];
    for (std::size_t k = 0; k < sizeof(T); ++k) buf[k] = static_cast<unsigned char>((static_cast<std::uint64_t>(v) >> (8 * k)) & 0xff);
    out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
    unsigned char buf[sizeof(T)];
    if (!in.read(reinterpret_cast<char*>(buf), sizeof(T))) throw InvalidInput("neighbor spill: truncated");
    std::uint64_t v = 0;
    for (std::size_t k = 0; k < sizeof(T); ++k) v |= static_cast<std::uint64_t>(buf[k]) << (8 * k);
    return static_cast<T>(v);
}

} // namespace

NeighborList::NeighborList(std::vector<std::size_t> offsets, std::vector<Neighbor> entries, int threshold)
    : offsets_(std::move(offsets)), entries_(std::move(entries)), threshold_(threshold) {
    if (offsets_.empty()) offsets_.push_back(0);
}

NeighborList NeighborList::restricted(int t) const {
    if (t > threshold_) throw InvalidInput("cannot widen a neighbor list beyond its build threshold");
    std::vector<std::size_t> offsets{0};
    offsets.reserve(offsets_.size());
    std::vector<Neighbor> entries;
    for (std::size_t i = 0; i < size(); ++i) {
        for (const auto& nb : (*this)[i])
            if (nb.distance <= t) entries.push_back(nb);
        offsets.push_back(entries.size());
    }
    return NeighborList(std::move(offsets), std::move(entries), t);
}

NeighborList pairwise_within(std::span<const PHash64> hashes, int threshold) {
    check_threshold(threshold);
    const std::size_t n = hashes.size();
    std::vector<std::uint64_t> words(n);
    for (std::size_t i = 0; i < n; ++i) words[i] = hashes[i].bits;

    const std::size_t blocks = (n + kTile - 1) / kTile;
    std::vector<std::pair<std::size_t, std::size_t>> tiles;
    for (std::size_t bi = 0; bi < blocks; ++bi)
        for (std::size_t bj = bi; bj < blocks; ++bj) tiles.emplace_back(bi, bj);

    std::vector<std::vector<Edge>> tile_out(tiles.size());
    parallel_for(tiles.size(), [&](std::size_t t) {
        const auto [bi, bj] = tiles[t];
        const std::size_t i0 = bi * kTile, j0 = bj * kTile;
        const std::size_t ni = std::min(kTile, n - i0), nj = std::min(kTile, n - j0);
        auto& out = tile_out[t];
        sweep_tile(words.data() + i0, ni, words.data() + j0, nj, bi == bj, threshold,
                   [&](std::size_t i, std::size_t j, unsigned d) {
                       out.push_back({static_cast<std::uint32_t>(i0 + i), static_cast<std::uint32_t>(j0 + j),
                                      static_cast<HammingScore>(d)});
                   });
    });

    std::vector<std::size_t> offsets(n + 1, 0);
    for (const auto& tile : tile_out)
        for (const auto& e : tile) {
            ++offsets[e.i + 1];
            ++offsets[e.j + 1];
        }
    for (std::size_t i = 0; i < n; ++i) offsets[i + 1] += offsets[i];
    std::vector<Neighbor> entries(offsets[n]);
    std::vector<std::size_t> fill(offsets.begin(), offsets.end() - 1);
    for (const auto& tile : tile_out)
        for (const auto& e : tile) {
            entries[fill[e.i]++] = {e.j, e.d};
            entries[fill[e.j]++] = {e.i, e.d};
        }
    for (std::size_t i = 0; i < n; ++i)
        std::sort(entries.begin() + static_cast<std::ptrdiff_t>(offsets[i]),
                  entries.begin() + static_cast<std::ptrdiff_t>(offsets[i + 1]),
                  [](const Neighbor& a, const Neighbor& b) { return a.index < b.index; });
    return NeighborList(std::move(offsets), std::move(entries), threshold);
}

std::vector<CrossMatch> pairwise_cross(std::span<const PHash64> queries, std::span<const PHash64> refs,
                                       int threshold) {
    check_threshold(threshold);
    std::vector<std::uint64_t> q(queries.size()), r(refs.size());
    for (std::size_t i = 0; i < q.size(); ++i) q[i] = queries[i].bits;
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = refs[i].bits;

    const std::size_t qblocks = (q.size() + kTile - 1) / kTile;
    std::vector<std::vector<CrossMatch>> block_out(qblocks);
    parallel_for(qblocks, [&](std::size_t bq) {
        const std::size_t q0 = bq * kTile, nq = std::min(kTile, q.size() - q0);
        auto& out = block_out[bq];
        for (std::size_t r0 = 0; r0 < r.size(); r0 += kTile) {
            const std::size_t nr = std::min(kTile, r.size() - r0);
            sweep_tile(q.data() + q0, nq, r.data() + r0, nr, false, threshold,
                       [&](std::size_t i, std::size_t j, unsigned d) {
                           out.push_back({static_cast<std::uint32_t>(q0 + i), static_cast<std::uint32_t>(r0 + j),
                                          static_cast<HammingScore>(d)});
                       });
        }
        std::sort(out.begin(), out.end(), [](const CrossMatch& a, const CrossMatch& b) {
            return a.query != b.query ? a.query < b.query : a.ref < b.ref;
        });
    });

    std::vector<CrossMatch> merged;
    std::size_t total = 0;
    for (const auto& b : block_out) total += b.size();
    merged.reserve(total);
    for (auto& b : block_out) merged.insert(merged.end(), b.begin(), b.end());
    return merged;
}

void write_neighbor_spill(std::ostream& out, const NeighborList& nl) {
    out.write("MTNL", 4);
    put<std::uint32_t>(out, 1);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(nl.size()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(nl.threshold()));
    for (std::size_t i = 0; i < nl.size(); ++i) {
        const auto row = nl[i];
        put<std::uint32_t>(out, static_cast<std::uint32_t>(i));
        put<std::uint32_t>(out, static_cast<std::uint32_t>(row.size()));
        for (const auto& nb : row) {
            put<std::uint32_t>(out, nb.index);
            put<std::uint8_t>(out, nb.distance);
        }
    }
}

NeighborList read_neighbor_spill(std::istream& in) {
    char magic[4];
    if (!in.read(magic, 4) || std::string_view(magic, 4) != "MTNL") throw InvalidInput("neighbor spill: bad magic");
    if (get<std::uint32_t>(in) != 1) throw InvalidInput("neighbor spill: unsupported version");
    const auto rows = get<std::uint32_t>(in);
    const auto threshold = get<std::uint32_t>(in);
    std::vector<std::size_t> offsets{0};
    offsets.reserve(rows + 1);
    std::vector<Neighbor> entries;
    for (std::uint32_t i = 0; i < rows; ++i) {
        if (get<std::uint32_t>(in) != i) throw InvalidInput("neighbor spill: rows out of order");
        const auto count = get<std::uint32_t>(in);
        for (std::uint32_t k = 0; k < count; ++k) {
            const auto idx = get<std::uint32_t>(in);
            const auto d = get<std::uint8_t>(in);
            if (idx >= rows) throw InvalidInput("neighbor spill: index out of range");
            entries.push_back({idx, d});
        }
        offsets.push_back(entries.size());
    }
    return NeighborList(std::move(offsets), std::move(entries), static_cast<int>(threshold));
}

} // namespace memetrace
