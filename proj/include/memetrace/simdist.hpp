#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "memetrace/phash.hpp"

namespace memetrace {

struct Neighbor {
    std::uint32_t index;
    HammingScore distance;

    friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// Symmetric thresholded neighborhoods in CSR form. Row i lists every j != i
/// with hamming(h_i, h_j) <= threshold, ascending by j.
class NeighborList {
public:
    NeighborList() : offsets_{0} {}
    NeighborList(std::vector<std::size_t> offsets, std::vector<Neighbor> entries, int threshold);

    std::size_t size() const noexcept { return offsets_.size() - 1; }
    std::span<const Neighbor> operator[](std::size_t i) const {
        return {entries_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
    }
    std::size_t degree(std::size_t i) const { return offsets_[i + 1] - offsets_[i]; }
    std::size_t edge_entries() const noexcept { return entries_.size(); }
    int threshold() const noexcept { return threshold_; }

    /// Rows restricted to distance <= t (t must not exceed threshold()).
    NeighborList restricted(int t) const;

    friend bool operator==(const NeighborList&, const NeighborList&) = default;

private:
    std::vector<std::size_t> offsets_;
    std::vector<Neighbor> entries_;
    int threshold_ = 0;
};

struct CrossMatch {
    std::uint32_t query;
    std::uint32_t ref;
    HammingScore distance;

    friend bool operator==(const CrossMatch&, const CrossMatch&) = default;
};

/// Exact all-pairs neighborhoods; tiled and spread over max_threads() workers.
NeighborList pairwise_within(std::span<const PHash64> hashes, int threshold);

/// Exact cross-corpus matches with distance <= threshold, query-major then by reference index.
std::vector<CrossMatch> pairwise_cross(std::span<const PHash64> queries, std::span<const PHash64> refs,
                                       int threshold);

// Spill format, little-endian: per row (u32 index, u32 count, count x (u32 neighbor, u8 distance)).
// A leading header (magic "MTNL", u32 version, u32 rows, u32 threshold) precedes the rows.
void write_neighbor_spill(std::ostream& out, const NeighborList& nl);
NeighborList read_neighbor_spill(std::istream& in);

} // namespace memetrace
