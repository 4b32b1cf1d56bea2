#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "memetrace/phash.hpp"
#include "memetrace/simdist.hpp"

namespace memetrace {

struct Cluster {
    int id = 0;
    std::vector<std::uint32_t> members;  // ascending input indices
    std::uint32_t medoid = 0;
};

struct Clustering {
    std::vector<Cluster> clusters;     // ordered by smallest member index; id = position
    std::vector<std::uint32_t> noise;  // ascending
};

inline constexpr int kDefaultMinPts = 5;

/// DBSCAN over precomputed neighborhoods. A point is core when its
/// neighborhood, counting itself, holds at least min_pts points. Border points
/// join the cluster of the reaching core with the smallest hash value (lowest
/// index on equal hashes). Medoids are left at each cluster's first member;
/// use assign_medoids to fill them.
Clustering dbscan(const NeighborList& neighbors, int min_pts, std::span<const PHash64> hashes);

/// Member minimizing the sum of squared Hamming distances to all members;
/// ties go to the smaller hash value, then the smaller index.
std::uint32_t medoid(std::span<const std::uint32_t> members, std::span<const PHash64> hashes);

void assign_medoids(Clustering& c, std::span<const PHash64> hashes);

/// pairwise_within + dbscan + assign_medoids.
Clustering cluster_hashes(std::span<const PHash64> hashes, int eps, int min_pts);

struct SweepRow {
    int eps;
    std::size_t clusters;
    double noise_pct;
};

std::vector<SweepRow> eps_sweep(std::span<const PHash64> hashes, std::span<const int> eps_list, int min_pts);
void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows);

/// {clusters: [{id, medoid_hex, member_hexes[]}], noise_count}
void write_clustering_json(std::ostream& out, const Clustering& c, std::span<const PHash64> hashes);

struct ClusterRecord {
    int id;
    PHash64 medoid;
    std::vector<PHash64> members;
};
std::vector<ClusterRecord> read_clustering_json(std::istream& in, std::size_t* noise_count = nullptr);

} // namespace memetrace
