#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "memetrace/mememetric.hpp"

namespace memetrace {

/// Leaves are numbered 0..n-1 (profile order); merge k creates node n+k.
struct Merge {
    std::size_t a;
    std::size_t b;
    double height;
    std::size_t size;
};

struct Dendrogram {
    std::vector<int> leaves;  // cluster_id per leaf
    std::vector<Merge> merges;

    /// Flat component index per leaf after joining every merge with height < cut.
    std::vector<std::size_t> cut(double height) const;
};

/// Single-linkage agglomeration over cluster_distance.
Dendrogram linkage(std::span<const ClusterProfile> profiles, const MetricConfig& cfg);

void write_dendrogram_csv(std::ostream& out, const Dendrogram& d);

struct NodeLabel {
    std::string label;       // representative entry name
    std::string community;   // origin community
    std::size_t size = 0;    // cluster size
    bool racist = false;
    bool political = false;
};

struct GraphNode {
    int cluster_id = 0;
    NodeLabel attrs;
};

struct GraphEdge {
    int a = 0;  // cluster ids, a < b
    int b = 0;
    double distance = 0.0;
};

struct MemeGraph {
    std::vector<GraphNode> nodes;  // ascending cluster_id
    std::vector<GraphEdge> edges;  // ascending (a, b)
};

inline constexpr double kDefaultKappa = 0.45;
inline constexpr std::size_t kDefaultDegreeMin = 10;

/// Edge iff cluster_distance < kappa. Nodes whose degree in that graph is
/// below degree_min are then dropped with their edges, in a single pass.
MemeGraph build_graph(std::span<const ClusterProfile> profiles, const std::map<int, NodeLabel>& labels,
                      const MetricConfig& cfg, double kappa = kDefaultKappa,
                      std::size_t degree_min = kDefaultDegreeMin);

/// Component index per node (in node order) of the graph as given.
std::vector<std::size_t> connected_components(const MemeGraph& g);

enum class GraphFormat { GraphML, Dot, Csv };
GraphFormat parse_graph_format(std::string_view name);

void export_graph(std::ostream& out, const MemeGraph& g, GraphFormat format);
/// Reads GraphML or CSV as written by export_graph.
MemeGraph parse_graph(std::istream& in, GraphFormat format);

} // namespace memetrace
