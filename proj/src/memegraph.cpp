#include "memetrace/memegraph.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <sstream>
#include <tuple>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <fmt/format.h>

#include "memetrace/errors.hpp"
#include "memetrace/parallel.hpp"

namespace memetrace {

namespace {

class DisjointSet {
public:
    explicit DisjointSet(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
    std::size_t find(std::size_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }
    // Keeps the smaller root so labels stay deterministic.
    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (b < a) std::swap(a, b);
        parent_[b] = a;
    }

private:
    std::vector<std::size_t> parent_;
};

std::vector<std::size_t> compact_labels(DisjointSet& ds, std::size_t n) {
    std::vector<std::size_t> out(n);
    std::map<std::size_t, std::size_t> remap;
    for (std::size_t i = 0; i < n; ++i) {
        const auto root = ds.find(i);
        auto [it, _] = remap.try_emplace(root, remap.size());
        out[i] = it->second;
    }
    return out;
}

constexpr std::size_t kChunk = 256;

std::string xml_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        case '\'': out += "&apos;"; break;
        default: out += c;
        }
    }
    return out;
}

std::string dot_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out;
}

std::string csv_field(std::string_view s) {
    if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    fields.push_back(std::move(cur));
    return fields;
}

bool parse_bool(const std::string& s) {
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
    throw InvalidInput("graph: bad boolean '" + s + "'");
}

} // namespace

std::vector<std::size_t> Dendrogram::cut(double height) const {
    const std::size_t n = leaves.size();
    DisjointSet ds(n + merges.size());
    for (std::size_t k = 0; k < merges.size(); ++k) {
        if (merges[k].height < height) {
            ds.unite(merges[k].a, n + k);
            ds.unite(merges[k].b, n + k);
        }
    }
    return compact_labels(ds, n);
}

Dendrogram linkage(std::span<const ClusterProfile> profiles, const MetricConfig& cfg) {
    cfg.validate();
    const std::size_t n = profiles.size();
    if (n < 2) throw InvalidInput("linkage: need at least two profiles");

    // Prim's MST; each step refreshes the frontier distances in parallel chunks.
    std::vector<double> best(n, std::numeric_limits<double>::infinity());
    std::vector<std::size_t> from(n, 0);
    std::vector<char> in_tree(n, 0);
    struct MstEdge {
        double h;
        std::size_t u, v;
    };
    std::vector<MstEdge> mst;
    mst.reserve(n - 1);
    std::size_t current = 0;
    in_tree[0] = 1;
    const std::size_t chunks = (n + kChunk - 1) / kChunk;
    for (std::size_t step = 1; step < n; ++step) {
        parallel_for(chunks, [&](std::size_t c) {
            const std::size_t lo = c * kChunk, hi = std::min(n, lo + kChunk);
            for (std::size_t j = lo; j < hi; ++j) {
                if (in_tree[j]) continue;
                const double d = cluster_distance(profiles[current], profiles[j], cfg);
                if (d < best[j]) {
                    best[j] = d;
                    from[j] = current;
                }
            }
        });
        std::size_t next = n;
        for (std::size_t j = 0; j < n; ++j)
            if (!in_tree[j] && (next == n || best[j] < best[next])) next = j;
        mst.push_back({best[next], from[next], next});
        in_tree[next] = 1;
        current = next;
    }

    auto key = [&](const MstEdge& e) {
        const int a = profiles[e.u].cluster_id, b = profiles[e.v].cluster_id;
        return std::make_tuple(e.h, std::min(a, b), std::max(a, b));
    };
    std::sort(mst.begin(), mst.end(), [&](const MstEdge& x, const MstEdge& y) { return key(x) < key(y); });

    Dendrogram d;
    d.leaves.reserve(n);
    for (const auto& p : profiles) d.leaves.push_back(p.cluster_id);
    std::vector<std::size_t> node_of(n), size_of(2 * n - 1, 1);
    std::iota(node_of.begin(), node_of.end(), 0);
    DisjointSet ds(n);
    for (const auto& e : mst) {
        const std::size_t ru = ds.find(e.u), rv = ds.find(e.v);
        std::size_t na = node_of[ru], nb = node_of[rv];
        if (na > nb) std::swap(na, nb);
        const std::size_t created = n + d.merges.size();
        size_of[created] = size_of[na] + size_of[nb];
        d.merges.push_back({na, nb, e.h, size_of[created]});
        ds.unite(ru, rv);
        node_of[ds.find(ru)] = created;
    }
    return d;
}

void write_dendrogram_csv(std::ostream& out, const Dendrogram& d) {
    out << "node,left,right,height,size\n";
    const std::size_t n = d.leaves.size();
    auto name = [&](std::size_t node) {
        return node < n ? fmt::format("c{}", d.leaves[node]) : fmt::format("m{}", node - n);
    };
    for (std::size_t k = 0; k < d.merges.size(); ++k) {
        const auto& m = d.merges[k];
        out << fmt::format("m{},{},{},{:.17g},{}\n", k, name(m.a), name(m.b), m.height, m.size);
    }
}

MemeGraph build_graph(std::span<const ClusterProfile> profiles, const std::map<int, NodeLabel>& labels,
                      const MetricConfig& cfg, double kappa, std::size_t degree_min) {
    cfg.validate();
    if (!(kappa > 0.0 && kappa <= 1.0)) throw ConfigError("build_graph: kappa must lie in (0, 1]");
    std::vector<std::size_t> order(profiles.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t x, std::size_t y) { return profiles[x].cluster_id < profiles[y].cluster_id; });
    const std::size_t n = order.size();

    std::vector<std::vector<GraphEdge>> rows(n);
    parallel_for(n, [&](std::size_t i) {
        const auto& p = profiles[order[i]];
        for (std::size_t j = i + 1; j < n; ++j) {
            const double d = cluster_distance(p, profiles[order[j]], cfg);
            if (d < kappa) rows[i].push_back({p.cluster_id, profiles[order[j]].cluster_id, d});
        }
    });

    std::map<int, std::size_t> degree;
    for (const auto& row : rows)
        for (const auto& e : row) {
            ++degree[e.a];
            ++degree[e.b];
        }
    auto keep = [&](int cid) {
        auto it = degree.find(cid);
        return (it == degree.end() ? 0 : it->second) >= degree_min;
    };

    MemeGraph g;
    for (std::size_t i = 0; i < n; ++i) {
        const int cid = profiles[order[i]].cluster_id;
        if (!keep(cid)) continue;
        GraphNode node{cid, {}};
        if (auto it = labels.find(cid); it != labels.end()) node.attrs = it->second;
        g.nodes.push_back(std::move(node));
    }
    for (const auto& row : rows)
        for (const auto& e : row)
            if (keep(e.a) && keep(e.b)) g.edges.push_back(e);
    return g;
}

std::vector<std::size_t> connected_components(const MemeGraph& g) {
    std::map<int, std::size_t> pos;
    for (std::size_t i = 0; i < g.nodes.size(); ++i) pos.emplace(g.nodes[i].cluster_id, i);
    DisjointSet ds(g.nodes.size());
    for (const auto& e : g.edges) ds.unite(pos.at(e.a), pos.at(e.b));
    return compact_labels(ds, g.nodes.size());
}

GraphFormat parse_graph_format(std::string_view name) {
    if (name == "graphml") return GraphFormat::GraphML;
    if (name == "dot") return GraphFormat::Dot;
    if (name == "csv") return GraphFormat::Csv;
    throw InvalidInput("unknown graph format '" + std::string(name) + "'");
}

void export_graph(std::ostream& out, const MemeGraph& g, GraphFormat format) {
    switch (format) {
    case GraphFormat::GraphML:
        out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
               "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n"
               "  <key id=\"label\" for=\"node\" attr.name=\"label\" attr.type=\"string\"/>\n"
               "  <key id=\"community\" for=\"node\" attr.name=\"community\" attr.type=\"string\"/>\n"
               "  <key id=\"size\" for=\"node\" attr.name=\"size\" attr.type=\"long\"/>\n"
               "  <key id=\"racist\" for=\"node\" attr.name=\"racist\" attr.type=\"boolean\"/>\n"
               "  <key id=\"political\" for=\"node\" attr.name=\"political\" attr.type=\"boolean\"/>\n"
               "  <key id=\"distance\" for=\"edge\" attr.name=\"distance\" attr.type=\"double\"/>\n"
               "  <graph id=\"memes\" edgedefault=\"undirected\">\n";
        for (const auto& n : g.nodes) {
            out << fmt::format("    <node id=\"c{}\">\n", n.cluster_id);
            out << fmt::format("      <data key=\"label\">{}</data>\n", xml_escape(n.attrs.label));
            out << fmt::format("      <data key=\"community\">{}</data>\n", xml_escape(n.attrs.community));
            out << fmt::format("      <data key=\"size\">{}</data>\n", n.attrs.size);
            out << fmt::format("      <data key=\"racist\">{}</data>\n", n.attrs.racist);
            out << fmt::format("      <data key=\"political\">{}</data>\n", n.attrs.political);
            out << "    </node>\n";
        }
        for (const auto& e : g.edges)
            out << fmt::format("    <edge source=\"c{}\" target=\"c{}\"><data key=\"distance\">{:.17g}</data></edge>\n",
                               e.a, e.b, e.distance);
        out << "  </graph>\n</graphml>\n";
        break;
    case GraphFormat::Dot:
        out << "graph memes {\n";
        for (const auto& n : g.nodes)
            out << fmt::format("  c{} [label=\"{}\", community=\"{}\", size={}, racist={}, political={}];\n",
                               n.cluster_id, dot_escape(n.attrs.label), dot_escape(n.attrs.community), n.attrs.size,
                               n.attrs.racist, n.attrs.political);
        for (const auto& e : g.edges) out << fmt::format("  c{} -- c{} [distance={:.17g}];\n", e.a, e.b, e.distance);
        out << "}\n";
        break;
    case GraphFormat::Csv:
        out << "kind,id,label,community,size,racist,political,source,target,distance\n";
        for (const auto& n : g.nodes)
            out << fmt::format("node,{},{},{},{},{},{},,,\n", n.cluster_id, csv_field(n.attrs.label),
                               csv_field(n.attrs.community), n.attrs.size, n.attrs.racist, n.attrs.political);
        for (const auto& e : g.edges) out << fmt::format("edge,,,,,,,{},{},{:.17g}\n", e.a, e.b, e.distance);
        break;
    }
}

MemeGraph parse_graph(std::istream& in, GraphFormat format) {
    MemeGraph g;
    auto cid_of = [](const std::string& node_id) {
        if (node_id.size() < 2 || node_id[0] != 'c') throw InvalidInput("graph: bad node id '" + node_id + "'");
        return std::stoi(node_id.substr(1));
    };
    if (format == GraphFormat::GraphML) {
        namespace pt = boost::property_tree;
        pt::ptree tree;
        try {
            pt::read_xml(in, tree);
        } catch (const pt::xml_parser_error& e) {
            throw InvalidInput(std::string("graphml: ") + e.what());
        }
        for (const auto& [tag, child] : tree.get_child("graphml.graph")) {
            if (tag == "node") {
                GraphNode n;
                n.cluster_id = cid_of(child.get<std::string>("<xmlattr>.id"));
                for (const auto& [dtag, data] : child) {
                    if (dtag != "data") continue;
                    const auto key = data.get<std::string>("<xmlattr>.key");
                    const auto val = data.get_value<std::string>();
                    if (key == "label") n.attrs.label = val;
                    else if (key == "community") n.attrs.community = val;
                    else if (key == "size") n.attrs.size = std::stoull(val);
                    else if (key == "racist") n.attrs.racist = parse_bool(val);
                    else if (key == "political") n.attrs.political = parse_bool(val);
                }
                g.nodes.push_back(std::move(n));
            } else if (tag == "edge") {
                GraphEdge e;
                e.a = cid_of(child.get<std::string>("<xmlattr>.source"));
                e.b = cid_of(child.get<std::string>("<xmlattr>.target"));
                e.distance = std::stod(child.get<std::string>("data"));
                g.edges.push_back(e);
            }
        }
        return g;
    }
    if (format == GraphFormat::Csv) {
        std::string line;
        std::getline(in, line);  // header
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const auto f = split_csv_line(line);
            if (f.size() != 10) throw InvalidInput("graph csv: expected 10 fields");
            if (f[0] == "node") {
                g.nodes.push_back({std::stoi(f[1]), {f[2], f[3], std::stoull(f[4]), parse_bool(f[5]), parse_bool(f[6])}});
            } else if (f[0] == "edge") {
                g.edges.push_back({std::stoi(f[7]), std::stoi(f[8]), std::stod(f[9])});
            } else {
                throw InvalidInput("graph csv: unknown row kind '" + f[0] + "'");
            }
        }
        return g;
    }
    throw InvalidInput("graph: parsing DOT is not supported");
}

} // namespace memetrace
