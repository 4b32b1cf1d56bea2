#include "memetrace/cluster.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <map>
#include <stdexcept>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "memetrace/errors.hpp"

namespace memetrace {

namespace {
constexpr int kUnassigned = -1;
}

Clustering dbscan(const NeighborList& neighbors, int min_pts, std::span<const PHash64> hashes) {
    const std::size_t n = neighbors.size();
    if (hashes.size() != n) throw InvalidInput("dbscan: hash count does not match neighbor list");
    if (min_pts < 1) throw InvalidInput("dbscan: min_pts must be >= 1");

    std::vector<char> core(n);
    for (std::size_t i = 0; i < n; ++i) core[i] = neighbors.degree(i) + 1 >= static_cast<std::size_t>(min_pts);

    // Core points: connected components over core-core edges.
    std::vector<int> label(n, kUnassigned);
    int next = 0;
    std::deque<std::uint32_t> queue;
    for (std::size_t s = 0; s < n; ++s) {
        if (!core[s] || label[s] != kUnassigned) continue;
        label[s] = next;
        queue.push_back(static_cast<std::uint32_t>(s));
        while (!queue.empty()) {
            const auto u = queue.front();
            queue.pop_front();
            for (const auto& nb : neighbors[u]) {
                if (core[nb.index] && label[nb.index] == kUnassigned) {
                    label[nb.index] = next;
                    queue.push_back(nb.index);
                }
            }
        }
        ++next;
    }

    // Border points.
    for (std::size_t i = 0; i < n; ++i) {
        if (core[i]) continue;
        std::uint32_t best = std::numeric_limits<std::uint32_t>::max();
        for (const auto& nb : neighbors[i]) {
            if (!core[nb.index]) continue;
            if (best == std::numeric_limits<std::uint32_t>::max() || hashes[nb.index] < hashes[best] ||
                (hashes[nb.index] == hashes[best] && nb.index < best))
                best = nb.index;
        }
        if (best != std::numeric_limits<std::uint32_t>::max()) label[i] = label[best];
    }

    Clustering out;
    std::vector<Cluster> raw(static_cast<std::size_t>(next));
    for (std::size_t i = 0; i < n; ++i) {
        if (label[i] == kUnassigned)
            out.noise.push_back(static_cast<std::uint32_t>(i));
        else
            raw[static_cast<std::size_t>(label[i])].members.push_back(static_cast<std::uint32_t>(i));
    }
    std::sort(raw.begin(), raw.end(),
              [](const Cluster& a, const Cluster& b) { return a.members.front() < b.members.front(); });
    for (std::size_t k = 0; k < raw.size(); ++k) {
        raw[k].id = static_cast<int>(k);
        raw[k].medoid = raw[k].members.front();
    }
    out.clusters = std::move(raw);
    return out;
}

std::uint32_t medoid(std::span<const std::uint32_t> members, std::span<const PHash64> hashes) {
    if (members.empty()) throw InvalidInput("medoid: empty member list");
    // Collapse duplicates: (hash, multiplicity, lowest index).
    std::map<PHash64, std::pair<std::uint64_t, std::uint32_t>> distinct;
    for (auto m : members) {
        auto [it, inserted] = distinct.try_emplace(hashes[m], 0, m);
        ++it->second.first;
        if (!inserted) it->second.second = std::min(it->second.second, m);
    }
    std::vector<std::pair<PHash64, std::pair<std::uint64_t, std::uint32_t>>> items(distinct.begin(), distinct.end());

    std::uint64_t best_cost = std::numeric_limits<std::uint64_t>::max();
    std::uint32_t best = items.front().second.second;
    // items ascend by hash, so the first strict minimum already honours the tie-break.
    for (const auto& [h, info] : items) {
        std::uint64_t cost = 0;
        for (const auto& [g, other] : items) {
            const std::uint64_t d = hamming(h, g);
            cost += d * d * other.first;
        }
        if (cost < best_cost) {
            best_cost = cost;
            best = info.second;
        }
    }
    return best;
}

void assign_medoids(Clustering& c, std::span<const PHash64> hashes) {
    for (auto& cl : c.clusters) cl.medoid = medoid(cl.members, hashes);
}

Clustering cluster_hashes(std::span<const PHash64> hashes, int eps, int min_pts) {
    const auto nl = pairwise_within(hashes, eps);
    auto c = dbscan(nl, min_pts, hashes);
    assign_medoids(c, hashes);
    return c;
}

std::vector<SweepRow> eps_sweep(std::span<const PHash64> hashes, std::span<const int> eps_list, int min_pts) {
    if (eps_list.empty()) throw InvalidInput("eps_sweep: empty eps list");
    const int widest = *std::max_element(eps_list.begin(), eps_list.end());
    const auto full = pairwise_within(hashes, widest);
    std::vector<SweepRow> rows;
    for (int eps : eps_list) {
        const auto c = dbscan(full.restricted(eps), min_pts, hashes);
        const double pct = hashes.empty() ? 0.0 : 100.0 * static_cast<double>(c.noise.size()) / hashes.size();
        rows.push_back({eps, c.clusters.size(), pct});
    }
    return rows;
}

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows) {
    out << "eps,clusters,noise_pct\n";
    for (const auto& r : rows) out << fmt::format("{},{},{:.4f}\n", r.eps, r.clusters, r.noise_pct);
}

void write_clustering_json(std::ostream& out, const Clustering& c, std::span<const PHash64> hashes) {
    nlohmann::ordered_json doc;
    doc["clusters"] = nlohmann::ordered_json::array();
    for (const auto& cl : c.clusters) {
        nlohmann::ordered_json rec;
        rec["id"] = cl.id;
        rec["medoid_hex"] = format_phash_hex(hashes[cl.medoid]);
        auto& members = rec["member_hexes"] = nlohmann::ordered_json::array();
        for (auto m : cl.members) members.push_back(format_phash_hex(hashes[m]));
        doc["clusters"].push_back(std::move(rec));
    }
    doc["noise_count"] = c.noise.size();
    out << doc.dump(1) << '\n';
}

std::vector<ClusterRecord> read_clustering_json(std::istream& in, std::size_t* noise_count) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInput(std::string("clustering json: ") + e.what());
    }
    std::vector<ClusterRecord> out;
    try {
        for (const auto& rec : doc.at("clusters")) {
            ClusterRecord cr{rec.at("id").get<int>(), parse_phash_hex(rec.at("medoid_hex").get<std::string>()), {}};
            for (const auto& h : rec.at("member_hexes")) cr.members.push_back(parse_phash_hex(h.get<std::string>()));
            out.push_back(std::move(cr));
        }
        if (noise_count) *noise_count = doc.at("noise_count").get<std::size_t>();
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInput(std::string("clustering json: ") + e.what());
    }
    return out;
}

} // namespace memetrace
