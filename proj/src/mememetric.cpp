#include "memetrace/mememetric.hpp"

#include <cmath>
#include <map>

#include "memetrace/errors.hpp"

namespace memetrace {

void MetricConfig::validate() const {
    if (!(tau > 0.0) || !std::isfinite(tau)) throw ConfigError("metric: tau must be positive");
    if (max_distance <= 0) throw ConfigError("metric: max must be positive");
    for (const auto* w : {&full, &partial}) {
        for (double v : {w->perceptual, w->meme, w->people, w->culture})
            if (!(v >= 0.0 && v <= 1.0)) throw ConfigError("metric: weights must lie in [0, 1]");
        if (std::abs(w->sum() - 1.0) > 1e-9) throw ConfigError("metric: weights must sum to 1");
    }
}

double r_perceptual(int d, double tau, DecayFormula formula, int max_distance) {
    if (!(tau > 0.0)) throw ConfigError("r_perceptual: tau must be positive");
    if (d < 0 || d > max_distance) throw InvalidInput("r_perceptual: distance out of range");
    if (formula == DecayFormula::ScaledLinear) return 1.0 - d / (tau * std::exp(max_distance / tau));
    return std::exp(-d / tau);
}

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
    if (a.empty() && b.empty()) return 0.0;
    std::size_t inter = 0;
    for (const auto& x : a) inter += b.contains(x);
    return static_cast<double>(inter) / static_cast<double>(a.size() + b.size() - inter);
}

double cluster_distance(const ClusterProfile& p, const ClusterProfile& q, const MetricConfig& cfg) {
    const bool full = p.annotated() && q.annotated();
    const FeatureWeights& w = full ? cfg.full : cfg.partial;
    if (std::abs(w.sum() - 1.0) > 1e-9) throw ConfigError("metric: weights must sum to 1");

    // With unit weight sum, 1 - sum w r == sum w (1 - r); the latter keeps the
    // zero-similarity terms exact.
    const double rp = r_perceptual(hamming(p.medoid, q.medoid), cfg.tau, cfg.formula, cfg.max_distance);
    double dist = w.perceptual * (1.0 - rp);
    if (full) {
        dist += w.meme * (1.0 - jaccard(p.meme_names, q.meme_names));
        dist += w.people * (1.0 - jaccard(p.people_names, q.people_names));
        dist += w.culture * (1.0 - jaccard(p.culture_names, q.culture_names));
    }
    return dist;
}

std::vector<ClusterProfile> build_profiles(std::span<const ClusterAnnotation> annotations,
                                           std::span<const std::pair<int, PHash64>> medoids, const Corpus& corpus) {
    std::map<std::string, const MemeEntry*> by_id;
    for (const auto& e : corpus) by_id.emplace(e.entry_id, &e);
    std::map<int, const ClusterAnnotation*> ann_by_cluster;
    for (const auto& a : annotations) ann_by_cluster.emplace(a.cluster_id, &a);

    std::vector<ClusterProfile> out;
    out.reserve(medoids.size());
    for (const auto& [cid, h] : medoids) {
        ClusterProfile p;
        p.cluster_id = cid;
        p.medoid = h;
        if (auto it = ann_by_cluster.find(cid); it != ann_by_cluster.end()) {
            for (const auto& m : it->second->matches) {
                auto e = by_id.find(m.entry_id);
                if (e == by_id.end()) continue;
                switch (e->second->category) {
                case Category::Meme: p.meme_names.insert(e->second->name); break;
                case Category::Person: p.people_names.insert(e->second->name); break;
                case Category::Culture:
                case Category::Subculture: p.culture_names.insert(e->second->name); break;
                default: break;
                }
            }
        }
        out.push_back(std::move(p));
    }
    return out;
}

} // namespace memetrace
