#pragma once

#include <set>
#include <span>
#include <string>
#include <vector>

#include "memetrace/annotate.hpp"
#include "memetrace/phash.hpp"

namespace memetrace {

enum class DecayFormula {
    ExpDecay,     // exp(-d / tau)
    ScaledLinear,   // 1 - d / (tau * e^(max / tau)); kept for comparison only
};

struct FeatureWeights {
    double perceptual = 0.0;
    double meme = 0.0;
    double people = 0.0;
    double culture = 0.0;

    double sum() const { return perceptual + meme + people + culture; }
};

inline constexpr FeatureWeights kFullModeWeights{0.4, 0.4, 0.1, 0.1};
inline constexpr FeatureWeights kPartialModeWeights{1.0, 0.0, 0.0, 0.0};

struct MetricConfig {
    double tau = 25.0;
    int max_distance = kMaxHamming;
    FeatureWeights full = kFullModeWeights;
    FeatureWeights partial = kPartialModeWeights;
    DecayFormula formula = DecayFormula::ExpDecay;

    /// Throws ConfigError on tau <= 0 or weights in either mode not summing to 1.
    void validate() const;
};

struct ClusterProfile {
    int cluster_id = 0;
    PHash64 medoid;
    std::set<std::string> meme_names;
    std::set<std::string> people_names;
    std::set<std::string> culture_names;  // Culture and Subculture entries

    bool annotated() const { return !meme_names.empty(); }
};

double r_perceptual(int d, double tau, DecayFormula formula = DecayFormula::ExpDecay, int max_distance = kMaxHamming);

/// |A n B| / |A u B|, 0 when both sets are empty.
double jaccard(const std::set<std::string>& a, const std::set<std::string>& b);

/// 1 - sum_f w_f r_f, full weights when both profiles are annotated and
/// partial weights otherwise.
double cluster_distance(const ClusterProfile& p, const ClusterProfile& q, const MetricConfig& cfg);

/// Profiles from every matched entry (not only the representative).
std::vector<ClusterProfile> build_profiles(std::span<const ClusterAnnotation> annotations,
                                           std::span<const std::pair<int, PHash64>> medoids, const Corpus& corpus);

} // namespace memetrace
