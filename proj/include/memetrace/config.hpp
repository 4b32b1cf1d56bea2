#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "memetrace/hawkes.hpp"
#include "memetrace/mememetric.hpp"

namespace memetrace {

/// Resolved pipeline settings. Defaults are the standard pipeline values
/// (eps 8, minPts 5, theta 8, tau 25, kappa 0.45, degree 10).
struct PipelineConfig {
    // [cluster]
    int eps = 8;
    int min_pts = 5;
    std::vector<int> sweep_eps{2, 4, 6, 8, 10};
    std::vector<std::string> seed_communities{"pol", "the_donald", "gab"};
    // [annotate]
    int theta = 8;
    double screenshot_cutoff = 0.5;
    // [metric]
    MetricConfig metric;
    // [graph]
    double kappa = 0.45;
    std::size_t degree_min = 10;
    std::vector<std::string> graph_formats{"graphml", "dot", "csv"};
    // [report]
    std::size_t top_k = 20;
    // [hawkes]
    double beta = hawkes::kDefaultBeta;
    double dmax = hawkes::kDefaultDmax;
    double time_unit_seconds = 86400.0;
    std::size_t gibbs_iters = 500;
    std::size_t gibbs_burnin = 200;
    hawkes::GammaPrior lambda0_prior;
    hawkes::GammaPrior weight_prior;
    std::size_t min_cluster_events = 2;
    std::vector<std::string> communities;  // Hawkes process order; empty = sorted distinct
    // [paths], relative paths resolve against the config file's directory
    std::filesystem::path images_manifest;
    std::filesystem::path posts;
    std::filesystem::path corpus;
    std::filesystem::path screenshot_scores;
    std::filesystem::path ratings;
    // [run]
    std::uint64_t seed = 1;
    unsigned threads = 0;
    bool strict = true;

    /// Throws ConfigError on any out-of-range value.
    void validate() const;
};

PipelineConfig load_config(const std::filesystem::path& path);
PipelineConfig parse_config(std::istream& in, const std::filesystem::path& base_dir = {});
/// Deterministic INI rendering of every key except run.threads, which never
/// changes results; parse_config(write_config(c)) == c up to threads.
void write_config(std::ostream& out, const PipelineConfig& cfg);

} // namespace memetrace
