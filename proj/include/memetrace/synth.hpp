#pragma once

#include <cstdint>
#include <filesystem>

namespace memetrace {

struct SynthOptions {
    std::size_t templates = 8;
    std::size_t variants_per_template = 20;
    std::size_t noise_images = 40;
    int width = 64;
    int height = 64;
    std::int64_t start_timestamp = 1467331200;  // 2016-07-01T00:00:00Z
    int days = 30;
    std::uint64_t seed = 7;
};

/// Writes a self-contained demo corpus under `dir`:
///   images/*.png, manifest.jsonl (posts without hashes), corpus.jsonl,
///   screenshot_scores.jsonl, ratings.csv, config.ini (paths wired up).
/// Output bytes are a pure function of the options.
void write_synthetic_corpus(const std::filesystem::path& dir, const SynthOptions& opts = {});

} // namespace memetrace
