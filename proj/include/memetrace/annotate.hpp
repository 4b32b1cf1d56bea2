#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "memetrace/phash.hpp"

namespace memetrace {

enum class Category { Meme, Subculture, Culture, Event, Person, Site };

std::string_view to_string(Category c);
std::optional<Category> parse_category(std::string_view s);

struct MemeEntry {
    std::string entry_id;
    std::string name;
    std::string url;
    Category category = Category::Meme;
    std::set<std::string> tags;  // lowercase
    std::vector<PHash64> gallery;
};

using Corpus = std::vector<MemeEntry>;

/// One JSON object per line. Tags are lowercased and gallery duplicates
/// dropped; unknown categories and repeated entry_id values are line errors.
Corpus load_corpus(std::istream& in);
Corpus load_corpus(const std::filesystem::path& path);
void write_corpus(std::ostream& out, const Corpus& corpus);

/// Screenshot probabilities keyed by 16-char hash hex, read from
/// {"image": "<hex-or-path>", "p_screenshot": p} lines. Records carrying an
/// "error" field are ignored. The stream reader keeps path keys as given;
/// the file reader hashes them (relative to the score file) and drops the
/// ones that don't exist.
using ScreenshotScores = std::map<std::string, double>;
ScreenshotScores load_screenshot_scores(std::istream& in);
ScreenshotScores load_screenshot_scores(const std::filesystem::path& path);

/// Drops gallery images whose score is >= cutoff. Unscored images are kept.
Corpus filter_screenshots(const Corpus& corpus, const ScreenshotScores& scores, double cutoff);

struct EntryMatch {
    std::string entry_id;
    std::size_t matched_gallery_count = 0;
    std::size_t gallery_size = 0;
    std::uint64_t distance_sum = 0;  // over the matched gallery images

    double avg_distance() const {
        return matched_gallery_count ? static_cast<double>(distance_sum) / matched_gallery_count : 0.0;
    }
};

struct ClusterAnnotation {
    int cluster_id = 0;
    std::vector<EntryMatch> matches;  // ascending entry_id
    std::optional<std::string> representative;
};

inline constexpr int kDefaultMatchThreshold = 8;

std::vector<ClusterAnnotation> match_clusters(std::span<const std::pair<int, PHash64>> medoids, const Corpus& corpus,
                                              int theta = kDefaultMatchThreshold);

/// Highest matched/gallery proportion; ties by lower mean distance, then smallest entry_id.
std::optional<std::string> representative_entry(const ClusterAnnotation& ann);

struct TagFlags {
    bool racist = false;
    bool political = false;

    friend bool operator==(const TagFlags&, const TagFlags&) = default;
};

TagFlags tag_group(const std::set<std::string>& tags);

/// Fleiss' kappa for a subjects x categories count matrix with equal rater
/// count per subject. Returns 1 when expected agreement is already 1.
double fleiss_kappa(const std::vector<std::vector<int>>& ratings);

void write_annotations_json(std::ostream& out, std::span<const ClusterAnnotation> anns);
std::vector<ClusterAnnotation> read_annotations_json(std::istream& in);

} // namespace memetrace
