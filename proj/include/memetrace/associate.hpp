#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "memetrace/annotate.hpp"
#include "memetrace/posts.hpp"

namespace memetrace {

struct Assignment {
    std::string post_id;
    std::string community;
    int cluster_id = 0;
    HammingScore distance = 0;

    friend bool operator==(const Assignment&, const Assignment&) = default;
};

/// Nearest medoid within theta for every post image (ties: smallest
/// cluster_id); posts with no medoid in range are left out. Output follows
/// store order.
std::vector<Assignment> associate_posts(const PostStore& store, std::span<const std::pair<int, PHash64>> medoids,
                                        int theta = kDefaultMatchThreshold);

void write_assignments(std::ostream& out, std::span<const Assignment> assignments);
std::vector<Assignment> read_assignments(std::istream& in);

/// Representative entry (and its tag flags) per annotated cluster.
class AnnotationIndex {
public:
    AnnotationIndex(std::span<const ClusterAnnotation> annotations, const Corpus& corpus);
    const MemeEntry* representative(int cluster_id) const;
    TagFlags flags(int cluster_id) const;

private:
    std::map<int, const MemeEntry*> rep_;
};

enum class TagFilter { All, Racist, Political };
TagFilter parse_tag_filter(const std::string& s);
std::string_view to_string(TagFilter f);

enum class GroupBy { Entry, Category, PersonEntry, TagGroup };
GroupBy parse_group_by(const std::string& s);

struct ReportRow {
    std::string community;
    std::string key;
    std::size_t count = 0;
    double pct = 0.0;  // of the community's annotated (filter-matching, for subcommunities) posts
};

using ReportTable = std::vector<ReportRow>;

/// Rows per community ordered by count desc then key asc; top_k = 0 keeps all.
ReportTable popularity_report(std::span<const Assignment> assignments, const AnnotationIndex& index, GroupBy group_by,
                              std::size_t top_k = 0);

ReportTable subcommunity_report(const PostStore& store, std::span<const Assignment> assignments,
                                const AnnotationIndex& index, TagFilter filter, std::size_t top_k = 0);

void write_report_csv(std::ostream& out, const ReportTable& table);

struct DailyPoint {
    std::string community;
    std::string day;  // YYYY-MM-DD (UTC)
    std::size_t posts = 0;
    std::size_t meme_posts = 0;
    double pct = 0.0;
};

/// Per community and UTC day, share of that day's posts carrying a matching meme.
/// Days without posts between a community's first and last day appear with 0%.
std::vector<DailyPoint> temporal_report(const PostStore& store, std::span<const Assignment> assignments,
                                        const AnnotationIndex& index, TagFilter filter);
void write_temporal_csv(std::ostream& out, std::span<const DailyPoint> points);

struct Ecdf {
    std::vector<std::pair<double, double>> steps;  // (value, fraction <= value)
    std::size_t n = 0;
    double mean = 0.0;
    double median = 0.0;
};

Ecdf make_ecdf(std::vector<double> sample);

struct ScoreComparison {
    std::string community;
    Ecdf group;
    Ecdf complement;
};

/// For TagFilter::All the group is meme posts and the complement every other
/// scored post; otherwise both sides are meme posts split by the filter.
/// Throws UnsupportedCommunity when the community carries no scores.
ScoreComparison score_cdf(const PostStore& store, std::span<const Assignment> assignments,
                          const AnnotationIndex& index, const std::string& community, TagFilter filter);
void write_score_cdf_csv(std::ostream& out, const ScoreComparison& cmp);

} // namespace memetrace
