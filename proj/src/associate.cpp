#include "memetrace/associate.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <set>
#include <unordered_map>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "memetrace/errors.hpp"
#include "memetrace/simdist.hpp"

namespace memetrace {

namespace {

constexpr std::int64_t kSecondsPerDay = 86400;

std::int64_t day_index(std::int64_t ts) {
    return ts >= 0 ? ts / kSecondsPerDay : -((-ts + kSecondsPerDay - 1) / kSecondsPerDay);
}

std::string day_string(std::int64_t day) {
    const std::chrono::sys_days d{std::chrono::days{day}};
    const std::chrono::year_month_day ymd{d};
    return fmt::format("{:04d}-{:02d}-{:02d}", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                       static_cast<unsigned>(ymd.day()));
}

bool passes(TagFilter filter, const TagFlags& f) {
    switch (filter) {
    case TagFilter::All: return true;
    case TagFilter::Racist: return f.racist;
    case TagFilter::Political: return f.political;
    }
    return false;
}

double pct_of(std::size_t part, std::size_t whole) {
    return whole ? 100.0 * static_cast<double>(part) / static_cast<double>(whole) : 0.0;
}

ReportTable rank_rows(const std::map<std::string, std::map<std::string, std::size_t>>& counts,
                      const std::map<std::string, std::size_t>& totals, std::size_t top_k) {
    ReportTable out;
    for (const auto& [community, keys] : counts) {
        std::vector<std::pair<std::string, std::size_t>> rows(keys.begin(), keys.end());
        std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
            return a.second != b.second ? a.second > b.second : a.first < b.first;
        });
        if (top_k && rows.size() > top_k) rows.resize(top_k);
        const std::size_t total = totals.at(community);
        for (auto& [key, count] : rows) out.push_back({community, key, count, pct_of(count, total)});
    }
    return out;
}

} // namespace

std::vector<Assignment> associate_posts(const PostStore& store, std::span<const std::pair<int, PHash64>> medoids,
                                        int theta) {
    std::vector<PHash64> distinct = store.unique_hashes();
    std::vector<PHash64> refs;
    refs.reserve(medoids.size());
    for (const auto& [cid, h] : medoids) refs.push_back(h);

    const auto matches = pairwise_cross(distinct, refs, theta);
    constexpr auto kNone = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> best(distinct.size(), kNone);
    std::vector<HammingScore> best_d(distinct.size(), 0);
    for (const auto& m : matches) {
        auto& b = best[m.query];
        if (b == kNone || m.distance < best_d[m.query] ||
            (m.distance == best_d[m.query] && medoids[m.ref].first < medoids[b].first)) {
            b = m.ref;
            best_d[m.query] = m.distance;
        }
    }

    std::vector<Assignment> out;
    for (const auto& p : store.posts()) {
        const auto q = static_cast<std::size_t>(std::lower_bound(distinct.begin(), distinct.end(), p.hash) - distinct.begin());
        if (best[q] == kNone) continue;
        out.push_back({p.id, p.community, medoids[best[q]].first, best_d[q]});
    }
    return out;
}

void write_assignments(std::ostream& out, std::span<const Assignment> assignments) {
    for (const auto& a : assignments) {
        nlohmann::ordered_json obj;
        obj["post_id"] = a.post_id;
        obj["community"] = a.community;
        obj["cluster_id"] = a.cluster_id;
        obj["distance"] = a.distance;
        out << obj.dump() << '\n';
    }
}

std::vector<Assignment> read_assignments(std::istream& in) {
    std::vector<Assignment> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const auto obj = nlohmann::json::parse(line);
            const int d = obj.at("distance").get<int>();
            if (d < 0 || d > kMaxHamming) throw LineError(lineno, "distance out of range");
            out.push_back({obj.at("post_id").get<std::string>(), obj.at("community").get<std::string>(),
                           obj.at("cluster_id").get<int>(), static_cast<HammingScore>(d)});
        } catch (const nlohmann::json::exception& e) {
            throw LineError(lineno, e.what());
        }
    }
    return out;
}

AnnotationIndex::AnnotationIndex(std::span<const ClusterAnnotation> annotations, const Corpus& corpus) {
    std::map<std::string, const MemeEntry*> by_id;
    for (const auto& e : corpus) by_id.emplace(e.entry_id, &e);
    for (const auto& a : annotations) {
        if (!a.representative) continue;
        if (auto it = by_id.find(*a.representative); it != by_id.end()) rep_[a.cluster_id] = it->second;
    }
}

const MemeEntry* AnnotationIndex::representative(int cluster_id) const {
    auto it = rep_.find(cluster_id);
    return it == rep_.end() ? nullptr : it->second;
}

TagFlags AnnotationIndex::flags(int cluster_id) const {
    const auto* e = representative(cluster_id);
    return e ? tag_group(e->tags) : TagFlags{};
}

TagFilter parse_tag_filter(const std::string& s) {
    if (s == "all") return TagFilter::All;
    if (s == "racist") return TagFilter::Racist;
    if (s == "political") return TagFilter::Political;
    throw InvalidInput("unknown filter '" + s + "' (expected all|racist|political)");
}

std::string_view to_string(TagFilter f) {
    switch (f) {
    case TagFilter::All: return "all";
    case TagFilter::Racist: return "racist";
    case TagFilter::Political: return "political";
    }
    return "all";
}

GroupBy parse_group_by(const std::string& s) {
    if (s == "entry") return GroupBy::Entry;
    if (s == "category") return GroupBy::Category;
    if (s == "person") return GroupBy::PersonEntry;
    if (s == "tag") return GroupBy::TagGroup;
    throw InvalidInput("unknown grouping '" + s + "' (expected entry|category|person|tag)");
}

ReportTable popularity_report(std::span<const Assignment> assignments, const AnnotationIndex& index, GroupBy group_by,
                              std::size_t top_k) {
    std::map<std::string, std::map<std::string, std::size_t>> counts;
    std::map<std::string, std::size_t> totals;
    for (const auto& a : assignments) {
        const MemeEntry* e = index.representative(a.cluster_id);
        if (!e) continue;
        ++totals[a.community];
        switch (group_by) {
        case GroupBy::Entry: ++counts[a.community][e->name]; break;
        case GroupBy::Category: ++counts[a.community][std::string(to_string(e->category))]; break;
        case GroupBy::PersonEntry:
            if (e->category == Category::Person) ++counts[a.community][e->name];
            break;
        case GroupBy::TagGroup: {
            const auto f = tag_group(e->tags);
            if (f.racist) ++counts[a.community]["racist"];
            if (f.political) ++counts[a.community]["political"];
            if (!f.racist && !f.political) ++counts[a.community]["other"];
            break;
        }
        }
    }
    return rank_rows(counts, totals, top_k);
}

ReportTable subcommunity_report(const PostStore& store, std::span<const Assignment> assignments,
                                const AnnotationIndex& index, TagFilter filter, std::size_t top_k) {
    std::map<std::string, std::map<std::string, std::size_t>> counts;
    std::map<std::string, std::size_t> totals;
    for (const auto& a : assignments) {
        if (!index.representative(a.cluster_id) || !passes(filter, index.flags(a.cluster_id))) continue;
        const Post* p = store.find(a.community, a.post_id);
        if (!p) continue;
        ++totals[a.community];
        ++counts[a.community][p->subcommunity.value_or("(none)")];
    }
    return rank_rows(counts, totals, top_k);
}

void write_report_csv(std::ostream& out, const ReportTable& table) {
    out << "community,key,count,pct\n";
    for (const auto& r : table) {
        std::string key = r.key;
        if (key.find_first_of(",\"") != std::string::npos) {
            std::string q = "\"";
            for (char c : key) {
                if (c == '"') q += '"';
                q += c;
            }
            key = q + "\"";
        }
        out << fmt::format("{},{},{},{:.4f}\n", r.community, key, r.count, r.pct);
    }
}

std::vector<DailyPoint> temporal_report(const PostStore& store, std::span<const Assignment> assignments,
                                        const AnnotationIndex& index, TagFilter filter) {
    std::set<std::pair<std::string, std::string>> meme_posts;
    for (const auto& a : assignments)
        if (index.representative(a.cluster_id) && passes(filter, index.flags(a.cluster_id)))
            meme_posts.emplace(a.community, a.post_id);

    std::map<std::string, std::map<std::int64_t, std::pair<std::size_t, std::size_t>>> days;
    for (const auto& p : store.posts()) {
        auto& cell = days[p.community][day_index(p.timestamp)];
        ++cell.first;
        if (meme_posts.contains({p.community, p.id})) ++cell.second;
    }

    std::vector<DailyPoint> out;
    for (const auto& [community, series] : days) {
        const auto first = series.begin()->first, last = series.rbegin()->first;
        for (auto d = first; d <= last; ++d) {
            DailyPoint pt{community, day_string(d), 0, 0, 0.0};
            if (auto it = series.find(d); it != series.end()) {
                pt.posts = it->second.first;
                pt.meme_posts = it->second.second;
                pt.pct = pct_of(pt.meme_posts, pt.posts);
            }
            out.push_back(std::move(pt));
        }
    }
    return out;
}

void write_temporal_csv(std::ostream& out, std::span<const DailyPoint> points) {
    out << "community,day,posts,meme_posts,pct\n";
    for (const auto& p : points)
        out << fmt::format("{},{},{},{},{:.4f}\n", p.community, p.day, p.posts, p.meme_posts, p.pct);
}

Ecdf make_ecdf(std::vector<double> sample) {
    Ecdf e;
    e.n = sample.size();
    if (sample.empty()) return e;
    std::sort(sample.begin(), sample.end());
    double sum = 0.0;
    for (double v : sample) sum += v;
    e.mean = sum / static_cast<double>(e.n);
    e.median = e.n % 2 ? sample[e.n / 2] : 0.5 * (sample[e.n / 2 - 1] + sample[e.n / 2]);
    for (std::size_t i = 0; i < e.n; ++i) {
        if (i + 1 < e.n && sample[i + 1] == sample[i]) continue;
        e.steps.emplace_back(sample[i], static_cast<double>(i + 1) / static_cast<double>(e.n));
    }
    return e;
}

ScoreComparison score_cdf(const PostStore& store, std::span<const Assignment> assignments,
                          const AnnotationIndex& index, const std::string& community, TagFilter filter) {
    std::map<std::string, int> cluster_of;
    for (const auto& a : assignments)
        if (a.community == community && index.representative(a.cluster_id)) cluster_of[a.post_id] = a.cluster_id;

    std::vector<double> group, complement;
    bool any_score = false;
    for (const auto& p : store.posts()) {
        if (p.community != community || !p.score) continue;
        any_score = true;
        const double s = static_cast<double>(*p.score);
        auto it = cluster_of.find(p.id);
        if (filter == TagFilter::All) {
            (it != cluster_of.end() ? group : complement).push_back(s);
        } else if (it != cluster_of.end()) {
            (passes(filter, index.flags(it->second)) ? group : complement).push_back(s);
        }
    }
    if (!any_score) throw UnsupportedCommunity("community '" + community + "' has no post scores");
    return {community, make_ecdf(std::move(group)), make_ecdf(std::move(complement))};
}

void write_score_cdf_csv(std::ostream& out, const ScoreComparison& cmp) {
    out << "community,side,n,mean,median\n";
    out << fmt::format("{},group,{},{:.6f},{:.6f}\n", cmp.community, cmp.group.n, cmp.group.mean, cmp.group.median);
    out << fmt::format("{},complement,{},{:.6f},{:.6f}\n", cmp.community, cmp.complement.n, cmp.complement.mean,
                       cmp.complement.median);
    out << "side,score,cdf\n";
    for (const auto& [v, f] : cmp.group.steps) out << fmt::format("group,{:.17g},{:.17g}\n", v, f);
    for (const auto& [v, f] : cmp.complement.steps) out << fmt::format("complement,{:.17g},{:.17g}\n", v, f);
}

} // namespace memetrace
