#include "memetrace/annotate.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "memetrace/errors.hpp"
#include "memetrace/image_io.hpp"
#include "memetrace/simdist.hpp"

namespace memetrace {

using nlohmann::json;

namespace {

constexpr std::array<std::pair<Category, std::string_view>, 6> kCategoryNames{{
    {Category::Meme, "Meme"},
    {Category::Subculture, "Subculture"},
    {Category::Culture, "Culture"},
    {Category::Event, "Event"},
    {Category::Person, "Person"},
    {Category::Site, "Site"},
}};

std::string lowercase(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

MemeEntry parse_entry(const std::string& line) {
    json obj;
    try {
        obj = json::parse(line);
    } catch (const json::parse_error&) {
        throw InvalidInput("malformed JSON");
    }
    MemeEntry e;
    try {
        e.entry_id = obj.at("entry_id").get<std::string>();
        e.name = obj.at("name").get<std::string>();
        e.url = obj.value("url", std::string{});
        const auto cat = obj.at("category").get<std::string>();
        auto parsed = parse_category(cat);
        if (!parsed) throw InvalidInput("unknown category '" + cat + "'");
        e.category = *parsed;
        if (auto it = obj.find("tags"); it != obj.end())
            for (const auto& t : *it) e.tags.insert(lowercase(t.get<std::string>()));
        std::unordered_set<PHash64> seen;
        for (const auto& h : obj.at("gallery")) {
            const PHash64 ph = parse_phash_hex(h.get<std::string>());
            if (seen.insert(ph).second) e.gallery.push_back(ph);
        }
    } catch (const json::exception& ex) {
        throw InvalidInput(std::string("bad entry: ") + ex.what());
    }
    return e;
}

} // namespace

std::string_view to_string(Category c) {
    for (const auto& [k, name] : kCategoryNames)
        if (k == c) return name;
    return "Meme";
}

std::optional<Category> parse_category(std::string_view s) {
    for (const auto& [k, name] : kCategoryNames)
        if (name == s) return k;
    return std::nullopt;
}

Corpus load_corpus(std::istream& in) {
    Corpus corpus;
    std::unordered_set<std::string> ids;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        MemeEntry e;
        try {
            e = parse_entry(line);
        } catch (const InvalidInput& ex) {
            throw LineError(lineno, ex.what());
        }
        if (!ids.insert(e.entry_id).second) throw LineError(lineno, "duplicate entry_id '" + e.entry_id + "'");
        corpus.push_back(std::move(e));
    }
    return corpus;
}

Corpus load_corpus(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open corpus " + path.string());
    return load_corpus(in);
}

void write_corpus(std::ostream& out, const Corpus& corpus) {
    for (const auto& e : corpus) {
        nlohmann::ordered_json obj;
        obj["entry_id"] = e.entry_id;
        obj["name"] = e.name;
        obj["url"] = e.url;
        obj["category"] = to_string(e.category);
        obj["tags"] = e.tags;
        auto& g = obj["gallery"] = nlohmann::ordered_json::array();
        for (auto h : e.gallery) g.push_back(format_phash_hex(h));
        out << obj.dump() << '\n';
    }
}

ScreenshotScores load_screenshot_scores(std::istream& in) {
    ScreenshotScores scores;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const json obj = json::parse(line);
            if (obj.contains("error")) continue;
            const double p = obj.at("p_screenshot").get<double>();
            if (!(p >= 0.0 && p <= 1.0)) throw LineError(lineno, "p_screenshot outside [0, 1]");
            auto key = obj.at("image").get<std::string>();
            if (try_parse_phash_hex(key)) key = lowercase(key);
            scores[key] = p;
        } catch (const json::exception& ex) {
            throw LineError(lineno, ex.what());
        }
    }
    return scores;
}

ScreenshotScores load_screenshot_scores(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open screenshot scores " + path.string());
    const auto raw = load_screenshot_scores(in);
    // Records keyed by image path get their hash computed here.
    ScreenshotScores out;
    for (const auto& [key, p] : raw) {
        if (try_parse_phash_hex(key)) {
            out[key] = p;
            continue;
        }
        std::filesystem::path img(key);
        if (img.is_relative()) img = path.parent_path() / img;
        if (!std::filesystem::exists(img)) continue;
        out[format_phash_hex(compute_phash(read_image(img)))] = p;
    }
    return out;
}

Corpus filter_screenshots(const Corpus& corpus, const ScreenshotScores& scores, double cutoff) {
    Corpus out = corpus;
    for (auto& e : out) {
        std::erase_if(e.gallery, [&](PHash64 h) {
            auto it = scores.find(format_phash_hex(h));
            return it != scores.end() && it->second >= cutoff;
        });
    }
    return out;
}

std::vector<ClusterAnnotation> match_clusters(std::span<const std::pair<int, PHash64>> medoids, const Corpus& corpus,
                                              int theta) {
    std::vector<PHash64> refs;
    std::vector<std::uint32_t> owner;
    for (std::uint32_t e = 0; e < corpus.size(); ++e)
        for (auto h : corpus[e].gallery) {
            refs.push_back(h);
            owner.push_back(e);
        }
    std::vector<PHash64> queries;
    queries.reserve(medoids.size());
    for (const auto& [id, h] : medoids) queries.push_back(h);

    const auto matches = pairwise_cross(queries, refs, theta);

    std::vector<ClusterAnnotation> out(medoids.size());
    std::vector<std::map<std::uint32_t, EntryMatch>> per(medoids.size());
    for (const auto& m : matches) {
        const auto e = owner[m.ref];
        auto& em = per[m.query][e];
        em.matched_gallery_count += 1;
        em.distance_sum += m.distance;
    }
    for (std::size_t q = 0; q < medoids.size(); ++q) {
        out[q].cluster_id = medoids[q].first;
        for (auto& [e, em] : per[q]) {
            em.entry_id = corpus[e].entry_id;
            em.gallery_size = corpus[e].gallery.size();
            out[q].matches.push_back(std::move(em));
        }
        std::sort(out[q].matches.begin(), out[q].matches.end(),
                  [](const EntryMatch& a, const EntryMatch& b) { return a.entry_id < b.entry_id; });
        out[q].representative = representative_entry(out[q]);
    }
    return out;
}

std::optional<std::string> representative_entry(const ClusterAnnotation& ann) {
    const EntryMatch* best = nullptr;
    for (const auto& m : ann.matches) {
        if (m.gallery_size == 0 || m.matched_gallery_count == 0) continue;
        if (!best) {
            best = &m;
            continue;
        }
        // Exact rational comparisons: count/size, then sum/count.
        const auto lhs = static_cast<unsigned __int128>(m.matched_gallery_count) * best->gallery_size;
        const auto rhs = static_cast<unsigned __int128>(best->matched_gallery_count) * m.gallery_size;
        if (lhs != rhs) {
            if (lhs > rhs) best = &m;
            continue;
        }
        const auto dl = static_cast<unsigned __int128>(m.distance_sum) * best->matched_gallery_count;
        const auto dr = static_cast<unsigned __int128>(best->distance_sum) * m.matched_gallery_count;
        if (dl != dr) {
            if (dl < dr) best = &m;
            continue;
        }
        if (m.entry_id < best->entry_id) best = &m;
    }
    if (!best) return std::nullopt;
    return best->entry_id;
}

TagFlags tag_group(const std::set<std::string>& tags) {
    static const std::set<std::string> kPolitical{"politics", "2016 us presidential election", "presidential election",
                                                  "trump", "clinton"};
    static const std::set<std::string> kRacist{"racism", "racist", "antisemitism"};
    TagFlags f;
    for (const auto& t : tags) {
        if (kPolitical.contains(t)) f.political = true;
        if (kRacist.contains(t)) f.racist = true;
    }
    return f;
}

double fleiss_kappa(const std::vector<std::vector<int>>& ratings) {
    if (ratings.empty()) throw InvalidInput("fleiss_kappa: no subjects");
    const std::size_t k = ratings.front().size();
    if (k == 0) throw InvalidInput("fleiss_kappa: no categories");
    long raters = -1;
    for (const auto& row : ratings) {
        if (row.size() != k) throw InvalidInput("fleiss_kappa: ragged rating matrix");
        long sum = 0;
        for (int v : row) {
            if (v < 0) throw InvalidInput("fleiss_kappa: negative count");
            sum += v;
        }
        if (raters < 0) raters = sum;
        if (sum != raters) throw InvalidInput("fleiss_kappa: rows must sum to the same rater count");
    }
    if (raters < 2) throw InvalidInput("fleiss_kappa: need at least two raters");

    const double n = static_cast<double>(raters);
    const double subjects = static_cast<double>(ratings.size());
    std::vector<double> col(k, 0.0);
    double p_bar = 0.0;
    for (const auto& row : ratings) {
        double agree = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            agree += static_cast<double>(row[j]) * (row[j] - 1);
            col[j] += row[j];
        }
        p_bar += agree / (n * (n - 1));
    }
    p_bar /= subjects;
    double p_e = 0.0;
    for (double c : col) {
        const double pj = c / (subjects * n);
        p_e += pj * pj;
    }
    if (p_e >= 1.0) return 1.0;
    return (p_bar - p_e) / (1.0 - p_e);
}

void write_annotations_json(std::ostream& out, std::span<const ClusterAnnotation> anns) {
    nlohmann::ordered_json doc = nlohmann::ordered_json::array();
    for (const auto& a : anns) {
        nlohmann::ordered_json rec;
        rec["cluster_id"] = a.cluster_id;
        auto& ms = rec["matches"] = nlohmann::ordered_json::array();
        for (const auto& m : a.matches) {
            nlohmann::ordered_json mj;
            mj["entry_id"] = m.entry_id;
            mj["matched_gallery_count"] = m.matched_gallery_count;
            mj["gallery_size"] = m.gallery_size;
            mj["avg_distance"] = m.avg_distance();
            mj["distance_sum"] = m.distance_sum;
            ms.push_back(std::move(mj));
        }
        rec["representative"] = a.representative ? nlohmann::ordered_json(*a.representative) : nlohmann::ordered_json(nullptr);
        doc.push_back(std::move(rec));
    }
    out << doc.dump(1) << '\n';
}

std::vector<ClusterAnnotation> read_annotations_json(std::istream& in) {
    std::vector<ClusterAnnotation> out;
    try {
        const json doc = json::parse(in);
        for (const auto& rec : doc) {
            ClusterAnnotation a;
            a.cluster_id = rec.at("cluster_id").get<int>();
            for (const auto& mj : rec.at("matches")) {
                EntryMatch m;
                m.entry_id = mj.at("entry_id").get<std::string>();
                m.matched_gallery_count = mj.at("matched_gallery_count").get<std::size_t>();
                m.gallery_size = mj.at("gallery_size").get<std::size_t>();
                m.distance_sum = mj.at("distance_sum").get<std::uint64_t>();
                a.matches.push_back(std::move(m));
            }
            if (!rec.at("representative").is_null()) a.representative = rec.at("representative").get<std::string>();
            out.push_back(std::move(a));
        }
    } catch (const json::exception& e) {
        throw InvalidInput(std::string("annotations json: ") + e.what());
    }
    return out;
}

} // namespace memetrace
