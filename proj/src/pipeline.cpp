#include "memetrace/pipeline.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "memetrace/annotate.hpp"
#include "memetrace/associate.hpp"
#include "memetrace/cluster.hpp"
#include "memetrace/errors.hpp"
#include "memetrace/hawkes.hpp"
#include "memetrace/image_io.hpp"
#include "memetrace/ks.hpp"
#include "memetrace/memegraph.hpp"
#include "memetrace/parallel.hpp"
#include "memetrace/posts.hpp"
#include "memetrace/simdist.hpp"

namespace memetrace {

namespace fs = std::filesystem;

namespace {

constexpr const char* kPosts = "posts.jsonl";
constexpr const char* kSeedHashes = "seed_hashes.txt";
constexpr const char* kNeighbors = "neighbors.bin";
constexpr const char* kClusters = "clusters.json";
constexpr const char* kSweep = "sweep.csv";
constexpr const char* kAnnotations = "annotations.json";
constexpr const char* kDendrogram = "dendrogram.csv";
constexpr const char* kAssignments = "assignments.jsonl";
constexpr const char* kEvents = "events.jsonl";
constexpr const char* kModels = "hawkes_models.json";
constexpr const char* kSimEvents = "simulated_events.jsonl";
constexpr const char* kKappa = "kappa.txt";
constexpr const char* kResolvedConfig = "config.resolved.ini";
constexpr const char* kManifest = "manifest.json";

fs::path need(const RunContext& ctx, const char* artifact, const char* producer) {
    fs::path p = ctx.run_dir / artifact;
    if (!fs::exists(p)) throw MissingArtifact(artifact, producer);
    return p;
}

fs::path need_config_path(const fs::path& p, const char* key) {
    if (p.empty()) throw ConfigError(fmt::format("config: '{}' is required for this stage", key));
    if (!fs::exists(p)) throw InvalidInput(fmt::format("input '{}' not found: {}", key, p.string()));
    return p;
}

std::ifstream open_in(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw InvalidInput("cannot open " + p.string());
    return in;
}

class OutFile {
public:
    explicit OutFile(const fs::path& p) : out_(p, std::ios::binary | std::ios::trunc) {
        if (!out_) throw InvalidInput("cannot write " + p.string());
    }
    std::ofstream& operator*() { return out_; }

private:
    std::ofstream out_;
};

PostStore load_run_posts(const RunContext& ctx) {
    IngestOptions opts;
    opts.strict = ctx.config.strict;
    return ingest_posts(need(ctx, kPosts, "hash"), opts);
}

std::vector<PHash64> load_seed_hashes(const RunContext& ctx) {
    auto in = open_in(need(ctx, kSeedHashes, "pairwise"));
    std::vector<PHash64> out;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) out.push_back(parse_phash_hex(line));
    return out;
}

std::vector<ClusterRecord> load_clusters(const RunContext& ctx) {
    auto in = open_in(need(ctx, kClusters, "cluster"));
    return read_clustering_json(in);
}

std::vector<ClusterAnnotation> load_annotations(const RunContext& ctx) {
    auto in = open_in(need(ctx, kAnnotations, "annotate"));
    return read_annotations_json(in);
}

Corpus load_run_corpus(const RunContext& ctx) {
    Corpus corpus = load_corpus(need_config_path(ctx.config.corpus, "paths.corpus"));
    if (!ctx.config.screenshot_scores.empty()) {
        const auto scores = load_screenshot_scores(need_config_path(ctx.config.screenshot_scores, "paths.screenshot_scores"));
        corpus = filter_screenshots(corpus, scores, ctx.config.screenshot_cutoff);
    }
    return corpus;
}

std::vector<std::pair<int, PHash64>> medoids_of(const std::vector<ClusterRecord>& clusters) {
    std::vector<std::pair<int, PHash64>> out;
    for (const auto& c : clusters) out.emplace_back(c.id, c.medoid);
    return out;
}

std::vector<std::pair<int, PHash64>> annotated_medoids(const std::vector<ClusterRecord>& clusters,
                                                       const std::vector<ClusterAnnotation>& anns) {
    std::set<int> annotated;
    for (const auto& a : anns)
        if (a.representative) annotated.insert(a.cluster_id);
    std::vector<std::pair<int, PHash64>> out;
    for (const auto& c : clusters)
        if (annotated.contains(c.id)) out.emplace_back(c.id, c.medoid);
    return out;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// ---- stages ---------------------------------------------------------------

void stage_hash(const RunContext& ctx) {
    const auto& cfg = ctx.config;
    std::vector<Post> posts;
    if (!cfg.images_manifest.empty()) {
        const fs::path manifest = need_config_path(cfg.images_manifest, "paths.images_manifest");
        const fs::path base = manifest.parent_path();
        struct Pending {
            std::size_t line;
            Post post;
            fs::path image;
            std::string error;
        };
        std::vector<Pending> pending;
        auto in = open_in(manifest);
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            try {
                const auto obj = nlohmann::json::parse(line);
                Pending p{lineno, {}, {}, {}};
                p.post.id = obj.at("id").is_string() ? obj.at("id").get<std::string>() : obj.at("id").dump();
                p.post.community = obj.at("community").get<std::string>();
                p.post.timestamp = obj.at("timestamp").get<std::int64_t>();
                if (obj.contains("score") && !obj["score"].is_null()) p.post.score = obj["score"].get<std::int64_t>();
                if (obj.contains("subcommunity") && !obj["subcommunity"].is_null())
                    p.post.subcommunity = obj["subcommunity"].get<std::string>();
                fs::path img = obj.at("image").get<std::string>();
                p.image = img.is_absolute() ? img : base / img;
                pending.push_back(std::move(p));
            } catch (const nlohmann::json::exception& e) {
                if (cfg.strict) throw LineError(lineno, e.what());
                std::cerr << fmt::format("hash: skipping line {}: {}\n", lineno, e.what());
            }
        }
        parallel_for(pending.size(), [&](std::size_t i) {
            try {
                pending[i].post.hash = compute_phash(read_image(pending[i].image));
            } catch (const Error& e) {
                pending[i].error = e.what();
            }
        });
        PostStore store;
        for (auto& p : pending) {
            if (!p.error.empty()) {
                if (cfg.strict) throw LineError(p.line, p.error);
                std::cerr << fmt::format("hash: skipping line {}: {}\n", p.line, p.error);
                continue;
            }
            store.add(std::move(p.post));
        }
        posts = store.posts();
    } else if (!cfg.posts.empty()) {
        IngestOptions opts;
        opts.strict = cfg.strict;
        const auto store = ingest_posts(need_config_path(cfg.posts, "paths.posts"), opts);
        for (const auto& s : store.skipped()) std::cerr << fmt::format("hash: skipped line {}: {}\n", s.line, s.reason);
        posts = store.posts();
    } else {
        throw ConfigError("config: hash stage needs paths.images_manifest or paths.posts");
    }
    OutFile out(ctx.run_dir / kPosts);
    write_posts(*out, posts);
}

void stage_pairwise(const RunContext& ctx) {
    const auto store = load_run_posts(ctx);
    const auto hashes = store.unique_hashes(ctx.config.seed_communities);
    {
        OutFile out(ctx.run_dir / kSeedHashes);
        for (auto h : hashes) *out << format_phash_hex(h) << '\n';
    }
    const auto nl = pairwise_within(hashes, ctx.config.eps);
    OutFile out(ctx.run_dir / kNeighbors);
    write_neighbor_spill(*out, nl);
}

void stage_cluster(const RunContext& ctx) {
    const fs::path spill = need(ctx, kNeighbors, "pairwise");
    const auto hashes = load_seed_hashes(ctx);
    auto in = open_in(spill);
    auto nl = read_neighbor_spill(in);
    if (nl.size() != hashes.size()) throw InvalidInput("neighbors.bin does not match seed_hashes.txt");
    if (nl.threshold() < ctx.config.eps)
        throw InvalidInput("neighbors.bin was built with a smaller eps; rerun 'pairwise'");
    if (nl.threshold() > ctx.config.eps) nl = nl.restricted(ctx.config.eps);
    auto c = dbscan(nl, ctx.config.min_pts, hashes);
    assign_medoids(c, hashes);
    OutFile out(ctx.run_dir / kClusters);
    write_clustering_json(*out, c, hashes);
}

void stage_sweep(const RunContext& ctx) {
    const auto hashes = load_seed_hashes(ctx);
    const auto rows = eps_sweep(hashes, ctx.config.sweep_eps, ctx.config.min_pts);
    OutFile out(ctx.run_dir / kSweep);
    write_sweep_csv(*out, rows);
}

void stage_annotate(const RunContext& ctx) {
    const auto clusters = load_clusters(ctx);
    const Corpus corpus = load_run_corpus(ctx);
    const auto medoids = medoids_of(clusters);
    const auto anns = match_clusters(medoids, corpus, ctx.config.theta);
    OutFile out(ctx.run_dir / kAnnotations);
    write_annotations_json(*out, anns);
}

struct AnnotatedSet {
    std::vector<ClusterProfile> profiles;
    std::map<int, NodeLabel> labels;
};

AnnotatedSet annotated_profiles(const RunContext& ctx, bool with_labels) {
    const auto clusters = load_clusters(ctx);
    const auto anns = load_annotations(ctx);
    const Corpus corpus = load_run_corpus(ctx);
    const auto medoids = annotated_medoids(clusters, anns);

    AnnotatedSet set;
    set.profiles = build_profiles(anns, medoids, corpus);
    if (!with_labels) return set;

    const auto store = load_run_posts(ctx);
    std::map<PHash64, std::pair<std::int64_t, std::string>> first_seen;
    for (const auto& p : store.posts()) {
        auto [it, inserted] = first_seen.try_emplace(p.hash, p.timestamp, p.community);
        if (!inserted && std::make_pair(p.timestamp, p.community) < it->second) it->second = {p.timestamp, p.community};
    }
    const AnnotationIndex index(anns, corpus);
    for (const auto& c : clusters) {
        const MemeEntry* rep = index.representative(c.id);
        if (!rep) continue;
        NodeLabel label;
        label.label = rep->name;
        label.size = c.members.size();
        std::pair<std::int64_t, std::string> origin{INT64_MAX, ""};
        for (auto h : c.members)
            if (auto it = first_seen.find(h); it != first_seen.end()) origin = std::min(origin, it->second);
        label.community = origin.second;
        const auto flags = tag_group(rep->tags);
        label.racist = flags.racist;
        label.political = flags.political;
        set.labels.emplace(c.id, std::move(label));
    }
    return set;
}

void stage_metric_graph(const RunContext& ctx) {
    const auto set = annotated_profiles(ctx, true);
    const auto g = build_graph(set.profiles, set.labels, ctx.config.metric, ctx.config.kappa, ctx.config.degree_min);
    for (const auto& f : ctx.config.graph_formats) {
        OutFile out(ctx.run_dir / ("graph." + f));
        export_graph(*out, g, parse_graph_format(f));
    }
}

void stage_dendrogram(const RunContext& ctx) {
    const auto set = annotated_profiles(ctx, false);
    OutFile out(ctx.run_dir / kDendrogram);
    if (set.profiles.size() < 2) {
        write_dendrogram_csv(*out, Dendrogram{});
        return;
    }
    write_dendrogram_csv(*out, linkage(set.profiles, ctx.config.metric));
}

void stage_associate(const RunContext& ctx) {
    const auto store = load_run_posts(ctx);
    const auto clusters = load_clusters(ctx);
    const auto anns = load_annotations(ctx);
    const auto assignments = associate_posts(store, annotated_medoids(clusters, anns), ctx.config.theta);
    OutFile out(ctx.run_dir / kAssignments);
    write_assignments(*out, assignments);
}

std::vector<Assignment> load_run_assignments(const RunContext& ctx) {
    auto in = open_in(need(ctx, kAssignments, "associate"));
    return read_assignments(in);
}

void stage_report(const RunContext& ctx) {
    const auto store = load_run_posts(ctx);
    const auto assignments = load_run_assignments(ctx);
    const auto anns = load_annotations(ctx);
    const Corpus corpus = load_run_corpus(ctx);
    const AnnotationIndex index(anns, corpus);
    const auto k = ctx.config.top_k;

    const std::array<std::pair<const char*, GroupBy>, 4> groupings{{{"entry", GroupBy::Entry},
                                                                    {"category", GroupBy::Category},
                                                                    {"person", GroupBy::PersonEntry},
                                                                    {"tag", GroupBy::TagGroup}}};
    for (const auto& [name, g] : groupings) {
        OutFile out(ctx.run_dir / fmt::format("report_popularity_{}.csv", name));
        write_report_csv(*out, popularity_report(assignments, index, g, k));
    }
    for (auto f : {TagFilter::All, TagFilter::Racist, TagFilter::Political}) {
        {
            OutFile out(ctx.run_dir / fmt::format("report_temporal_{}.csv", to_string(f)));
            const auto series = temporal_report(store, assignments, index, f);
            write_temporal_csv(*out, series);
        }
        {
            OutFile out(ctx.run_dir / fmt::format("report_subcommunity_{}.csv", to_string(f)));
            write_report_csv(*out, subcommunity_report(store, assignments, index, f, k));
        }
        for (const auto& [community, count] : store.community_counts()) {
            try {
                const auto cmp = score_cdf(store, assignments, index, community, f);
                OutFile out(ctx.run_dir / fmt::format("report_scores_{}_{}.csv", community, to_string(f)));
                write_score_cdf_csv(*out, cmp);
            } catch (const UnsupportedCommunity&) {
                // communities without votes have no score report
            }
        }
    }
}

struct ClusterStreams {
    std::vector<std::string> names;
    std::map<int, hawkes::EventStream> streams;
};

ClusterStreams build_streams(const RunContext& ctx, const PostStore& store, const std::vector<Assignment>& assignments) {
    const auto& cfg = ctx.config;
    ClusterStreams cs;
    if (!cfg.communities.empty()) {
        cs.names = cfg.communities;
    } else {
        for (const auto& [c, n] : store.community_counts()) cs.names.push_back(c);
    }
    std::map<std::string, std::uint32_t> index;
    for (std::uint32_t k = 0; k < cs.names.size(); ++k) index.emplace(cs.names[k], k);

    std::int64_t lo = INT64_MAX, hi = INT64_MIN;
    for (const auto& p : store.posts()) {
        lo = std::min(lo, p.timestamp);
        hi = std::max(hi, p.timestamp);
    }
    if (store.size() == 0) return cs;
    const double horizon = static_cast<double>(hi - lo) / cfg.time_unit_seconds;

    std::map<int, std::vector<hawkes::Event>> raw;
    for (const auto& a : assignments) {
        auto k = index.find(a.community);
        if (k == index.end()) continue;
        const Post* p = store.find(a.community, a.post_id);
        if (!p) continue;
        raw[a.cluster_id].push_back({static_cast<double>(p->timestamp - lo) / cfg.time_unit_seconds, k->second});
    }
    for (auto& [cid, events] : raw)
        if (events.size() >= cfg.min_cluster_events)
            cs.streams.emplace(cid, hawkes::make_event_stream(std::move(events), horizon));
    return cs;
}

std::string fmt_value(double v) { return std::isnan(v) ? std::string("NA") : fmt::format("{:.6f}", v); }

void stage_hawkes_fit(const RunContext& ctx) {
    const auto& cfg = ctx.config;
    const auto store = load_run_posts(ctx);
    const auto assignments = load_run_assignments(ctx);
    const auto anns = load_annotations(ctx);
    const Corpus corpus = load_run_corpus(ctx);
    const AnnotationIndex index(anns, corpus);
    const auto cs = build_streams(ctx, store, assignments);
    const std::size_t K = cs.names.size();

    std::vector<int> ids;
    for (const auto& [cid, s] : cs.streams) ids.push_back(cid);

    struct Fitted {
        hawkes::HawkesModel model;
        hawkes::RootCauseDistribution roots;
    };
    std::vector<Fitted> fitted(ids.size());
    parallel_for(ids.size(), [&](std::size_t i) {
        const auto& stream = cs.streams.at(ids[i]);
        hawkes::GibbsOptions opts;
        opts.iters = cfg.gibbs_iters;
        opts.burnin = cfg.gibbs_burnin;
        opts.lambda0_prior = cfg.lambda0_prior;
        opts.weight_prior = cfg.weight_prior;
        opts.seed = mix_seed(cfg.seed, static_cast<std::uint64_t>(ids[i]));
        auto fit = hawkes::fit_gibbs(stream, K, cfg.beta, cfg.dmax, opts);
        fitted[i].roots = hawkes::attribute_root_cause(fit.posterior_mean, stream);
        fitted[i].model = std::move(fit.posterior_mean);
    });

    {
        OutFile out(ctx.run_dir / kEvents);
        for (std::size_t i = 0; i < ids.size(); ++i)
            for (const auto& e : cs.streams.at(ids[i]).events) {
                nlohmann::ordered_json obj;
                obj["cluster_id"] = ids[i];
                obj["t"] = e.t;
                obj["community"] = cs.names[e.process];
                *out << obj.dump() << '\n';
            }
    }
    {
        nlohmann::ordered_json doc = nlohmann::ordered_json::array();
        for (std::size_t i = 0; i < ids.size(); ++i) {
            std::ostringstream m;
            hawkes::write_model_json(m, fitted[i].model, cs.names);
            nlohmann::ordered_json rec;
            rec["cluster_id"] = ids[i];
            rec["events"] = cs.streams.at(ids[i]).events.size();
            rec["model"] = nlohmann::ordered_json::parse(m.str());
            doc.push_back(std::move(rec));
        }
        OutFile out(ctx.run_dir / kModels);
        *out << doc.dump(1) << '\n';
    }

    hawkes::InfluenceCounts total(K);
    std::vector<hawkes::InfluenceCounts> per_cluster;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        total.add(fitted[i].roots, cs.streams.at(ids[i]));
        per_cluster.emplace_back(K);
        per_cluster.back().add(fitted[i].roots, cs.streams.at(ids[i]));
    }
    for (auto mode : {hawkes::InfluenceMode::Raw, hawkes::InfluenceMode::Normalized}) {
        const auto name = mode == hawkes::InfluenceMode::Raw ? "influence_raw.csv" : "influence_normalized.csv";
        OutFile out(ctx.run_dir / name);
        hawkes::write_influence_csv(*out, hawkes::influence_matrix(total, mode), cs.names);
    }

    // Per-cluster raw influence, tag group vs the rest, per source/destination pair.
    OutFile out(ctx.run_dir / "influence_ks.csv");
    *out << "group,source,destination,n_group,n_complement,D,p,significant\n";
    for (auto f : {TagFilter::Racist, TagFilter::Political}) {
        for (std::size_t s = 0; s < K; ++s)
            for (std::size_t d = 0; d < K; ++d) {
                std::vector<double> group, rest;
                for (std::size_t i = 0; i < ids.size(); ++i) {
                    const double v = hawkes::influence_matrix(per_cluster[i], hawkes::InfluenceMode::Raw).at(s, d);
                    if (std::isnan(v)) continue;
                    const auto flags = index.flags(ids[i]);
                    (f == TagFilter::Racist ? flags.racist : flags.political) ? group.push_back(v) : rest.push_back(v);
                }
                if (group.empty() || rest.empty()) {
                    *out << fmt::format("{},{},{},{},{},NA,NA,NA\n", to_string(f), cs.names[s], cs.names[d],
                                        group.size(), rest.size());
                    continue;
                }
                const auto ks = ks_two_sample(group, rest);
                *out << fmt::format("{},{},{},{},{},{},{},{}\n", to_string(f), cs.names[s], cs.names[d], group.size(),
                                    rest.size(), fmt_value(ks.D), fmt::format("{:.6g}", ks.p), ks.significant);
            }
    }
}

hawkes::HawkesModel sim_model(const RunContext& ctx, std::vector<std::string>& names, bool required = true) {
    if (!ctx.args.model.empty()) {
        auto in = open_in(need_config_path(ctx.args.model, "--model"));
        return hawkes::read_model_json(in, &names);
    }
    // Default: the fitted model of the cluster with the most events.
    auto in = open_in(need(ctx, kModels, "hawkes-fit"));
    const auto doc = nlohmann::json::parse(in);
    const nlohmann::json* best = nullptr;
    for (const auto& rec : doc)
        if (!best || rec.at("events").get<std::size_t>() > best->at("events").get<std::size_t>()) best = &rec;
    if (!best) {
        if (!required) return {};
        throw InvalidInput("hawkes_models.json holds no models; pass --model");
    }
    std::istringstream model(best->at("model").dump());
    return hawkes::read_model_json(model, &names);
}

void stage_hawkes_sim(const RunContext& ctx) {
    std::vector<std::string> names;
    const auto model = sim_model(ctx, names);
    const auto stream = hawkes::simulate(model, ctx.args.horizon, ctx.config.seed);
    OutFile out(ctx.run_dir / kSimEvents);
    hawkes::write_events_jsonl(*out, stream, names);
}

void stage_influence(const RunContext& ctx) {
    std::vector<std::string> names;
    const auto model = sim_model(ctx, names);
    const fs::path events = ctx.args.events.empty() ? need(ctx, kSimEvents, "hawkes-sim") : ctx.args.events;
    auto in = open_in(events);
    std::vector<std::string> stream_names = names;
    const auto stream = hawkes::read_events_jsonl(in, stream_names);
    if (names.empty()) names = stream_names;
    if (stream_names.size() != model.K) throw InvalidInput("events and model disagree on the number of communities");
    const auto roots = hawkes::attribute_root_cause(model, stream);
    hawkes::InfluenceCounts counts(model.K);
    counts.add(roots, stream);
    for (auto mode : {hawkes::InfluenceMode::Raw, hawkes::InfluenceMode::Normalized}) {
        const auto name = mode == hawkes::InfluenceMode::Raw ? "influence_stream_raw.csv" : "influence_stream_normalized.csv";
        OutFile out(ctx.run_dir / name);
        hawkes::write_influence_csv(*out, hawkes::influence_matrix(counts, mode), names);
    }
}

std::vector<std::vector<int>> read_ratings_csv(const fs::path& path) {
    auto in = open_in(path);
    std::vector<std::vector<int>> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<int> row;
        std::stringstream ss(line);
        std::string cell;
        bool numeric = true;
        while (std::getline(ss, cell, ',')) {
            try {
                std::size_t used = 0;
                row.push_back(std::stoi(cell, &used));
                if (used != cell.size()) numeric = false;
            } catch (const std::exception&) {
                numeric = false;
            }
        }
        if (!numeric) {
            if (lineno == 1) continue;  // header
            throw LineError(lineno, "ratings: non-integer cell");
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

void stage_kappa(const RunContext& ctx) {
    const auto rows = read_ratings_csv(need_config_path(ctx.config.ratings, "paths.ratings"));
    OutFile out(ctx.run_dir / kKappa);
    *out << fmt::format("subjects={}\nkappa={:.6f}\n", rows.size(), fleiss_kappa(rows));
}

using StageFn = void (*)(const RunContext&);

const std::vector<std::pair<std::string, StageFn>>& stage_table() {
    static const std::vector<std::pair<std::string, StageFn>> table{
        {"hash", stage_hash},
        {"pairwise", stage_pairwise},
        {"cluster", stage_cluster},
        {"sweep", stage_sweep},
        {"annotate", stage_annotate},
        {"metric-graph", stage_metric_graph},
        {"dendrogram", stage_dendrogram},
        {"associate", stage_associate},
        {"report", stage_report},
        {"hawkes-fit", stage_hawkes_fit},
        {"hawkes-sim", stage_hawkes_sim},
        {"influence", stage_influence},
        {"kappa", stage_kappa},
    };
    return table;
}

} // namespace

const std::vector<std::string>& stage_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (const auto& [n, fn] : stage_table()) v.push_back(n);
        return v;
    }();
    return names;
}

std::string sha256_file(const fs::path& path) {
    auto in = open_in(path);
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> md(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    if (!md || EVP_DigestInit_ex(md.get(), EVP_sha256(), nullptr) != 1) throw Error("sha256: init failed");
    std::array<char, 1 << 16> buf;
    while (in.read(buf.data(), buf.size()) || in.gcount() > 0) {
        EVP_DigestUpdate(md.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
        if (!in) break;
    }
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(md.get(), digest, &len);
    std::string hex;
    for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
    return hex;
}

void write_manifest(const fs::path& run_dir) {
    std::map<std::string, std::string> artifacts;
    for (const auto& entry : fs::recursive_directory_iterator(run_dir)) {
        if (!entry.is_regular_file()) continue;
        const auto rel = fs::relative(entry.path(), run_dir).generic_string();
        if (rel == kManifest) continue;
        artifacts.emplace(rel, sha256_file(entry.path()));
    }
    nlohmann::ordered_json doc;
    doc["artifacts"] = nlohmann::ordered_json::object();
    for (const auto& [name, digest] : artifacts) doc["artifacts"][name] = digest;
    OutFile out(run_dir / kManifest);
    *out << doc.dump(1) << '\n';
}

void run_stage(std::string_view stage, const RunContext& ctx) {
    ctx.config.validate();
    const auto& table = stage_table();
    auto it = std::find_if(table.begin(), table.end(), [&](const auto& e) { return e.first == stage; });
    if (it == table.end()) throw InvalidInput("unknown stage '" + std::string(stage) + "'");
    fs::create_directories(ctx.run_dir);
    if (ctx.config.threads) set_max_threads(ctx.config.threads);
    it->second(ctx);
    {
        OutFile out(ctx.run_dir / kResolvedConfig);
        write_config(*out, ctx.config);
    }
    write_manifest(ctx.run_dir);
}

void run_all(const RunContext& ctx) {
    bool simulate = true;
    for (const auto& name : stage_names()) {
        if (name == "kappa" && ctx.config.ratings.empty()) continue;
        if ((name == "hawkes-sim" || name == "influence") && !simulate) continue;
        if (name == "hawkes-sim" && ctx.args.model.empty()) {
            std::vector<std::string> names;
            const auto m = sim_model(ctx, names, false);
            if (m.K == 0 || hawkes::spectral_radius(m) >= 1.0) {
                std::cerr << "all: no subcritical fitted model; skipping hawkes-sim and influence\n";
                simulate = false;
                continue;
            }
        }
        run_stage(name, ctx);
    }
}

} // namespace memetrace
