#include "memetrace/posts.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "memetrace/errors.hpp"

namespace memetrace {

using nlohmann::json;

namespace {

const json& require(const json& obj, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) throw InvalidInput(std::string("missing field '") + key + "'");
    return *it;
}

std::string require_string(const json& obj, const char* key) {
    const json& v = require(obj, key);
    if (!v.is_string()) throw InvalidInput(std::string("field '") + key + "' must be a string");
    return v.get<std::string>();
}

std::int64_t as_int64(const json& v, const char* key) {
    if (v.is_number_integer()) return v.get<std::int64_t>();
    if (v.is_number_float()) {
        const double d = v.get<double>();
        if (std::isfinite(d)) return static_cast<std::int64_t>(std::floor(d));
    }
    throw InvalidInput(std::string("field '") + key + "' must be a number");
}

Post parse_post(const std::string& line, const IngestOptions& opts) {
    json obj;
    try {
        obj = json::parse(line);
    } catch (const json::parse_error&) {
        throw InvalidInput("malformed JSON");
    }
    if (!obj.is_object()) throw InvalidInput("record is not a JSON object");

    Post p;
    const json& id = require(obj, "id");
    p.id = id.is_string() ? id.get<std::string>() : id.dump();
    p.community = require_string(obj, "community");
    p.timestamp = as_int64(require(obj, "timestamp"), "timestamp");
    p.hash = parse_phash_hex(require_string(obj, "phash"));
    if (auto it = obj.find("score"); it != obj.end() && !it->is_null()) p.score = as_int64(*it, "score");
    if (auto it = obj.find("subcommunity"); it != obj.end() && !it->is_null()) {
        if (!it->is_string()) throw InvalidInput("field 'subcommunity' must be a string");
        p.subcommunity = it->get<std::string>();
    }
    if ((opts.window_start && p.timestamp < *opts.window_start) ||
        (opts.window_end && p.timestamp > *opts.window_end))
        throw InvalidInput("timestamp outside study window");
    return p;
}

} // namespace

bool PostStore::add(Post post) {
    auto key = std::make_pair(post.community, post.id);
    if (index_.contains(key)) {
        ++duplicates_;
        return false;
    }
    index_.emplace(std::move(key), posts_.size());
    ++counts_[post.community];
    posts_.push_back(std::move(post));
    return true;
}

const Post* PostStore::find(const std::string& community, const std::string& id) const {
    auto it = index_.find(std::make_pair(community, id));
    return it == index_.end() ? nullptr : &posts_[it->second];
}

std::vector<PHash64> PostStore::unique_hashes() const {
    std::vector<PHash64> out;
    out.reserve(posts_.size());
    for (const auto& p : posts_) out.push_back(p.hash);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<PHash64> PostStore::unique_hashes(const std::vector<std::string>& communities) const {
    const std::set<std::string> wanted(communities.begin(), communities.end());
    std::vector<PHash64> out;
    for (const auto& p : posts_)
        if (wanted.contains(p.community)) out.push_back(p.hash);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

PostStore ingest_posts(std::istream& in, const IngestOptions& opts) {
    PostStore store;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            store.add(parse_post(line, opts));
        } catch (const InvalidInput& e) {
            if (opts.strict) throw LineError(lineno, e.what());
            store.skipped_.push_back({lineno, e.what()});
        }
    }
    return store;
}

PostStore ingest_posts(const std::filesystem::path& path, const IngestOptions& opts) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open posts file " + path.string());
    return ingest_posts(in, opts);
}

std::string post_to_json_line(const Post& p) {
    json obj = {{"id", p.id}, {"community", p.community}, {"timestamp", p.timestamp},
                {"phash", format_phash_hex(p.hash)}};
    if (p.score) obj["score"] = *p.score;
    if (p.subcommunity) obj["subcommunity"] = *p.subcommunity;
    return obj.dump();
}

void write_posts(std::ostream& out, const std::vector<Post>& posts) {
    for (const auto& p : posts) out << post_to_json_line(p) << '\n';
}

} // namespace memetrace
