#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "memetrace/phash.hpp"

namespace memetrace {

struct Post {
    std::string id;
    std::string community;
    std::int64_t timestamp = 0;  // seconds since epoch, UTC
    std::optional<std::int64_t> score;
    std::optional<std::string> subcommunity;
    PHash64 hash;
};

struct IngestOptions {
    bool strict = true;  // abort on the first bad line; otherwise skip and count
    std::optional<std::int64_t> window_start;
    std::optional<std::int64_t> window_end;
};

struct IngestIssue {
    std::size_t line;
    std::string reason;
};

class PostStore {
public:
    const std::vector<Post>& posts() const noexcept { return posts_; }
    std::size_t size() const noexcept { return posts_.size(); }
    const std::map<std::string, std::size_t>& community_counts() const noexcept { return counts_; }
    /// Distinct hashes, ascending.
    std::vector<PHash64> unique_hashes() const;
    std::vector<PHash64> unique_hashes(const std::vector<std::string>& communities) const;

    std::size_t duplicates_dropped() const noexcept { return duplicates_; }
    const std::vector<IngestIssue>& skipped() const noexcept { return skipped_; }

    /// Returns false (and drops the post) when (community, id) is already present.
    bool add(Post post);
    const Post* find(const std::string& community, const std::string& id) const;

private:
    friend PostStore ingest_posts(std::istream&, const IngestOptions&);
    std::vector<Post> posts_;
    std::map<std::string, std::size_t> counts_;
    std::map<std::pair<std::string, std::string>, std::size_t> index_;
    std::size_t duplicates_ = 0;
    std::vector<IngestIssue> skipped_;
};

PostStore ingest_posts(std::istream& in, const IngestOptions& opts = {});
PostStore ingest_posts(const std::filesystem::path& path, const IngestOptions& opts = {});

std::string post_to_json_line(const Post& p);
void write_posts(std::ostream& out, const std::vector<Post>& posts);

} // namespace memetrace
