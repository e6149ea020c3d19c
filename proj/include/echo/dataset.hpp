#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "echo/graph.hpp"
#include "echo/urltools.hpp"

// The ingested dataset: deduplicated tweet records plus everything derived
// from them — the user table, the weighted retweet graph (author →
// retweeter), and the user×URL share table. Immutable once built; every
// pipeline stage reads it concurrently without locks.

namespace echo {

struct TweetRecord {
    std::string tweet_id;
    std::string user_id;
    bool verified = false;
    std::optional<std::string> retweet_of_user;
    std::vector<std::string> urls;  // canonical once inside a Dataset
    std::string timestamp;          // ISO-8601, kept verbatim

    nlohmann::json to_json() const;
    static TweetRecord from_json(const nlohmann::json& j);
};

struct UserStats {
    std::int64_t tweets = 0;        // records that are not retweets
    std::int64_t retweets = 0;
    std::int64_t url_tweets = 0;    // tweets carrying at least one URL
    std::int64_t url_retweets = 0;
};

struct IngestCounters {
    std::int64_t parsed = 0;        // records kept
    std::int64_t malformed = 0;     // skipped lines (zero in strict mode)
    std::int64_t duplicates = 0;    // repeated tweet_ids skipped
    std::int64_t flagged_urls = 0;  // canonicalization left these raw
};

class Dataset {
public:
    /// Builds every derived structure from (deduplicated) records whose URLs
    /// are canonicalized with `resolver` on the way in.
    static Dataset from_records(std::vector<TweetRecord> records,
                                const urltools::UrlResolver& resolver = nullptr,
                                IngestCounters counters = {});

    const std::vector<TweetRecord>& records() const { return records_; }
    const IngestCounters& counters() const { return counters_; }

    int user_count() const { return static_cast<int>(users_.size()); }
    const std::vector<std::string>& users() const { return users_; }
    bool is_verified(int user) const { return verified_[static_cast<std::size_t>(user)] != 0; }
    bool contains_user(const std::string& id) const { return user_index_.count(id) > 0; }
    int user_index(const std::string& id) const;
    const UserStats& user_stats(int user) const { return stats_[static_cast<std::size_t>(user)]; }

    int url_count() const { return static_cast<int>(urls_.size()); }
    const std::vector<std::string>& urls() const { return urls_; }
    bool contains_url(const std::string& url) const { return url_index_.count(url) > 0; }
    int url_index(const std::string& url) const;

    /// (user index, url index, multiplicity), sorted by (user, url).
    const std::vector<std::tuple<int, int, std::int64_t>>& shares() const { return shares_; }
    std::int64_t total_shares() const { return total_shares_; }

    /// Retweet graph, edges author → retweeter, weight = retweet count.
    const DirectedWeightedGraph& retweet_graph() const { return retweets_; }

    /// users × URLs, binary (shared at least once); top layer = users.
    BipartiteGraph user_url_graph() const;

    /// verified × unverified users, linked when either retweeted the other;
    /// top layer = verified users.
    BipartiteGraph verified_unverified_graph() const;

    std::int64_t total_tweets() const { return totals_.tweets; }
    std::int64_t total_retweets() const { return totals_.retweets; }
    const UserStats& totals() const { return totals_; }

    /// One canonical JSONL line per record, in record order.
    void export_jsonl(std::ostream& out) const;

    /// Binary snapshot (CBOR). Loading rebuilds all derived structures.
    void save_snapshot(const std::string& path) const;
    static Dataset load_snapshot(const std::string& path);

private:
    std::vector<TweetRecord> records_;
    IngestCounters counters_;
    std::vector<std::string> users_;
    std::unordered_map<std::string, int> user_index_;
    std::vector<char> verified_;
    std::vector<UserStats> stats_;
    UserStats totals_;
    std::vector<std::string> urls_;
    std::unordered_map<std::string, int> url_index_;
    std::vector<std::tuple<int, int, std::int64_t>> shares_;
    std::int64_t total_shares_ = 0;
    DirectedWeightedGraph retweets_;
};

struct ParseResult {
    Dataset dataset;
    std::vector<std::string> warnings;  // one line per skipped record
};

/// Reads JSONL tweet records. Malformed lines are skipped with a warning, or
/// abort with the line number under `strict`. Duplicate tweet_ids are always
/// skipped with a warning. Zero parseable records is an error.
ParseResult parse_tweets(std::istream& in, const urltools::UrlResolver& resolver = nullptr,
                         bool strict = false);

ParseResult parse_tweets_file(const std::string& path,
                              const urltools::UrlResolver& resolver = nullptr,
                              bool strict = false);

/// Trust label per distinct URL, aligned with dataset.urls().
std::vector<urltools::TrustLabel> join_labels(const Dataset& dataset,
                                              const urltools::TrustLabelTable& table);

}  // namespace echo
