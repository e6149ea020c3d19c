#include "echo/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "echo/errors.hpp"

namespace echo {

nlohmann::json TweetRecord::to_json() const {
    nlohmann::json j{{"tweet_id", tweet_id},
                     {"user_id", user_id},
                     {"verified", verified},
                     {"urls", urls},
                     {"timestamp", timestamp}};
    if (retweet_of_user.has_value()) {
        j["retweet_of_user"] = *retweet_of_user;
    } else {
        j["retweet_of_user"] = nullptr;
    }
    return j;
}

TweetRecord TweetRecord::from_json(const nlohmann::json& j) {
    TweetRecord record;
    record.tweet_id = j.at("tweet_id").get<std::string>();
    record.user_id = j.at("user_id").get<std::string>();
    record.verified = j.at("verified").get<bool>();
    if (j.contains("retweet_of_user") && !j.at("retweet_of_user").is_null()) {
        record.retweet_of_user = j.at("retweet_of_user").get<std::string>();
    }
    if (j.contains("urls")) record.urls = j.at("urls").get<std::vector<std::string>>();
    if (j.contains("timestamp") && j.at("timestamp").is_string()) {
        record.timestamp = j.at("timestamp").get<std::string>();
    }
    return record;
}

int Dataset::user_index(const std::string& id) const {
    const auto it = user_index_.find(id);
    if (it == user_index_.end()) throw InputError("unknown user: " + id);
    return it->second;
}

int Dataset::url_index(const std::string& url) const {
    const auto it = url_index_.find(url);
    if (it == url_index_.end()) throw InputError("unknown url: " + url);
    return it->second;
}

Dataset Dataset::from_records(std::vector<TweetRecord> records,
                              const urltools::UrlResolver& resolver, IngestCounters counters) {
    Dataset ds;
    ds.records_ = std::move(records);
    ds.counters_ = counters;

    auto intern_user = [&ds](const std::string& id) {
        const auto [it, inserted] = ds.user_index_.emplace(id, static_cast<int>(ds.users_.size()));
        if (inserted) {
            ds.users_.push_back(id);
            ds.verified_.push_back(0);
            ds.stats_.emplace_back();
        }
        return it->second;
    };
    auto intern_url = [&ds](const std::string& url) {
        const auto [it, inserted] = ds.url_index_.emplace(url, static_cast<int>(ds.urls_.size()));
        if (inserted) ds.urls_.push_back(url);
        return it->second;
    };

    std::map<std::pair<int, int>, std::int64_t> retweet_acc;  // (author, retweeter)
    std::map<std::pair<int, int>, std::int64_t> share_acc;    // (user, url)

    for (TweetRecord& record : ds.records_) {
        // canonicalize in place so records() and exports carry final URLs
        for (std::string& url : record.urls) {
            const urltools::CanonicalUrl canonical = urltools::canonicalize_url(url, resolver);
            if (canonical.flagged) ++ds.counters_.flagged_urls;
            url = canonical.url;
        }

        const int user = intern_user(record.user_id);
        if (record.verified) ds.verified_[static_cast<std::size_t>(user)] = 1;
        UserStats& stats = ds.stats_[static_cast<std::size_t>(user)];
        if (record.retweet_of_user.has_value()) {
            const int author = intern_user(*record.retweet_of_user);
            retweet_acc[{author, user}] += 1;
            stats.retweets += 1;
            if (!record.urls.empty()) stats.url_retweets += 1;
        } else {
            stats.tweets += 1;
            if (!record.urls.empty()) stats.url_tweets += 1;
        }
        for (const std::string& url : record.urls) {
            share_acc[{user, intern_url(url)}] += 1;
        }
    }

    for (const auto& [key, count] : share_acc) {
        ds.shares_.emplace_back(key.first, key.second, count);
        ds.total_shares_ += count;
    }
    std::vector<std::tuple<std::string, std::string, std::int64_t>> retweet_edges;
    retweet_edges.reserve(retweet_acc.size());
    for (const auto& [key, weight] : retweet_acc) {
        retweet_edges.emplace_back(ds.users_[static_cast<std::size_t>(key.first)],
                                   ds.users_[static_cast<std::size_t>(key.second)], weight);
    }
    ds.retweets_ = DirectedWeightedGraph::from_edges(retweet_edges);

    for (const UserStats& stats : ds.stats_) {
        ds.totals_.tweets += stats.tweets;
        ds.totals_.retweets += stats.retweets;
        ds.totals_.url_tweets += stats.url_tweets;
        ds.totals_.url_retweets += stats.url_retweets;
    }
    return ds;
}

BipartiteGraph Dataset::user_url_graph() const {
    if (shares_.empty()) throw InputError("dataset has no URL shares");
    std::vector<std::pair<std::string, std::string>> pairs;
    pairs.reserve(shares_.size());
    for (const auto& [user, url, count] : shares_) {
        pairs.emplace_back(users_[static_cast<std::size_t>(user)],
                           urls_[static_cast<std::size_t>(url)]);
    }
    return BipartiteGraph::from_edges(pairs);
}

BipartiteGraph Dataset::verified_unverified_graph() const {
    std::vector<std::pair<std::string, std::string>> pairs;
    for (const auto& edge : retweets_.edges()) {
        const std::string& author = retweets_.ids()[static_cast<std::size_t>(edge.source)];
        const std::string& retweeter = retweets_.ids()[static_cast<std::size_t>(edge.target)];
        const bool author_verified = is_verified(user_index(author));
        const bool retweeter_verified = is_verified(user_index(retweeter));
        if (author_verified == retweeter_verified) continue;
        if (author_verified) {
            pairs.emplace_back(author, retweeter);
        } else {
            pairs.emplace_back(retweeter, author);
        }
    }
    if (pairs.empty()) throw InputError("no seed layer: no verified/unverified retweet links");
    return BipartiteGraph::from_edges(pairs);
}

void Dataset::export_jsonl(std::ostream& out) const {
    for (const TweetRecord& record : records_) {
        out << record.to_json().dump() << '\n';
    }
}

void Dataset::save_snapshot(const std::string& path) const {
    nlohmann::json j;
    nlohmann::json record_array = nlohmann::json::array();
    for (const TweetRecord& record : records_) record_array.push_back(record.to_json());
    j["records"] = std::move(record_array);
    j["counters"] = {{"parsed", counters_.parsed},
                     {"malformed", counters_.malformed},
                     {"duplicates", counters_.duplicates},
                     {"flagged_urls", counters_.flagged_urls}};
    const std::vector<std::uint8_t> bytes = nlohmann::json::to_cbor(j);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write snapshot: " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw InputError("failed writing snapshot: " + path);
}

Dataset Dataset::load_snapshot(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open snapshot: " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    nlohmann::json j;
    try {
        j = nlohmann::json::from_cbor(bytes);
    } catch (const nlohmann::json::exception& e) {
        throw InputError("snapshot is not valid: " + std::string(e.what()));
    }
    std::vector<TweetRecord> records;
    for (const auto& rj : j.at("records")) records.push_back(TweetRecord::from_json(rj));
    IngestCounters counters;
    const auto& cj = j.at("counters");
    counters.parsed = cj.at("parsed").get<std::int64_t>();
    counters.malformed = cj.at("malformed").get<std::int64_t>();
    counters.duplicates = cj.at("duplicates").get<std::int64_t>();
    counters.flagged_urls = cj.at("flagged_urls").get<std::int64_t>();
    // URLs in a snapshot are already canonical; canonicalization is
    // idempotent, so no resolver is needed (or wanted) here.
    Dataset ds = from_records(std::move(records), nullptr, counters);
    ds.counters_.flagged_urls = counters.flagged_urls;  // keep the original count
    return ds;
}

namespace {

std::optional<std::string> record_problem(const nlohmann::json& j) {
    if (!j.is_object()) return "not a JSON object";
    if (!j.contains("tweet_id") || !j.at("tweet_id").is_string()) return "missing tweet_id";
    if (!j.contains("user_id") || !j.at("user_id").is_string()) return "missing user_id";
    if (!j.contains("verified") || !j.at("verified").is_boolean()) return "missing verified";
    if (j.contains("retweet_of_user") && !j.at("retweet_of_user").is_null()) {
        if (!j.at("retweet_of_user").is_string()) return "retweet_of_user must be a string";
        if (j.at("retweet_of_user").get<std::string>() == j.at("user_id").get<std::string>()) {
            return "self-retweet";
        }
    }
    if (j.contains("urls")) {
        if (!j.at("urls").is_array()) return "urls must be an array";
        for (const auto& u : j.at("urls")) {
            if (!u.is_string()) return "urls must be strings";
        }
    }
    return std::nullopt;
}

}  // namespace

ParseResult parse_tweets(std::istream& in, const urltools::UrlResolver& resolver, bool strict) {
    std::vector<TweetRecord> records;
    std::vector<std::string> warnings;
    IngestCounters counters;
    std::unordered_map<std::string, int> seen_ids;

    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;

        const nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        std::optional<std::string> problem =
            j.is_discarded() ? std::optional<std::string>("invalid JSON") : record_problem(j);
        if (problem.has_value()) {
            if (strict) {
                throw InputError("line " + std::to_string(line_no) + ": " + *problem);
            }
            ++counters.malformed;
            warnings.push_back("line " + std::to_string(line_no) + ": " + *problem + " (skipped)");
            continue;
        }
        TweetRecord record = TweetRecord::from_json(j);
        if (!seen_ids.emplace(record.tweet_id, line_no).second) {
            ++counters.duplicates;
            warnings.push_back("line " + std::to_string(line_no) + ": duplicate tweet_id " +
                               record.tweet_id + " (skipped)");
            continue;
        }
        records.push_back(std::move(record));
        ++counters.parsed;
    }
    if (records.empty()) {
        throw InputError("no parseable records in input");
    }
    return {Dataset::from_records(std::move(records), resolver, counters), std::move(warnings)};
}

ParseResult parse_tweets_file(const std::string& path, const urltools::UrlResolver& resolver,
                              bool strict) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open input: " + path);
    return parse_tweets(in, resolver, strict);
}

std::vector<urltools::TrustLabel> join_labels(const Dataset& dataset,
                                              const urltools::TrustLabelTable& table) {
    std::vector<urltools::TrustLabel> labels;
    labels.reserve(dataset.urls().size());
    for (const std::string& url : dataset.urls()) {
        labels.push_back(urltools::url_label(url, table));
    }
    return labels;
}

}  // namespace echo
