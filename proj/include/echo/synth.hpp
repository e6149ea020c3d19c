#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "echo/dataset.hpp"
#include "echo/urltools.hpp"

// Synthetic corpus generator: plants camps (discourse communities), dense
// co-sharing groups whose members retweet each other (echo chambers),
// background noise, and a labeled domain mix — everything the end-to-end
// acceptance experiments need, with a manifest recording the ground truth.

namespace echo::synth {

struct SyntheticConfig {
    int camps = 2;
    int verified_per_camp = 2;
    int unverified_per_camp = 100;
    int chambers_per_camp = 1;       // 0 = noise-only corpus
    int chamber_size = 20;
    double chamber_share_prob = 0.9;   // member shares each pool URL with this prob
    double chamber_retweet_prob = 0.3; // per ordered member pair
    int chamber_url_pool = 8;
    int noise_url_pool = 200;
    int noise_urls_per_user = 1;
    double noise_retweet_rate = 0.2;   // expected noise retweets per unverified user
    double cross_camp_rate = 0.01;     // camp retweets aimed at the wrong camp
    int retweets_per_user = 3;         // camp-signal retweets of verified users
    int tweets_per_verified = 3;
    double fraction_n_domains = 0.5;   // chamber/noise domains labeled N vs T
    std::uint64_t seed = 0;

    void validate() const;  // throws InputError on nonsense
};

struct SyntheticData {
    std::vector<TweetRecord> records;
    urltools::TrustLabelTable labels;
    nlohmann::json manifest;  // planted camps, groups, chambers + bookkeeping
};

/// Deterministic in config.seed. The manifest's "ledger" block records the
/// exact record/share/retweet counts for round-trip checks, and the planted
/// memberships obey chamber ⊆ co-sharing group ⊆ camp.
SyntheticData generate_synthetic(const SyntheticConfig& config);

/// Writes tweets.jsonl, labels.csv and truth.json into a directory.
void write_synthetic(const SyntheticData& data, const std::string& directory);

}  // namespace echo::synth
