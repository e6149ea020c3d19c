#include "echo/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>

#include "echo/errors.hpp"
#include "echo/rng.hpp"
#include "echo/textio.hpp"

namespace echo::synth {

namespace {

std::string sequential_timestamp(std::int64_t counter) {
    const std::int64_t day = counter / 86400;
    const std::int64_t within = counter % 86400;
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "2020-02-%02dT%02d:%02d:%02dZ",
                  static_cast<int>(day % 28) + 1, static_cast<int>(within / 3600),
                  static_cast<int>((within / 60) % 60), static_cast<int>(within % 60));
    return buffer;
}

int poisson_draw(rng::SplitMix64& gen, double lambda) {
    if (lambda <= 0.0) return 0;
    const double limit = std::exp(-lambda);
    int k = 0;
    double p = 1.0;
    do {
        p *= gen.unit();
        ++k;
    } while (p > limit);
    return k - 1;
}

void require(bool ok, const char* message) {
    if (!ok) throw InputError(std::string("synthetic config: ") + message);
}

}  // namespace

void SyntheticConfig::validate() const {
    require(camps >= 1, "need at least one camp");
    require(verified_per_camp >= 0 && unverified_per_camp >= 0, "negative population");
    require(chambers_per_camp >= 0 && chamber_size >= 0, "negative chamber spec");
    require(chamber_url_pool >= 0 && noise_url_pool >= 0 && noise_urls_per_user >= 0,
            "negative URL pool");
    require(retweets_per_user >= 0 && tweets_per_verified >= 0, "negative activity");
    require(chamber_share_prob >= 0.0 && chamber_share_prob <= 1.0, "share prob out of [0,1]");
    require(chamber_retweet_prob >= 0.0 && chamber_retweet_prob <= 1.0,
            "retweet prob out of [0,1]");
    require(cross_camp_rate >= 0.0 && cross_camp_rate <= 1.0, "cross-camp rate out of [0,1]");
    require(noise_retweet_rate >= 0.0, "negative noise rate");
    require(fraction_n_domains >= 0.0 && fraction_n_domains <= 1.0,
            "label fraction out of [0,1]");
    require(chambers_per_camp * chamber_size <= unverified_per_camp,
            "chambers need more users than the camp has");
    require(retweets_per_user == 0 || verified_per_camp >= 1,
            "camp retweets need at least one verified user per camp");
    require(noise_urls_per_user == 0 || noise_url_pool >= 1,
            "noise shares need a nonempty URL pool");
}

SyntheticData generate_synthetic(const SyntheticConfig& config) {
    config.validate();
    rng::SplitMix64 gen(config.seed);
    SyntheticData data;

    std::vector<std::vector<std::string>> verified(static_cast<std::size_t>(config.camps));
    std::vector<std::vector<std::string>> unverified(static_cast<std::size_t>(config.camps));
    nlohmann::json camp_of = nlohmann::json::object();
    for (int c = 0; c < config.camps; ++c) {
        for (int i = 0; i < config.verified_per_camp; ++i) {
            const std::string id = "v" + std::to_string(c) + "_" + std::to_string(i);
            verified[static_cast<std::size_t>(c)].push_back(id);
            camp_of[id] = c;
        }
        for (int i = 0; i < config.unverified_per_camp; ++i) {
            const std::string id = "u" + std::to_string(c) + "_" + std::to_string(i);
            unverified[static_cast<std::size_t>(c)].push_back(id);
            camp_of[id] = c;
        }
    }

    auto label_for_new_domain = [&](const std::string& domain) {
        data.labels[domain] =
            gen.unit() < config.fraction_n_domains ? urltools::TrustLabel::N : urltools::TrustLabel::T;
    };

    // Planted co-sharing groups: members, URL pool, and domain labels.
    struct Group {
        int camp;
        std::vector<std::string> members;
        std::vector<std::string> urls;
    };
    std::vector<Group> groups;
    for (int c = 0; c < config.camps; ++c) {
        for (int h = 0; h < config.chambers_per_camp; ++h) {
            Group group;
            group.camp = c;
            const int base = h * config.chamber_size;
            for (int m = 0; m < config.chamber_size; ++m) {
                group.members.push_back(
                    unverified[static_cast<std::size_t>(c)][static_cast<std::size_t>(base + m)]);
            }
            for (int u = 0; u < config.chamber_url_pool; ++u) {
                const std::string domain = "camp" + std::to_string(c) + "h" + std::to_string(h) +
                                           "u" + std::to_string(u) + "-press.com";
                group.urls.push_back("https://" + domain + "/story/" + std::to_string(u));
                label_for_new_domain(domain);
            }
            groups.push_back(std::move(group));
        }
    }

    // Noise URL pool. The first two domains get the excluded labels (platform
    // and satire) so downstream filtering is exercised; every 13th domain is
    // left out of the table and resolves to UNC.
    std::vector<std::string> noise_urls;
    for (int u = 0; u < config.noise_url_pool; ++u) {
        const std::string domain = "noise" + std::to_string(u) + "-outlet.com";
        noise_urls.push_back("https://" + domain + "/article/" + std::to_string(u));
        if (u == 0) {
            data.labels[domain] = urltools::TrustLabel::P;
        } else if (u == 1) {
            data.labels[domain] = urltools::TrustLabel::S;
        } else if (u % 13 == 0) {
            // absent from the table → UNC at lookup
        } else {
            label_for_new_domain(domain);
        }
    }

    std::int64_t tweet_counter = 0;
    std::int64_t retweet_records = 0;
    std::int64_t url_shares = 0;
    auto add_record = [&](const std::string& user, bool user_verified,
                          std::optional<std::string> retweet_of, std::vector<std::string> urls) {
        TweetRecord record;
        record.tweet_id = "t" + std::to_string(tweet_counter);
        record.user_id = user;
        record.verified = user_verified;
        record.retweet_of_user = std::move(retweet_of);
        record.urls = std::move(urls);
        record.timestamp = sequential_timestamp(tweet_counter);
        ++tweet_counter;
        if (record.retweet_of_user.has_value()) ++retweet_records;
        url_shares += static_cast<std::int64_t>(record.urls.size());
        data.records.push_back(std::move(record));
    };

    // 1. Verified users post plain tweets.
    for (int c = 0; c < config.camps; ++c) {
        for (const std::string& v : verified[static_cast<std::size_t>(c)]) {
            for (int t = 0; t < config.tweets_per_verified; ++t) {
                add_record(v, true, std::nullopt, {});
            }
        }
    }

    // 2. Camp signal: unverified users retweet their camp's verified users,
    //    occasionally aiming across camps.
    for (int c = 0; c < config.camps; ++c) {
        for (const std::string& u : unverified[static_cast<std::size_t>(c)]) {
            for (int r = 0; r < config.retweets_per_user; ++r) {
                int target_camp = c;
                if (config.camps > 1 && gen.unit() < config.cross_camp_rate) {
                    target_camp = static_cast<int>(gen.below(static_cast<std::uint64_t>(config.camps - 1)));
                    if (target_camp >= c) ++target_camp;
                }
                const auto& pool = verified[static_cast<std::size_t>(target_camp)];
                const std::string& target = pool[static_cast<std::size_t>(gen.below(pool.size()))];
                add_record(u, false, target, {});
            }
        }
    }

    // 3. Chamber signal: co-sharing plus internal retweets.
    for (const Group& group : groups) {
        for (const std::string& member : group.members) {
            for (const std::string& url : group.urls) {
                if (gen.unit() < config.chamber_share_prob) {
                    add_record(member, false, std::nullopt, {url});
                }
            }
        }
        for (const std::string& author : group.members) {
            for (const std::string& reader : group.members) {
                if (author == reader) continue;
                if (gen.unit() < config.chamber_retweet_prob) {
                    add_record(reader, false, author, {});
                }
            }
        }
    }

    // 4. Background noise: everyone outside a chamber shares random URLs, and
    //    random unverified pairs retweet each other.
    std::vector<std::string> all_unverified;
    std::vector<char> in_chamber;
    for (int c = 0; c < config.camps; ++c) {
        const int chamber_users = config.chambers_per_camp * config.chamber_size;
        const auto& pool = unverified[static_cast<std::size_t>(c)];
        for (int i = 0; i < static_cast<int>(pool.size()); ++i) {
            all_unverified.push_back(pool[static_cast<std::size_t>(i)]);
            in_chamber.push_back(i < chamber_users ? 1 : 0);
        }
    }
    for (std::size_t i = 0; i < all_unverified.size(); ++i) {
        if (in_chamber[i]) continue;
        for (int s = 0; s < config.noise_urls_per_user; ++s) {
            const std::string& url = noise_urls[static_cast<std::size_t>(gen.below(noise_urls.size()))];
            add_record(all_unverified[i], false, std::nullopt, {url});
        }
    }
    if (all_unverified.size() >= 2) {
        for (const std::string& u : all_unverified) {
            const int count = poisson_draw(gen, config.noise_retweet_rate);
            for (int r = 0; r < count; ++r) {
                std::string target = u;
                while (target == u) {
                    target = all_unverified[static_cast<std::size_t>(gen.below(all_unverified.size()))];
                }
                add_record(u, false, target, {});
            }
        }
    }

    // Ground truth + bookkeeping.
    nlohmann::json group_json = nlohmann::json::array();
    std::vector<std::string> chamber_users;
    for (const Group& group : groups) {
        group_json.push_back(
            {{"camp", group.camp}, {"members", group.members}, {"urls", group.urls}});
        chamber_users.insert(chamber_users.end(), group.members.begin(), group.members.end());
    }
    std::map<std::string, char> distinct_users;  // ordered for determinism
    std::map<std::string, char> distinct_urls;
    for (const TweetRecord& record : data.records) {
        distinct_users[record.user_id] = 1;
        if (record.retweet_of_user.has_value()) distinct_users[*record.retweet_of_user] = 1;
        for (const std::string& url : record.urls) distinct_urls[url] = 1;
    }
    data.manifest = nlohmann::json{
        {"config",
         {{"camps", config.camps},
          {"verified_per_camp", config.verified_per_camp},
          {"unverified_per_camp", config.unverified_per_camp},
          {"chambers_per_camp", config.chambers_per_camp},
          {"chamber_size", config.chamber_size},
          {"chamber_share_prob", config.chamber_share_prob},
          {"chamber_retweet_prob", config.chamber_retweet_prob},
          {"chamber_url_pool", config.chamber_url_pool},
          {"noise_url_pool", config.noise_url_pool},
          {"noise_urls_per_user", config.noise_urls_per_user},
          {"noise_retweet_rate", config.noise_retweet_rate},
          {"cross_camp_rate", config.cross_camp_rate},
          {"retweets_per_user", config.retweets_per_user},
          {"tweets_per_verified", config.tweets_per_verified},
          {"fraction_n_domains", config.fraction_n_domains},
          {"seed", config.seed}}},
        {"camps", camp_of},
        {"groups", group_json},
        {"chamber_users", chamber_users},
        {"ledger",
         {{"records", tweet_counter},
          {"retweet_records", retweet_records},
          {"tweet_records", tweet_counter - retweet_records},
          {"url_shares", url_shares},
          {"distinct_users", distinct_users.size()},
          {"distinct_urls", distinct_urls.size()}}}};
    return data;
}

void write_synthetic(const SyntheticData& data, const std::string& directory) {
    std::filesystem::create_directories(directory);
    const std::filesystem::path dir(directory);

    std::ofstream tweets(dir / "tweets.jsonl");
    if (!tweets) throw InputError("cannot write " + (dir / "tweets.jsonl").string());
    for (const TweetRecord& record : data.records) {
        tweets << record.to_json().dump() << '\n';
    }

    std::ofstream labels(dir / "labels.csv");
    if (!labels) throw InputError("cannot write " + (dir / "labels.csv").string());
    textio::write_csv_row(labels, {"domain", "label"});
    std::vector<std::pair<std::string, urltools::TrustLabel>> rows(data.labels.begin(),
                                                                   data.labels.end());
    std::sort(rows.begin(), rows.end());
    for (const auto& [domain, label] : rows) {
        textio::write_csv_row(labels, {domain, urltools::trust_label_name(label)});
    }

    std::ofstream truth(dir / "truth.json");
    if (!truth) throw InputError("cannot write " + (dir / "truth.json").string());
    truth << data.manifest.dump(2) << '\n';
}

}  // namespace echo::synth
