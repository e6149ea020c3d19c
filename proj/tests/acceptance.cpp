// Acceptance gate: one [PASS]/[FAIL] line per criterion, exit 1 on any
// failure. Every bound is pinned as a named constant next to the check it
// guards; oracles are independent re-implementations (exhaustive
// enumeration, Monte Carlo, dense double sums, integer recounts), never the
// library's own numbers fed back to itself.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "echo/bicm.hpp"
#include "echo/community.hpp"
#include "echo/dataset.hpp"
#include "echo/graph.hpp"
#include "echo/pipeline.hpp"
#include "echo/rng.hpp"
#include "echo/synth.hpp"
#include "echo/urltools.hpp"
#include "echo/validation.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

echo::BipartiteGraph random_bipartite(int tops, int bottoms, double density,
                                      std::uint64_t seed) {
    echo::rng::SplitMix64 gen(seed);
    std::vector<std::pair<int, int>> pairs;
    for (int i = 0; i < tops; ++i) {
        for (int a = 0; a < bottoms; ++a) {
            if (gen.unit() < density) pairs.emplace_back(i, a);
        }
    }
    if (pairs.empty()) pairs.emplace_back(0, 0);
    return echo::BipartiteGraph::from_index_pairs(tops, bottoms, pairs);
}

// ---------------------------------------------------------------------------
// 1. BiCM fidelity: fitted expected degrees reproduce observed degrees.
// ---------------------------------------------------------------------------
bool criterion_bicm(std::string& detail) {
    constexpr int kGraphs = 50;
    constexpr double kResidualBound = 1e-6;  // max-norm over both layers
    constexpr double kSecondsPerFit = 5.0;

    echo::rng::SplitMix64 gen(101);
    double worst_residual = 0.0;
    double slowest = 0.0;
    for (int g = 0; g < kGraphs; ++g) {
        int tops, bottoms;
        double density;
        if (g == 0) {
            tops = 300, bottoms = 800, density = 0.05;
        } else if (g == 1) {
            tops = 300, bottoms = 800, density = 0.5;
        } else {
            tops = 5 + static_cast<int>(gen.next() % 296);
            bottoms = 8 + static_cast<int>(gen.next() % 793);
            density = 0.01 + 0.49 * gen.unit();
        }
        const auto graph = random_bipartite(tops, bottoms, density, gen.next());

        const auto start = Clock::now();
        const auto model = echo::bicm::fit(graph);
        slowest = std::max(slowest, seconds_since(start));

        // independent residual recount from the link probabilities alone
        double residual = 0.0;
        std::vector<double> column(static_cast<std::size_t>(bottoms), 0.0);
        for (int i = 0; i < tops; ++i) {
            double row = 0.0;
            for (int a = 0; a < bottoms; ++a) {
                const double p = model.link_probability(i, a);
                row += p;
                column[static_cast<std::size_t>(a)] += p;
            }
            residual = std::max(residual, std::abs(row - graph.top_degrees()[i]));
        }
        for (int a = 0; a < bottoms; ++a) {
            residual = std::max(
                residual, std::abs(column[static_cast<std::size_t>(a)] -
                                   graph.bottom_degrees()[a]));
        }
        worst_residual = std::max(worst_residual, residual);
    }

    char buffer[160];
    std::snprintf(buffer, sizeof(buffer),
                  "%d fits up to 300x800, worst residual %.2e (bound %.0e), "
                  "slowest fit %.2f s (bound %.0f s)",
                  kGraphs, worst_residual, kResidualBound, slowest, kSecondsPerFit);
    detail = buffer;
    return worst_residual <= kResidualBound && slowest <= kSecondsPerFit;
}

// ---------------------------------------------------------------------------
// 2. Poisson-Binomial exactness vs exhaustive enumeration and Monte Carlo.
// ---------------------------------------------------------------------------
bool criterion_poisson_binomial(std::string& detail) {
    constexpr double kEnumTolerance = 1e-12;
    constexpr int kEnumInstances = 3;
    constexpr int kMonteCarloDraws = 1'000'000;
    constexpr double kSigmaBound = 3.0;

    // Part A: 12x15 instances, all pairs, full 2^15 enumeration in long double
    double worst_enum = 0.0;
    for (int inst = 0; inst < kEnumInstances; ++inst) {
        const double density = inst == 0 ? 0.3 : (inst == 1 ? 0.5 : 0.15);
        const auto graph = random_bipartite(12, 15, density, 700 + inst);
        const auto model = echo::bicm::fit(graph);

        // dense rows for observed co-occurrences
        std::vector<std::uint32_t> row(12, 0);
        for (int i = 0; i < 12; ++i) {
            for (const int a : graph.top_neighbors(i)) {
                row[static_cast<std::size_t>(i)] |= (1u << a);
            }
        }
        const int bottoms = graph.bottom_count();
        for (int i = 0; i < 12; ++i) {
            for (int j = i + 1; j < 12; ++j) {
                std::vector<long double> q(static_cast<std::size_t>(bottoms));
                for (int a = 0; a < bottoms; ++a) {
                    q[static_cast<std::size_t>(a)] =
                        static_cast<long double>(model.link_probability(i, a)) *
                        static_cast<long double>(model.link_probability(j, a));
                }
                // pmf of the co-occurrence count over all 2^15 outcomes
                std::vector<long double> pmf(static_cast<std::size_t>(bottoms) + 1, 0.0L);
                for (std::uint32_t mask = 0; mask < (1u << bottoms); ++mask) {
                    long double prob = 1.0L;
                    for (int a = 0; a < bottoms; ++a) {
                        prob *= (mask >> a) & 1u ? q[static_cast<std::size_t>(a)]
                                                 : 1.0L - q[static_cast<std::size_t>(a)];
                    }
                    pmf[static_cast<std::size_t>(__builtin_popcount(mask))] += prob;
                }
                const int observed = __builtin_popcount(row[static_cast<std::size_t>(i)] &
                                                        row[static_cast<std::size_t>(j)]);
                for (const int t : {0, 1, observed, bottoms / 2, bottoms}) {
                    long double tail = 0.0L;
                    for (int v = bottoms; v >= t; --v) tail += pmf[static_cast<std::size_t>(v)];
                    const double want = static_cast<double>(tail);
                    const double got = echo::validation::pair_pvalue(model, i, j, t);
                    worst_enum = std::max(worst_enum, std::abs(got - want));
                }
            }
        }
    }

    // Part B: 100x200 instance, Monte Carlo over the ensemble marginal.
    // Only rows i and j of an ensemble draw matter for their co-occurrence,
    // and Bern(p_i)·Bern(p_j) == Bern(p_i p_j) by independence, so drawing
    // the count directly is an exact simulation of the ensemble.
    const auto graph = random_bipartite(100, 200, 0.08, 811);
    const auto model = echo::bicm::fit(graph);
    const auto table = echo::validation::cooccurrences(graph);

    struct Candidate {
        int i, j, observed;
        double exact;
    };
    std::vector<Candidate> chosen;
    auto try_add = [&](double lo, double hi) {
        for (const auto& pair : table.pairs) {
            const double p =
                echo::validation::pair_pvalue(model, pair.i, pair.j, pair.count);
            if (p > lo && p < hi) {
                for (const auto& c : chosen) {
                    if (c.i == pair.i && c.j == pair.j) goto next_pair;
                }
                chosen.push_back({pair.i, pair.j, pair.count, p});
                return;
            }
        next_pair:;
        }
    };
    try_add(0.2, 0.8);   // a central tail
    try_add(0.02, 0.2);  // a small one
    try_add(0.8, 0.98);  // a large one
    while (chosen.size() < 3) try_add(0.0, 1.0);

    double worst_sigma = 0.0;
    echo::rng::SplitMix64 mc(909);
    for (const auto& c : chosen) {
        std::vector<double> q(200);
        for (int a = 0; a < 200; ++a) {
            q[static_cast<std::size_t>(a)] =
                model.link_probability(c.i, a) * model.link_probability(c.j, a);
        }
        std::int64_t hits = 0;
        for (int draw = 0; draw < kMonteCarloDraws; ++draw) {
            int v = 0;
            for (int a = 0; a < 200; ++a) {
                v += mc.unit() < q[static_cast<std::size_t>(a)] ? 1 : 0;
            }
            hits += v >= c.observed ? 1 : 0;
        }
        const double empirical = static_cast<double>(hits) / kMonteCarloDraws;
        const double se = std::sqrt(c.exact * (1.0 - c.exact) / kMonteCarloDraws);
        const double sigma = se > 0.0 ? std::abs(empirical - c.exact) / se
                                      : (empirical == c.exact ? 0.0 : kSigmaBound + 1.0);
        worst_sigma = std::max(worst_sigma, sigma);
    }

    char buffer[200];
    std::snprintf(buffer, sizeof(buffer),
                  "12x15 enumeration worst |diff| %.2e (bound %.0e); 100x200 Monte "
                  "Carlo (%d draws, 3 pairs) worst %.2f sigma (bound %.0f)",
                  worst_enum, kEnumTolerance, kMonteCarloDraws, worst_sigma, kSigmaBound);
    detail = buffer;
    return worst_enum <= kEnumTolerance && worst_sigma <= kSigmaBound;
}

// ---------------------------------------------------------------------------
// 3. FDR vs an independent implementation of the step-up rule.
// ---------------------------------------------------------------------------
struct ReferenceBh {
    double threshold = 0.0;
    int rejected = 0;
    std::vector<char> selected;
};

ReferenceBh reference_bh(const std::vector<double>& pvalues, double alpha) {
    const int n = static_cast<int>(pvalues.size());
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return pvalues[static_cast<std::size_t>(a)] <
                                                pvalues[static_cast<std::size_t>(b)]; });
    int k = 0;
    for (int i = n; i >= 1; --i) {
        const double p = pvalues[static_cast<std::size_t>(order[static_cast<std::size_t>(i - 1)])];
        if (p <= static_cast<double>(i) * alpha / static_cast<double>(n)) {
            k = i;
            break;
        }
    }
    ReferenceBh result;
    result.rejected = k;
    result.threshold =
        k > 0 ? pvalues[static_cast<std::size_t>(order[static_cast<std::size_t>(k - 1)])] : 0.0;
    result.selected.assign(static_cast<std::size_t>(n), 0);
    if (k > 0) {
        for (int i = 0; i < n; ++i) {
            result.selected[static_cast<std::size_t>(i)] =
                pvalues[static_cast<std::size_t>(i)] <= result.threshold ? 1 : 0;
        }
    }
    return result;
}

bool criterion_fdr(std::string& detail) {
    constexpr int kVectors = 200;
    constexpr int kMaxLength = 10'000;
    const double alphas[] = {0.05, 0.01};

    echo::rng::SplitMix64 gen(303);
    long mismatches = 0;
    long checked = 0;
    for (int v = 0; v < kVectors; ++v) {
        int n;
        if (v == 0) n = 1;
        else if (v == 1) n = 2;
        else n = 1 + static_cast<int>(gen.next() % kMaxLength);

        std::vector<double> pvalues(static_cast<std::size_t>(n));
        for (auto& p : pvalues) p = gen.unit();
        if (v % 3 == 0) {  // planted signals near zero
            const int signals = std::max(1, n / 10);
            for (int s = 0; s < signals; ++s) {
                pvalues[gen.next() % static_cast<std::uint64_t>(n)] = 1e-4 * gen.unit();
            }
        }
        if (v % 4 == 0) {  // exact step-up boundary values
            for (int b = 0; b < std::min(5, n); ++b) {
                const int rank = 1 + static_cast<int>(gen.next() % static_cast<std::uint64_t>(n));
                pvalues[gen.next() % static_cast<std::uint64_t>(n)] =
                    static_cast<double>(rank) * 0.05 / static_cast<double>(n);
            }
        }
        if (v % 5 == 0 && n > 1) {  // ties
            for (int t = 0; t < n / 20; ++t) {
                pvalues[gen.next() % static_cast<std::uint64_t>(n)] =
                    pvalues[gen.next() % static_cast<std::uint64_t>(n)];
            }
        }
        if (v == 2) std::fill(pvalues.begin(), pvalues.end(), 1.0);

        for (const double alpha : alphas) {
            const auto got = echo::validation::fdr_select(pvalues, alpha);
            const auto want = reference_bh(pvalues, alpha);
            ++checked;
            if (got.rejected != want.rejected || got.threshold != want.threshold ||
                got.selected != want.selected) {
                ++mismatches;
            }
        }
    }

    char buffer[160];
    std::snprintf(buffer, sizeof(buffer),
                  "%d vectors (n up to %d) at alpha 0.05 and 0.01: %ld of %ld "
                  "selections exactly equal (tolerance: exact)",
                  kVectors, kMaxLength, checked - mismatches, checked);
    detail = buffer;
    return mismatches == 0;
}

// ---------------------------------------------------------------------------
// 4. Community recovery on planted partitions + brute-force modularity.
// ---------------------------------------------------------------------------
double bruteforce_modularity(const echo::UndirectedWeightedGraph& graph,
                             const std::unordered_map<std::string, int>& community) {
    const int n = graph.node_count();
    if (n == 0) return 0.0;
    std::vector<std::vector<double>> adjacency(
        static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(n), 0.0));
    for (int v = 0; v < n; ++v) {
        for (const auto& [u, w] : graph.neighbors(v)) {
            adjacency[static_cast<std::size_t>(v)][static_cast<std::size_t>(u)] = w;
        }
    }
    std::vector<double> strength(static_cast<std::size_t>(n), 0.0);
    double two_w = 0.0;
    for (int v = 0; v < n; ++v) {
        for (int u = 0; u < n; ++u) {
            strength[static_cast<std::size_t>(v)] +=
                adjacency[static_cast<std::size_t>(v)][static_cast<std::size_t>(u)];
        }
        two_w += strength[static_cast<std::size_t>(v)];
    }
    if (two_w <= 0.0) return 0.0;
    double q = 0.0;
    for (int v = 0; v < n; ++v) {
        for (int u = 0; u < n; ++u) {
            if (community.at(graph.id(v)) != community.at(graph.id(u))) continue;
            q += (adjacency[static_cast<std::size_t>(v)][static_cast<std::size_t>(u)] -
                  strength[static_cast<std::size_t>(v)] *
                      strength[static_cast<std::size_t>(u)] / two_w) /
                 two_w;
        }
    }
    return q;
}

bool partitions_equal(const std::vector<std::string>& nodes,
                      const std::unordered_map<std::string, int>& got,
                      const std::vector<int>& planted) {
    for (std::size_t a = 0; a < nodes.size(); ++a) {
        for (std::size_t b = a + 1; b < nodes.size(); ++b) {
            const bool same_got = got.at(nodes[a]) == got.at(nodes[b]);
            const bool same_planted = planted[a] == planted[b];
            if (same_got != same_planted) return false;
        }
    }
    return true;
}

bool criterion_louvain(std::string& detail) {
    constexpr int kSeeds = 40;
    constexpr int kMinimumExact = 38;  // 95% of 40
    constexpr double kModularityTolerance = 1e-12;
    constexpr int kRestarts = 8;

    int exact_two = 0;
    int exact_four = 0;
    double worst_q = 0.0;
    for (int seed = 0; seed < kSeeds; ++seed) {
        for (const int blocks : {2, 4}) {
            const int n = 64;
            const int per_block = n / blocks;
            // p_in/p_out is 25 for two blocks and 15 for four
            const double p_in = blocks == 2 ? 0.5 : 0.6;
            const double p_out = blocks == 2 ? 0.02 : 0.04;

            echo::rng::SplitMix64 gen(
                echo::rng::child_seed(404, static_cast<std::uint64_t>(seed * 2 + blocks)));
            std::vector<std::string> nodes;
            std::vector<int> planted;
            for (int v = 0; v < n; ++v) {
                char name[8];
                std::snprintf(name, sizeof(name), "n%02d", v);
                nodes.emplace_back(name);
                planted.push_back(v / per_block);
            }
            std::vector<std::tuple<std::string, std::string, double>> edges;
            for (int a = 0; a < n; ++a) {
                for (int b = a + 1; b < n; ++b) {
                    const double p = planted[static_cast<std::size_t>(a)] ==
                                             planted[static_cast<std::size_t>(b)]
                                         ? p_in
                                         : p_out;
                    if (gen.unit() < p) edges.emplace_back(nodes[static_cast<std::size_t>(a)],
                                                           nodes[static_cast<std::size_t>(b)], 1.0);
                }
            }
            const auto graph = echo::UndirectedWeightedGraph::from_edges(edges);

            echo::community::LouvainOptions options;
            options.shuffles = kRestarts;
            options.seed = static_cast<std::uint64_t>(seed);
            const auto partition = echo::community::louvain_shuffled(graph, options);

            // the reported score must match the dense double sum on every run
            const double q = bruteforce_modularity(graph, partition.community);
            worst_q = std::max(worst_q, std::abs(q - partition.modularity));

            std::vector<int> planted_by_graph_order;
            for (const auto& id : graph.ids()) {
                planted_by_graph_order.push_back(planted[static_cast<std::size_t>(
                    std::stoi(id.substr(1)))]);
            }
            if (partitions_equal(graph.ids(), partition.community, planted_by_graph_order)) {
                (blocks == 2 ? exact_two : exact_four) += 1;
            }
        }
    }

    char buffer[200];
    std::snprintf(buffer, sizeof(buffer),
                  "2-block exact %d/%d, 4-block exact %d/%d (need %d); worst "
                  "|Q - bruteforce| %.2e (bound %.0e)",
                  exact_two, kSeeds, exact_four, kSeeds, kMinimumExact, worst_q,
                  kModularityTolerance);
    detail = buffer;
    return exact_two >= kMinimumExact && exact_four >= kMinimumExact &&
           worst_q <= kModularityTolerance;
}

// ---------------------------------------------------------------------------
// 5. Label propagation on planted two-camp retweet networks.
// ---------------------------------------------------------------------------
bool criterion_propagation(std::string& detail) {
    constexpr int kSeeds = 20;
    constexpr int kCampSize = 100;
    constexpr int kChordsPerCamp = 150;
    constexpr double kAccuracyBound = 0.95;

    double accuracy_sum = 0.0;
    bool seeds_immutable = true;
    for (int seed = 0; seed < kSeeds; ++seed) {
        echo::rng::SplitMix64 gen(echo::rng::child_seed(505, static_cast<std::uint64_t>(seed)));
        auto name = [](int camp, int v) {
            char buffer[8];
            std::snprintf(buffer, sizeof(buffer), "%c%03d", camp == 0 ? 'a' : 'b', v);
            return std::string(buffer);
        };
        std::vector<std::tuple<std::string, std::string, std::int64_t>> edges;
        for (int camp = 0; camp < 2; ++camp) {
            for (int v = 0; v < kCampSize; ++v) {  // a ring keeps each camp connected
                edges.emplace_back(name(camp, v), name(camp, (v + 1) % kCampSize), 1);
            }
            for (int c = 0; c < kChordsPerCamp; ++c) {
                const int u = static_cast<int>(gen.next() % kCampSize);
                int v = static_cast<int>(gen.next() % kCampSize);
                if (v == u) v = (v + 1) % kCampSize;
                edges.emplace_back(name(camp, u), name(camp, v), 1);
            }
        }
        // 5 cross edges out of ~505: a 1% crossing rate
        for (int c = 0; c < 5; ++c) {
            const int u = static_cast<int>(gen.next() % kCampSize);
            const int v = static_cast<int>(gen.next() % kCampSize);
            if (gen.next() & 1u) {
                edges.emplace_back(name(0, u), name(1, v), 1);
            } else {
                edges.emplace_back(name(1, v), name(0, u), 1);
            }
        }
        const auto graph = echo::DirectedWeightedGraph::from_edges(edges);

        const std::unordered_map<std::string, int> seeds = {{name(0, 0), 1}, {name(1, 0), 2}};
        echo::community::LabelingOptions options;
        options.weighted = false;
        options.seed = echo::rng::child_seed(506, static_cast<std::uint64_t>(seed));
        const auto labeling = echo::community::propagate_labels(graph, seeds, options);

        if (labeling.labels.at(name(0, 0)) != 1 || labeling.labels.at(name(1, 0)) != 2) {
            seeds_immutable = false;
        }
        int correct = 0;
        for (int camp = 0; camp < 2; ++camp) {
            for (int v = 1; v < kCampSize; ++v) {
                const auto it = labeling.labels.find(name(camp, v));
                if (it != labeling.labels.end() && it->second == camp + 1) ++correct;
            }
        }
        accuracy_sum += static_cast<double>(correct) / (2.0 * (kCampSize - 1));
    }
    const double accuracy = accuracy_sum / kSeeds;

    char buffer[160];
    std::snprintf(buffer, sizeof(buffer),
                  "two camps of %d, 1%% cross edges: mean accuracy %.4f over %d seeds "
                  "(bound %.2f); seeds immutable on every run: %s",
                  kCampSize, accuracy, kSeeds, kAccuracyBound,
                  seeds_immutable ? "yes" : "NO");
    detail = buffer;
    return accuracy >= kAccuracyBound && seeds_immutable;
}

// ---------------------------------------------------------------------------
// 6 + 7. End-to-end planted recovery and metric conservation.
// ---------------------------------------------------------------------------
struct ConservationState {
    long runs = 0;
    long conservation_failures = 0;
    long purity_failures = 0;
    long chamber_failures = 0;
};

// integer recount of one purity report against the dataset (zero tolerance)
bool verify_purity(const echo::Dataset& dataset, const echo::urltools::TrustLabelTable& table,
                   const echo::pipeline::PurityReport& report,
                   const std::vector<std::vector<std::string>>& member_lists) {
    using echo::urltools::TrustLabel;
    if (report.groups.size() != member_lists.size()) return false;
    for (std::size_t g = 0; g < report.groups.size(); ++g) {
        std::map<int, std::int64_t> url_totals;  // url index -> group multiplicity
        if (report.members_are_users) {
            for (const auto& member : member_lists[g]) {
                const int user = dataset.user_index(member);
                for (const auto& [u, url, count] : dataset.shares()) {
                    if (u == user) url_totals[url] += count;
                }
            }
        } else {
            for (const auto& member : member_lists[g]) {
                const int url = dataset.url_index(member);
                std::int64_t total = 0;
                for (const auto& [u, shared_url, count] : dataset.shares()) {
                    if (shared_url == url) total += count;
                }
                url_totals[url] += total;
            }
        }
        std::int64_t t = 0, n = 0, unc = 0;
        for (const auto& [url, total] : url_totals) {
            const std::int64_t amount =
                report.mode == echo::pipeline::CountMode::distinct ? 1 : total;
            switch (echo::urltools::url_label(dataset.urls()[static_cast<std::size_t>(url)],
                                              table)) {
                case TrustLabel::T: t += amount; break;
                case TrustLabel::N: n += amount; break;
                case TrustLabel::UNC: unc += amount; break;
                default: break;  // platform and satire never count
            }
        }
        const auto& group = report.groups[g];
        const std::int64_t items = t + n + unc;  // the simplex identity, in integers
        if (group.items != items) return false;
        if (items == 0) {
            if (group.t != 0.0 || group.n != 0.0 || group.unc != 0.0) return false;
            continue;
        }
        if (group.t != static_cast<double>(t) / static_cast<double>(items)) return false;
        if (group.n != static_cast<double>(n) / static_cast<double>(items)) return false;
        if (group.unc != static_cast<double>(unc) / static_cast<double>(items)) return false;
    }
    return true;
}

// every emitted chamber must re-check as a weakly connected component of its
// (NEC, DiCo) bucket in the retweet graph
bool verify_chambers(const echo::Dataset& dataset, const echo::pipeline::RunResult& result) {
    std::map<std::pair<int, int>, std::unordered_set<std::string>> buckets;
    for (const auto& [user, dico] : result.dico.dico) {
        const auto it = result.user_nec.nec.find(user);
        if (it != result.user_nec.nec.end()) buckets[{it->second, dico}].insert(user);
    }
    const auto& graph = dataset.retweet_graph();
    for (const auto& chamber : result.chambers.chambers) {
        if (chamber.members.size() < 2) return false;
        const auto bucket_it = buckets.find({chamber.nec, chamber.dico});
        if (bucket_it == buckets.end()) return false;
        const auto& bucket = bucket_it->second;
        for (const auto& member : chamber.members) {
            if (bucket.count(member) == 0) return false;
        }
        // flood the bucket from the first member; the reachable set must be
        // exactly the chamber
        std::set<std::string> component;
        std::vector<std::string> frontier = {chamber.members.front()};
        component.insert(chamber.members.front());
        while (!frontier.empty()) {
            const std::string node = frontier.back();
            frontier.pop_back();
            const auto index = graph.index_of(node);
            if (!index) return false;
            for (const int next : graph.undirected_neighbors(*index)) {
                const std::string& next_id = graph.id(next);
                if (bucket.count(next_id) == 0 || component.count(next_id) > 0) continue;
                component.insert(next_id);
                frontier.push_back(next_id);
            }
        }
        const std::set<std::string> members(chamber.members.begin(), chamber.members.end());
        if (component != members) return false;
    }
    return true;
}

void check_conservation(const echo::Dataset& dataset,
                        const echo::urltools::TrustLabelTable& table,
                        const echo::pipeline::RunResult& result, ConservationState& state) {
    ++state.runs;

    std::int64_t flow_weight = 0;
    for (const auto& edge : result.flow.edges()) flow_weight += edge.weight;
    if (flow_weight != dataset.retweet_graph().total_weight()) ++state.conservation_failures;

    bool purity_ok = true;
    if (result.chamber_purity.has_value()) {
        std::vector<std::vector<std::string>> chamber_members;
        for (const auto& chamber : result.chambers.chambers) {
            chamber_members.push_back(chamber.members);
        }
        purity_ok = purity_ok &&
                    verify_purity(dataset, table, *result.chamber_purity, chamber_members);
    }
    if (result.url_nec_purity.has_value() && result.url_nec.has_value()) {
        std::map<int, std::vector<std::string>> per_nec;
        for (const auto& [url, nec] : result.url_nec->nec) per_nec[nec].push_back(url);
        std::vector<std::vector<std::string>> url_members;
        for (auto& [nec, members] : per_nec) {
            std::sort(members.begin(), members.end());
            url_members.push_back(members);
        }
        purity_ok = purity_ok &&
                    verify_purity(dataset, table, *result.url_nec_purity, url_members);
    }
    if (!purity_ok) ++state.purity_failures;

    if (!verify_chambers(dataset, result)) ++state.chamber_failures;
}

struct EndToEndOutcome {
    int recovered = 0;
    int clean_noise = 0;
    double slowest_run = 0.0;
    ConservationState conservation;
};

EndToEndOutcome run_end_to_end() {
    constexpr int kPlantedSeeds = 30;
    constexpr int kNoiseSeeds = 40;
    constexpr double kF1Bound = 0.9;

    EndToEndOutcome outcome;
    for (int s = 0; s < kPlantedSeeds; ++s) {
        echo::synth::SyntheticConfig config;
        config.camps = 2;
        config.verified_per_camp = 2;
        // chambers must stay a minority of the population: when planted
        // members dominate, the configuration model absorbs the structure
        // into its degree sequence and nothing is left to validate
        config.unverified_per_camp = 150;
        config.chambers_per_camp = 1;  // one per camp: two planted chambers
        const int sizes[] = {20, 35, 50};
        config.chamber_size = sizes[s % 3];
        config.chamber_url_pool = 8;
        config.noise_url_pool = 150;
        config.noise_urls_per_user = 3;
        config.retweets_per_user = 3;
        config.seed = 1000 + static_cast<std::uint64_t>(s);
        const auto data = echo::synth::generate_synthetic(config);
        const auto dataset = echo::Dataset::from_records(data.records);

        echo::pipeline::PipelineOptions options;
        options.alpha = 0.05;
        options.shuffles = 30;
        options.seed = config.seed;
        options.min_flow_weight = 0;
        options.threads = 2;

        const auto start = Clock::now();
        const auto result = echo::pipeline::run_all(dataset, &data.labels, options);
        outcome.slowest_run = std::max(outcome.slowest_run, seconds_since(start));

        check_conservation(dataset, data.labels, result, outcome.conservation);

        bool all_recovered = true;
        for (const auto& group : data.manifest.at("groups")) {
            const auto members = group.at("members").get<std::vector<std::string>>();
            const std::set<std::string> truth(members.begin(), members.end());
            double best_f1 = 0.0;
            for (const auto& chamber : result.chambers.chambers) {
                std::size_t overlap = 0;
                for (const auto& member : chamber.members) {
                    overlap += truth.count(member);
                }
                const double f1 = 2.0 * static_cast<double>(overlap) /
                                  static_cast<double>(chamber.members.size() + truth.size());
                best_f1 = std::max(best_f1, f1);
            }
            if (best_f1 < kF1Bound) all_recovered = false;
        }
        if (all_recovered) ++outcome.recovered;
    }

    for (int s = 0; s < kNoiseSeeds; ++s) {
        echo::synth::SyntheticConfig config;
        config.camps = 2;
        config.verified_per_camp = 2;
        config.unverified_per_camp = 40;
        config.chambers_per_camp = 0;  // noise only
        // pool sized so a shared URL is unremarkable under the null
        // (P(V >= 1) ~ k^2/pool = 0.09 > alpha): colliding pairs must not
        // all clear the step-up bound at the top rank
        config.noise_url_pool = 100;
        config.noise_urls_per_user = 3;
        config.retweets_per_user = 3;
        config.seed = 5000 + static_cast<std::uint64_t>(s);
        const auto data = echo::synth::generate_synthetic(config);
        const auto dataset = echo::Dataset::from_records(data.records);

        echo::pipeline::PipelineOptions options;
        options.alpha = 0.05;
        options.shuffles = 30;
        options.seed = config.seed;
        options.min_flow_weight = 0;
        options.threads = 2;

        const auto start = Clock::now();
        const auto result = echo::pipeline::run_all(dataset, &data.labels, options);
        outcome.slowest_run = std::max(outcome.slowest_run, seconds_since(start));

        check_conservation(dataset, data.labels, result, outcome.conservation);
        if (result.chambers.chambers.empty()) ++outcome.clean_noise;
    }
    return outcome;
}

bool criterion_end_to_end(const EndToEndOutcome& outcome, std::string& detail) {
    constexpr int kRecoveredBound = 27;   // 90% of 30
    constexpr int kCleanNoiseBound = 38;  // 95% of 40
    constexpr double kSecondsPerRun = 60.0;

    char buffer[220];
    std::snprintf(buffer, sizeof(buffer),
                  "planted chambers recovered with F1 >= 0.9 in %d/30 seeds (need %d); "
                  "noise-only clean in %d/40 (need %d); slowest run %.1f s (bound %.0f s)",
                  outcome.recovered, kRecoveredBound, outcome.clean_noise, kCleanNoiseBound,
                  outcome.slowest_run, kSecondsPerRun);
    detail = buffer;
    return outcome.recovered >= kRecoveredBound && outcome.clean_noise >= kCleanNoiseBound &&
           outcome.slowest_run <= kSecondsPerRun;
}

bool criterion_conservation(const ConservationState& state, std::string& detail) {
    char buffer[220];
    std::snprintf(buffer, sizeof(buffer),
                  "%ld synthetic runs: %ld flow-conservation, %ld purity-recount, %ld "
                  "chamber-reverification failures (zero tolerance)",
                  state.runs, state.conservation_failures, state.purity_failures,
                  state.chamber_failures);
    detail = buffer;
    return state.runs > 0 && state.conservation_failures == 0 &&
           state.purity_failures == 0 && state.chamber_failures == 0;
}

// ---------------------------------------------------------------------------
// 8. Determinism: byte-identical report bundles.
// ---------------------------------------------------------------------------
bool criterion_determinism(std::string& detail) {
    namespace fs = std::filesystem;

    echo::synth::SyntheticConfig config;
    config.camps = 2;
    config.verified_per_camp = 2;
    config.unverified_per_camp = 40;
    config.chambers_per_camp = 1;
    config.chamber_size = 16;
    config.seed = 77;
    const auto data = echo::synth::generate_synthetic(config);
    const auto dataset = echo::Dataset::from_records(data.records);

    echo::pipeline::PipelineOptions options;
    options.alpha = 0.05;
    options.shuffles = 40;
    options.seed = 77;
    options.min_flow_weight = 0;

    const auto manifest = echo::pipeline::run_manifest(
        options, {{"input", "synthetic"}}, {"acceptance"});
    const fs::path root = fs::temp_directory_path() / "ecd_acceptance_determinism";
    fs::remove_all(root);

    const auto first = echo::pipeline::run_all(dataset, &data.labels, options);
    echo::pipeline::write_report_bundle((root / "a").string(), first, manifest);
    const auto second = echo::pipeline::run_all(dataset, &data.labels, options);
    echo::pipeline::write_report_bundle((root / "b").string(), second, manifest);

    const char* files[] = {"dico_stats.csv",  "nec_members.csv",     "chambers.json",
                           "flow_edges.csv",  "purity.json",         "trust_histogram.csv",
                           "run_manifest.json"};
    int identical = 0;
    for (const char* name : files) {
        std::ifstream a(root / "a" / name, std::ios::binary);
        std::ifstream b(root / "b" / name, std::ios::binary);
        std::ostringstream sa, sb;
        sa << a.rdbuf();
        sb << b.rdbuf();
        if (a.good() && b.good() && !sa.str().empty() && sa.str() == sb.str()) ++identical;
    }
    fs::remove_all(root);

    char buffer[160];
    std::snprintf(buffer, sizeof(buffer),
                  "two identical runs: %d/7 bundle files byte-identical and non-empty",
                  identical);
    detail = buffer;
    return identical == 7;
}

}  // namespace

int main() {
    int failures = 0;
    auto report = [&](int number, const char* name, bool pass, const std::string& detail) {
        std::printf("[%s] criterion %d %s: %s\n", pass ? "PASS" : "FAIL", number, name,
                    detail.c_str());
        std::fflush(stdout);
        if (!pass) ++failures;
    };

    std::string detail;
    report(1, "bicm-fidelity", criterion_bicm(detail), detail);
    report(2, "poisson-binomial-exactness", criterion_poisson_binomial(detail), detail);
    report(3, "fdr-correctness", criterion_fdr(detail), detail);
    report(4, "community-recovery", criterion_louvain(detail), detail);
    report(5, "label-propagation", criterion_propagation(detail), detail);

    const EndToEndOutcome outcome = run_end_to_end();
    report(6, "end-to-end-recovery", criterion_end_to_end(outcome, detail), detail);
    report(7, "metric-conservation", criterion_conservation(outcome.conservation, detail),
           detail);
    report(8, "determinism", criterion_determinism(detail), detail);

    return failures == 0 ? 0 : 1;
}
