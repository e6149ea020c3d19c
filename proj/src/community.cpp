#include "echo/community.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <ostream>
#include <utility>

#include "echo/errors.hpp"
#include "echo/rng.hpp"
#include "echo/textio.hpp"

namespace echo::community {

namespace {

// Index-based working graph for the multilevel pass. Self-loop weights are
// stored once, mirroring the matrix convention of modularity().
struct FlatGraph {
    std::vector<std::vector<std::pair<int, double>>> adj;
    std::vector<double> strength;
    double two_w = 0.0;

    int size() const { return static_cast<int>(adj.size()); }
};

FlatGraph flatten(const UndirectedWeightedGraph& graph) {
    FlatGraph flat;
    const int n = graph.node_count();
    flat.adj.resize(static_cast<std::size_t>(n));
    flat.strength.resize(static_cast<std::size_t>(n));
    for (int v = 0; v < n; ++v) {
        flat.adj[static_cast<std::size_t>(v)] = graph.neighbors(v);
        flat.strength[static_cast<std::size_t>(v)] = graph.strength(v);
    }
    flat.two_w = graph.total_strength();
    return flat;
}

// One level of local moves. Nodes are visited in a freshly shuffled order
// every sweep; a node joins the candidate community with the largest gain,
// ties going to the smallest community id. Returns whether any node moved.
bool local_moves(const FlatGraph& graph, std::vector<int>& community, rng::SplitMix64& gen) {
    const int n = graph.size();
    if (n == 0 || graph.two_w <= 0.0) return false;

    std::vector<double> total(graph.strength);  // community strength sums
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);

    bool any_move = false;
    while (true) {
        rng::shuffle(order, gen);
        int moves = 0;
        for (int v : order) {
            const int old_comm = community[static_cast<std::size_t>(v)];
            const double s_v = graph.strength[static_cast<std::size_t>(v)];

            // weight from v to each neighbouring community (self-loops stay
            // with v wherever it goes, so they cancel out of the comparison)
            std::map<int, double> weight_to;
            for (const auto& [u, w] : graph.adj[static_cast<std::size_t>(v)]) {
                if (u == v) continue;
                weight_to[community[static_cast<std::size_t>(u)]] += w;
            }
            weight_to.emplace(old_comm, 0.0);

            total[static_cast<std::size_t>(old_comm)] -= s_v;
            int best_comm = old_comm;
            double best_gain = 0.0;
            bool first = true;
            for (const auto& [cand, weight] : weight_to) {
                const double gain =
                    weight - total[static_cast<std::size_t>(cand)] * s_v / graph.two_w;
                if (first || gain > best_gain) {
                    best_gain = gain;
                    best_comm = cand;
                    first = false;
                }
            }
            total[static_cast<std::size_t>(best_comm)] += s_v;
            if (best_comm != old_comm) {
                community[static_cast<std::size_t>(v)] = best_comm;
                ++moves;
            }
        }
        if (moves == 0) break;
        any_move = true;
    }
    return any_move;
}

// Renumbers community ids to 0..k-1 in ascending old-id order; returns k.
int compact(std::vector<int>& community) {
    std::map<int, int> dense;
    for (int c : community) dense.emplace(c, 0);
    int next = 0;
    for (auto& [old_id, new_id] : dense) new_id = next++;
    for (int& c : community) c = dense.at(c);
    return next;
}

FlatGraph aggregate(const FlatGraph& graph, const std::vector<int>& community, int groups) {
    FlatGraph coarse;
    coarse.adj.resize(static_cast<std::size_t>(groups));
    coarse.strength.assign(static_cast<std::size_t>(groups), 0.0);
    coarse.two_w = graph.two_w;

    std::vector<double> internal(static_cast<std::size_t>(groups), 0.0);
    std::map<std::pair<int, int>, double> cross;
    for (int v = 0; v < graph.size(); ++v) {
        const int cv = community[static_cast<std::size_t>(v)];
        coarse.strength[static_cast<std::size_t>(cv)] += graph.strength[static_cast<std::size_t>(v)];
        for (const auto& [u, w] : graph.adj[static_cast<std::size_t>(v)]) {
            const int cu = community[static_cast<std::size_t>(u)];
            if (cu == cv) {
                // ordered pair sum: off-diagonal entries show up from both
                // endpoints, self-loops once — exactly the matrix convention
                internal[static_cast<std::size_t>(cv)] += w;
            } else if (cv < cu) {
                cross[{cv, cu}] += w;
            }
        }
    }
    for (int c = 0; c < groups; ++c) {
        if (internal[static_cast<std::size_t>(c)] != 0.0) {
            coarse.adj[static_cast<std::size_t>(c)].emplace_back(c, internal[static_cast<std::size_t>(c)]);
        }
    }
    for (const auto& [pair, w] : cross) {
        coarse.adj[static_cast<std::size_t>(pair.first)].emplace_back(pair.second, w);
        coarse.adj[static_cast<std::size_t>(pair.second)].emplace_back(pair.first, w);
    }
    return coarse;
}

}  // namespace

double modularity(const UndirectedWeightedGraph& graph, const std::vector<int>& assignment) {
    const int n = graph.node_count();
    if (static_cast<int>(assignment.size()) != n) {
        throw InputError("modularity: assignment size does not match the graph");
    }
    const double two_w = graph.total_strength();
    if (two_w <= 0.0) return 0.0;

    std::map<int, std::pair<double, double>> per_community;  // (internal, strength)
    for (int v = 0; v < n; ++v) {
        const int c = assignment[static_cast<std::size_t>(v)];
        auto& [internal, strength_sum] = per_community[c];
        strength_sum += graph.strength(v);
        for (const auto& [u, w] : graph.neighbors(v)) {
            if (assignment[static_cast<std::size_t>(u)] == c) internal += w;
        }
    }
    double q = 0.0;
    for (const auto& [c, sums] : per_community) {
        q += (sums.first - sums.second * sums.second / two_w) / two_w;
    }
    return q;
}

std::vector<int> louvain_once(const UndirectedWeightedGraph& graph, std::uint64_t seed) {
    const int n = graph.node_count();
    std::vector<int> full(static_cast<std::size_t>(n));
    std::iota(full.begin(), full.end(), 0);
    if (n == 0) return full;

    rng::SplitMix64 gen(seed);
    FlatGraph level = flatten(graph);
    while (true) {
        std::vector<int> community(static_cast<std::size_t>(level.size()));
        std::iota(community.begin(), community.end(), 0);
        const bool moved = local_moves(level, community, gen);
        if (!moved) break;
        const int groups = compact(community);
        for (int& c : full) c = community[static_cast<std::size_t>(c)];
        if (groups == level.size()) break;
        level = aggregate(level, community, groups);
    }
    compact(full);
    return full;
}

Partition louvain_shuffled(const UndirectedWeightedGraph& graph, const LouvainOptions& options) {
    Partition best;
    best.modularity = 0.0;
    best.shuffle_seed = options.seed;
    const int n = graph.node_count();
    if (n == 0) return best;

    const int restarts = std::max(1, options.shuffles);
    std::vector<int> best_assign;
    double best_q = 0.0;
    bool have_best = false;
    for (int s = 0; s < restarts; ++s) {
        const std::uint64_t child = rng::child_seed(options.seed, static_cast<std::uint64_t>(s));
        std::vector<int> assign = louvain_once(graph, child);
        const double q = modularity(graph, assign);
        if (!have_best || q > best_q) {
            have_best = true;
            best_q = q;
            best_assign = std::move(assign);
            best.shuffle_seed = child;
        }
    }

    // renumber by first appearance in node-index order
    std::unordered_map<int, int> first_seen;
    for (int v = 0; v < n; ++v) {
        auto [it, inserted] =
            first_seen.emplace(best_assign[static_cast<std::size_t>(v)],
                               static_cast<int>(first_seen.size()));
        best_assign[static_cast<std::size_t>(v)] = it->second;
    }
    for (int v = 0; v < n; ++v) {
        best.community[graph.ids()[static_cast<std::size_t>(v)]] =
            best_assign[static_cast<std::size_t>(v)];
    }
    best.modularity = best_q;
    return best;
}

SeededLabeling propagate_labels(const DirectedWeightedGraph& graph,
                                const std::unordered_map<std::string, int>& seeds,
                                const LabelingOptions& options) {
    const int n = graph.node_count();
    SeededLabeling result;

    // weighted undirected view, parallel edges coalesced and loops dropped
    std::vector<std::vector<std::pair<int, double>>> adj(static_cast<std::size_t>(n));
    for (int v = 0; v < n; ++v) {
        for (const auto& [target, weight] : graph.out_edges(v)) {
            if (target == v) continue;
            adj[static_cast<std::size_t>(v)].emplace_back(target, static_cast<double>(weight));
            adj[static_cast<std::size_t>(target)].emplace_back(v, static_cast<double>(weight));
        }
    }
    for (auto& row : adj) {
        std::sort(row.begin(), row.end());
        std::vector<std::pair<int, double>> merged;
        for (const auto& [u, w] : row) {
            if (!merged.empty() && merged.back().first == u) merged.back().second += w;
            else merged.emplace_back(u, w);
        }
        row = std::move(merged);
    }

    std::vector<int> label(static_cast<std::size_t>(n), -1);
    std::vector<char> is_seed(static_cast<std::size_t>(n), 0);
    for (const auto& [id, value] : seeds) {
        const std::optional<int> v = graph.index_of(id);
        if (!v.has_value()) continue;  // a seed with no retweet edges has nothing to spread
        label[static_cast<std::size_t>(*v)] = value;
        is_seed[static_cast<std::size_t>(*v)] = 1;
    }

    rng::SplitMix64 gen(options.seed);
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);

    for (int sweep = 0; sweep < options.max_sweeps; ++sweep) {
        rng::shuffle(order, gen);
        int changed = 0;
        for (int v : order) {
            if (is_seed[static_cast<std::size_t>(v)]) continue;
            std::map<int, double> score;
            for (const auto& [u, w] : adj[static_cast<std::size_t>(v)]) {
                const int lu = label[static_cast<std::size_t>(u)];
                if (lu == -1) continue;
                score[lu] += options.weighted ? w : 1.0;
            }
            if (score.empty()) continue;
            double best = 0.0;
            bool first = true;
            for (const auto& [l, s] : score) {
                if (first || s > best) {
                    best = s;
                    first = false;
                }
            }
            std::vector<int> winners;
            for (const auto& [l, s] : score) {
                if (s == best) winners.push_back(l);
            }
            const int current = label[static_cast<std::size_t>(v)];
            if (std::find(winners.begin(), winners.end(), current) != winners.end()) {
                continue;  // keeping a maximal label prevents two-label oscillation
            }
            const int chosen = winners[static_cast<std::size_t>(gen.below(winners.size()))];
            label[static_cast<std::size_t>(v)] = chosen;
            ++changed;
        }
        ++result.sweeps;
        if (changed == 0) {
            result.converged = true;
            break;
        }
    }

    for (int v = 0; v < n; ++v) {
        if (label[static_cast<std::size_t>(v)] != -1) {
            result.labels[graph.ids()[static_cast<std::size_t>(v)]] = label[static_cast<std::size_t>(v)];
        }
    }
    return result;
}

void write_labels_csv(std::ostream& out, const std::unordered_map<std::string, int>& labels,
                      const std::unordered_map<std::string, int>* seeds) {
    std::vector<std::string> header{"node", "community"};
    if (seeds != nullptr) header.push_back("seed");
    textio::write_csv_row(out, header);

    std::vector<std::pair<std::string, int>> rows(labels.begin(), labels.end());
    std::sort(rows.begin(), rows.end());
    for (const auto& [node, value] : rows) {
        std::vector<std::string> fields{node, std::to_string(value)};
        if (seeds != nullptr) fields.push_back(seeds->count(node) ? "1" : "0");
        textio::write_csv_row(out, fields);
    }
}

}  // namespace echo::community
