#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "echo/graph.hpp"

// Community detection: modularity maximization with restarts over shuffled
// node orders, and seeded label propagation over a retweet network.

namespace echo::community {

/// Modularity of an assignment (one community id per node index). Uses the
/// convention where the adjacency matrix holds each self-loop weight once,
/// strengths are row sums, and 2W is the total strength. Empty graphs score 0.
double modularity(const UndirectedWeightedGraph& graph, const std::vector<int>& assignment);

struct LouvainOptions {
    int shuffles = 1000;       // independent restarts over shuffled node orders
    std::uint64_t seed = 0;    // run seed; restart s uses child_seed(seed, s)
};

/// Multilevel modularity optimization, restarted `shuffles` times; returns
/// the partition with the highest modularity (first occurrence wins ties).
Partition louvain_shuffled(const UndirectedWeightedGraph& graph, const LouvainOptions& options = {});

/// Single run with an explicit seed; exposed for tests.
std::vector<int> louvain_once(const UndirectedWeightedGraph& graph, std::uint64_t seed);

struct LabelingOptions {
    bool weighted = true;      // majority weighted by edge weight, else by count
    std::uint64_t seed = 0;    // drives sweep order and tie breaks
    int max_sweeps = 100;
};

struct SeededLabeling {
    std::unordered_map<std::string, int> labels;  // nodes that ended up labeled
    bool converged = false;                       // a sweep changed nothing
    int sweeps = 0;                               // sweeps executed
};

/// Raghavan-style asynchronous label propagation over the undirected view of
/// a directed graph. Seed labels never change; unlabeled nodes take the
/// (weighted) majority label of their labeled neighbours, keeping their
/// current label when it is among the winners and otherwise breaking ties
/// uniformly at random. Seed ids absent from the graph are ignored.
SeededLabeling propagate_labels(const DirectedWeightedGraph& graph,
                                const std::unordered_map<std::string, int>& seeds,
                                const LabelingOptions& options = {});

/// CSV rows "node,community" (plus "seed" flag when seeds are given).
void write_labels_csv(std::ostream& out, const std::unordered_map<std::string, int>& labels,
                      const std::unordered_map<std::string, int>* seeds = nullptr);

}  // namespace echo::community
