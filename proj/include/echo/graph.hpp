#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

// Foundational graph types. Node identifiers are opaque strings at the API
// boundary and dense integer indices internally; the mapping is part of each
// graph value and indices are assigned in first-appearance order so that runs
// are reproducible byte for byte.

namespace echo {

/// Binary bipartite graph over a top and a bottom layer.
class BipartiteGraph {
public:
    /// Builds from (top_id, bottom_id) pairs. Duplicate pairs collapse to a
    /// single edge. Throws InputError("empty network") on an empty list.
    static BipartiteGraph from_edges(const std::vector<std::pair<std::string, std::string>>& edges);

    /// Builds from index pairs with fixed layer sizes (ids become decimal
    /// strings). Used by generators and tests.
    static BipartiteGraph from_index_pairs(int top_count, int bottom_count,
                                           const std::vector<std::pair<int, int>>& edges);

    int top_count() const { return static_cast<int>(top_ids_.size()); }
    int bottom_count() const { return static_cast<int>(bottom_ids_.size()); }
    std::int64_t edge_count() const { return edge_count_; }

    const std::vector<int>& top_degrees() const { return top_degrees_; }
    const std::vector<int>& bottom_degrees() const { return bottom_degrees_; }

    /// Sorted bottom indices adjacent to top node i.
    const std::vector<int>& top_neighbors(int i) const { return top_adj_[static_cast<std::size_t>(i)]; }
    /// Sorted top indices adjacent to bottom node a.
    const std::vector<int>& bottom_neighbors(int a) const { return bottom_adj_[static_cast<std::size_t>(a)]; }

    bool has_edge(int i, int a) const;

    const std::vector<std::string>& top_ids() const { return top_ids_; }
    const std::vector<std::string>& bottom_ids() const { return bottom_ids_; }
    const std::string& top_id(int i) const { return top_ids_[static_cast<std::size_t>(i)]; }
    const std::string& bottom_id(int a) const { return bottom_ids_[static_cast<std::size_t>(a)]; }

    /// Same graph with the layers swapped.
    BipartiteGraph transposed() const;

private:
    BipartiteGraph() = default;
    void finalize();

    std::vector<std::string> top_ids_;
    std::vector<std::string> bottom_ids_;
    std::vector<std::vector<int>> top_adj_;
    std::vector<std::vector<int>> bottom_adj_;
    std::vector<int> top_degrees_;
    std::vector<int> bottom_degrees_;
    std::int64_t edge_count_ = 0;
};

/// Directed graph with non-negative integer edge weights (retweet counts).
/// Parallel edges accumulate into one weighted edge. Immutable once built.
class DirectedWeightedGraph {
public:
    struct Edge {
        int source;
        int target;
        std::int64_t weight;
    };

    DirectedWeightedGraph() = default;

    /// (source_id, target_id, weight) triples; repeated pairs accumulate.
    static DirectedWeightedGraph from_edges(
        const std::vector<std::tuple<std::string, std::string, std::int64_t>>& edges);

    int node_count() const { return static_cast<int>(ids_.size()); }
    std::size_t edge_count() const { return edges_.size(); }
    const std::vector<Edge>& edges() const { return edges_; }

    const std::vector<std::string>& ids() const { return ids_; }
    const std::string& id(int v) const { return ids_[static_cast<std::size_t>(v)]; }
    std::optional<int> index_of(const std::string& id) const;
    bool contains(const std::string& id) const { return index_of(id).has_value(); }

    /// Outgoing (target, weight) pairs, sorted by target.
    const std::vector<std::pair<int, std::int64_t>>& out_edges(int v) const {
        return out_[static_cast<std::size_t>(v)];
    }
    const std::vector<std::pair<int, std::int64_t>>& in_edges(int v) const {
        return in_[static_cast<std::size_t>(v)];
    }

    std::int64_t total_weight() const { return total_weight_; }

    /// Undirected simple neighbours (direction ignored, self-loops dropped),
    /// sorted by index.
    const std::vector<int>& undirected_neighbors(int v) const;

private:
    friend DirectedWeightedGraph induced_subgraph(const DirectedWeightedGraph&,
                                                  const std::unordered_set<std::string>&);

    int intern(const std::string& id);
    void finalize();

    std::vector<std::string> ids_;
    std::unordered_map<std::string, int> index_;
    std::vector<Edge> edges_;
    std::vector<std::vector<std::pair<int, std::int64_t>>> out_;
    std::vector<std::vector<std::pair<int, std::int64_t>>> in_;
    std::vector<std::vector<int>> undirected_;
    std::int64_t total_weight_ = 0;
};

/// Undirected weighted graph for community detection. A self-loop stores the
/// diagonal matrix entry w_vv once; strengths and total weight follow the
/// adjacency-matrix convention s_v = sum_u w_vu.
class UndirectedWeightedGraph {
public:
    UndirectedWeightedGraph() = default;

    static UndirectedWeightedGraph from_edges(
        const std::vector<std::tuple<std::string, std::string, double>>& edges);

    /// Undirected view of a directed graph: weights of the two directions
    /// accumulate, self-loops are preserved.
    static UndirectedWeightedGraph undirected_view(const DirectedWeightedGraph& g);

    int node_count() const { return static_cast<int>(ids_.size()); }
    const std::vector<std::string>& ids() const { return ids_; }
    const std::string& id(int v) const { return ids_[static_cast<std::size_t>(v)]; }
    std::optional<int> index_of(const std::string& id) const;

    /// (neighbor, weight) pairs sorted by neighbor; a self-loop appears as
    /// (v, w_vv).
    const std::vector<std::pair<int, double>>& neighbors(int v) const {
        return adj_[static_cast<std::size_t>(v)];
    }

    double strength(int v) const { return strength_[static_cast<std::size_t>(v)]; }
    /// 2W = sum of all strengths.
    double total_strength() const { return total_strength_; }

private:
    int intern(const std::string& id);
    void finalize();

    std::vector<std::string> ids_;
    std::unordered_map<std::string, int> index_;
    std::vector<std::vector<std::pair<int, double>>> adj_;
    std::vector<double> strength_;
    double total_strength_ = 0.0;
};

/// Node-to-community assignment over some graph's id space.
struct Partition {
    std::unordered_map<std::string, int> community;
    double modularity = 0.0;
    std::uint64_t shuffle_seed = 0;
};

/// Weakly connected components; direction and weights ignored. Components are
/// sorted by descending size, ties by smallest member id; members sorted by id.
std::vector<std::vector<std::string>> weakly_connected_components(const DirectedWeightedGraph& g);

/// Subgraph keeping exactly the edges with both endpoints in `nodes`.
/// Unknown ids in `nodes` are ignored. Node order follows the parent graph.
DirectedWeightedGraph induced_subgraph(const DirectedWeightedGraph& g,
                                       const std::unordered_set<std::string>& nodes);

struct ClusteringResult {
    std::unordered_map<std::string, double> coefficient;
    double mean = 0.0;
};

/// Undirected clustering coefficient (directions and weights ignored) for
/// each node in `nodes`, plus their unweighted mean. A node of undirected
/// degree < 2 has coefficient 0. Throws InputError("unknown node") if a
/// requested node is absent from the graph.
ClusteringResult undirected_clustering(const DirectedWeightedGraph& g,
                                       const std::vector<std::string>& nodes);

/// Edge-list text format: `source<TAB>target[<TAB>weight]` per line, UTF-8,
/// '#' comment lines and blank lines ignored. Missing weight means 1.
std::vector<std::tuple<std::string, std::string, std::int64_t>> read_edge_list(std::istream& in);
void write_edge_list(std::ostream& out, const DirectedWeightedGraph& g);

}  // namespace echo
