#include "echo/graph.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <map>
#include <ostream>

#include "echo/errors.hpp"
#include "echo/kernels.hpp"

namespace echo {

namespace {

int intern_id(const std::string& id, std::unordered_map<std::string, int>& index,
              std::vector<std::string>& ids) {
    auto [it, inserted] = index.emplace(id, static_cast<int>(ids.size()));
    if (inserted) {
        ids.push_back(id);
    }
    return it->second;
}

void sort_unique(std::vector<int>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
}

}  // namespace

// ---------------------------------------------------------------------------
// BipartiteGraph

BipartiteGraph BipartiteGraph::from_edges(
    const std::vector<std::pair<std::string, std::string>>& edges) {
    if (edges.empty()) {
        throw InputError("empty network");
    }
    BipartiteGraph g;
    std::unordered_map<std::string, int> top_index;
    std::unordered_map<std::string, int> bottom_index;
    std::vector<std::pair<int, int>> index_pairs;
    index_pairs.reserve(edges.size());
    for (const auto& [u, a] : edges) {
        const int i = intern_id(u, top_index, g.top_ids_);
        const int j = intern_id(a, bottom_index, g.bottom_ids_);
        index_pairs.emplace_back(i, j);
    }
    g.top_adj_.resize(g.top_ids_.size());
    g.bottom_adj_.resize(g.bottom_ids_.size());
    for (const auto& [i, j] : index_pairs) {
        g.top_adj_[static_cast<std::size_t>(i)].push_back(j);
    }
    g.finalize();
    return g;
}

BipartiteGraph BipartiteGraph::from_index_pairs(int top_count, int bottom_count,
                                                const std::vector<std::pair<int, int>>& edges) {
    if (top_count < 0 || bottom_count < 0) {
        throw InputError("negative layer size");
    }
    BipartiteGraph g;
    g.top_ids_.reserve(static_cast<std::size_t>(top_count));
    for (int i = 0; i < top_count; ++i) {
        g.top_ids_.push_back(std::to_string(i));
    }
    g.bottom_ids_.reserve(static_cast<std::size_t>(bottom_count));
    for (int a = 0; a < bottom_count; ++a) {
        g.bottom_ids_.push_back(std::to_string(a));
    }
    g.top_adj_.resize(g.top_ids_.size());
    g.bottom_adj_.resize(g.bottom_ids_.size());
    for (const auto& [i, j] : edges) {
        if (i < 0 || i >= top_count || j < 0 || j >= bottom_count) {
            throw InputError("edge references invalid index");
        }
        g.top_adj_[static_cast<std::size_t>(i)].push_back(j);
    }
    g.finalize();
    return g;
}

void BipartiteGraph::finalize() {
    edge_count_ = 0;
    for (auto& nbrs : top_adj_) {
        sort_unique(nbrs);
        edge_count_ += static_cast<std::int64_t>(nbrs.size());
    }
    for (std::size_t i = 0; i < top_adj_.size(); ++i) {
        for (int j : top_adj_[i]) {
            bottom_adj_[static_cast<std::size_t>(j)].push_back(static_cast<int>(i));
        }
    }
    for (auto& nbrs : bottom_adj_) {
        std::sort(nbrs.begin(), nbrs.end());
    }
    top_degrees_.resize(top_adj_.size());
    for (std::size_t i = 0; i < top_adj_.size(); ++i) {
        top_degrees_[i] = static_cast<int>(top_adj_[i].size());
    }
    bottom_degrees_.resize(bottom_adj_.size());
    for (std::size_t a = 0; a < bottom_adj_.size(); ++a) {
        bottom_degrees_[a] = static_cast<int>(bottom_adj_[a].size());
    }
}

bool BipartiteGraph::has_edge(int i, int a) const {
    const auto& nbrs = top_adj_[static_cast<std::size_t>(i)];
    return std::binary_search(nbrs.begin(), nbrs.end(), a);
}

BipartiteGraph BipartiteGraph::transposed() const {
    BipartiteGraph g;
    g.top_ids_ = bottom_ids_;
    g.bottom_ids_ = top_ids_;
    g.top_adj_ = bottom_adj_;
    g.bottom_adj_ = top_adj_;
    g.top_degrees_ = bottom_degrees_;
    g.bottom_degrees_ = top_degrees_;
    g.edge_count_ = edge_count_;
    return g;
}

// ---------------------------------------------------------------------------
// DirectedWeightedGraph

int DirectedWeightedGraph::intern(const std::string& id) {
    return intern_id(id, index_, ids_);
}

DirectedWeightedGraph DirectedWeightedGraph::from_edges(
    const std::vector<std::tuple<std::string, std::string, std::int64_t>>& edges) {
    DirectedWeightedGraph g;
    std::map<std::pair<int, int>, std::int64_t> accumulated;
    for (const auto& [src, dst, w] : edges) {
        if (w < 0) {
            throw InputError("negative edge weight");
        }
        const int s = g.intern(src);
        const int t = g.intern(dst);
        if (w > 0) {
            accumulated[{s, t}] += w;
        }
    }
    g.edges_.reserve(accumulated.size());
    for (const auto& [pair, w] : accumulated) {
        g.edges_.push_back(Edge{pair.first, pair.second, w});
    }
    g.finalize();
    return g;
}

void DirectedWeightedGraph::finalize() {
    const std::size_t n = ids_.size();
    out_.assign(n, {});
    in_.assign(n, {});
    undirected_.assign(n, {});
    total_weight_ = 0;
    for (const Edge& e : edges_) {
        out_[static_cast<std::size_t>(e.source)].emplace_back(e.target, e.weight);
        in_[static_cast<std::size_t>(e.target)].emplace_back(e.source, e.weight);
        total_weight_ += e.weight;
        if (e.source != e.target) {
            undirected_[static_cast<std::size_t>(e.source)].push_back(e.target);
            undirected_[static_cast<std::size_t>(e.target)].push_back(e.source);
        }
    }
    for (std::size_t v = 0; v < n; ++v) {
        std::sort(out_[v].begin(), out_[v].end());
        std::sort(in_[v].begin(), in_[v].end());
        sort_unique(undirected_[v]);
    }
}

std::optional<int> DirectedWeightedGraph::index_of(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) {
        return std::nullopt;
    }
    return it->second;
}

const std::vector<int>& DirectedWeightedGraph::undirected_neighbors(int v) const {
    return undirected_[static_cast<std::size_t>(v)];
}

// ---------------------------------------------------------------------------
// UndirectedWeightedGraph

int UndirectedWeightedGraph::intern(const std::string& id) {
    return intern_id(id, index_, ids_);
}

UndirectedWeightedGraph UndirectedWeightedGraph::from_edges(
    const std::vector<std::tuple<std::string, std::string, double>>& edges) {
    UndirectedWeightedGraph g;
    std::map<std::pair<int, int>, double> accumulated;
    for (const auto& [u, v, w] : edges) {
        if (w < 0.0) {
            throw InputError("negative edge weight");
        }
        const int a = g.intern(u);
        const int b = g.intern(v);
        accumulated[{std::min(a, b), std::max(a, b)}] += w;
    }
    g.adj_.assign(g.ids_.size(), {});
    for (const auto& [pair, w] : accumulated) {
        g.adj_[static_cast<std::size_t>(pair.first)].emplace_back(pair.second, w);
        if (pair.first != pair.second) {
            g.adj_[static_cast<std::size_t>(pair.second)].emplace_back(pair.first, w);
        }
    }
    g.finalize();
    return g;
}

UndirectedWeightedGraph UndirectedWeightedGraph::undirected_view(const DirectedWeightedGraph& g) {
    std::vector<std::tuple<std::string, std::string, double>> edges;
    edges.reserve(g.edge_count());
    for (const auto& e : g.edges()) {
        edges.emplace_back(g.id(e.source), g.id(e.target), static_cast<double>(e.weight));
    }
    UndirectedWeightedGraph u = from_edges(edges);
    // keep isolated nodes of the directed graph
    for (const auto& id : g.ids()) {
        if (!u.index_of(id).has_value()) {
            u.intern(id);
            u.adj_.emplace_back();
            u.strength_.push_back(0.0);
        }
    }
    return u;
}

void UndirectedWeightedGraph::finalize() {
    const std::size_t n = ids_.size();
    strength_.assign(n, 0.0);
    total_strength_ = 0.0;
    for (std::size_t v = 0; v < n; ++v) {
        std::sort(adj_[v].begin(), adj_[v].end());
        double s = 0.0;
        for (const auto& [u, w] : adj_[v]) {
            s += w;
        }
        strength_[v] = s;
        total_strength_ += s;
    }
}

std::optional<int> UndirectedWeightedGraph::index_of(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) {
        return std::nullopt;
    }
    return it->second;
}

// ---------------------------------------------------------------------------
// Algorithms

std::vector<std::vector<std::string>> weakly_connected_components(const DirectedWeightedGraph& g) {
    const int n = g.node_count();
    std::vector<int> label(static_cast<std::size_t>(n), -1);
    std::vector<int> stack;
    int next_label = 0;
    for (int start = 0; start < n; ++start) {
        if (label[static_cast<std::size_t>(start)] != -1) {
            continue;
        }
        stack.push_back(start);
        label[static_cast<std::size_t>(start)] = next_label;
        while (!stack.empty()) {
            const int v = stack.back();
            stack.pop_back();
            for (int u : g.undirected_neighbors(v)) {
                if (label[static_cast<std::size_t>(u)] == -1) {
                    label[static_cast<std::size_t>(u)] = next_label;
                    stack.push_back(u);
                }
            }
        }
        ++next_label;
    }
    std::vector<std::vector<std::string>> components(static_cast<std::size_t>(next_label));
    for (int v = 0; v < n; ++v) {
        components[static_cast<std::size_t>(label[static_cast<std::size_t>(v)])].push_back(g.id(v));
    }
    for (auto& c : components) {
        std::sort(c.begin(), c.end());
    }
    std::sort(components.begin(), components.end(), [](const auto& a, const auto& b) {
        if (a.size() != b.size()) {
            return a.size() > b.size();
        }
        return a.front() < b.front();
    });
    return components;
}

DirectedWeightedGraph induced_subgraph(const DirectedWeightedGraph& g,
                                       const std::unordered_set<std::string>& nodes) {
    DirectedWeightedGraph sub;
    std::vector<bool> keep(static_cast<std::size_t>(g.node_count()), false);
    for (int v = 0; v < g.node_count(); ++v) {
        if (nodes.count(g.id(v)) > 0) {
            keep[static_cast<std::size_t>(v)] = true;
            sub.intern(g.id(v));
        }
    }
    for (const auto& e : g.edges()) {
        if (keep[static_cast<std::size_t>(e.source)] && keep[static_cast<std::size_t>(e.target)]) {
            sub.edges_.push_back(DirectedWeightedGraph::Edge{
                *sub.index_of(g.id(e.source)), *sub.index_of(g.id(e.target)), e.weight});
        }
    }
    sub.finalize();
    return sub;
}

namespace {

// Bitset adjacency rows are quadratic in memory; beyond this many nodes the
// clustering falls back to sorted-list intersections.
constexpr int kBitsetNodeLimit = 16384;

std::int64_t sorted_intersection_size(const std::vector<int>& a, const std::vector<int>& b) {
    std::int64_t count = 0;
    auto ia = a.begin();
    auto ib = b.begin();
    while (ia != a.end() && ib != b.end()) {
        if (*ia < *ib) {
            ++ia;
        } else if (*ib < *ia) {
            ++ib;
        } else {
            ++count;
            ++ia;
            ++ib;
        }
    }
    return count;
}

}  // namespace

ClusteringResult undirected_clustering(const DirectedWeightedGraph& g,
                                       const std::vector<std::string>& nodes) {
    const int n = g.node_count();
    std::vector<int> targets;
    targets.reserve(nodes.size());
    for (const auto& id : nodes) {
        auto idx = g.index_of(id);
        if (!idx.has_value()) {
            throw InputError("unknown node");
        }
        targets.push_back(*idx);
    }

    const bool use_bitsets = n <= kBitsetNodeLimit;
    std::vector<std::uint64_t> rows;
    const std::size_t words = (static_cast<std::size_t>(n) + 63) / 64;
    if (use_bitsets) {
        rows.assign(static_cast<std::size_t>(n) * words, 0);
        for (int v = 0; v < n; ++v) {
            for (int u : g.undirected_neighbors(v)) {
                rows[static_cast<std::size_t>(v) * words + static_cast<std::size_t>(u) / 64] |=
                    std::uint64_t{1} << (static_cast<std::size_t>(u) % 64);
            }
        }
    }

    ClusteringResult result;
    double sum = 0.0;
    for (std::size_t t = 0; t < targets.size(); ++t) {
        const int v = targets[t];
        const auto& nbrs = g.undirected_neighbors(v);
        const std::int64_t d = static_cast<std::int64_t>(nbrs.size());
        double c = 0.0;
        if (d >= 2) {
            std::int64_t among = 0;  // ordered pairs (u,w) of neighbours with edge u-w
            for (int u : nbrs) {
                if (use_bitsets) {
                    among += static_cast<std::int64_t>(kernels::and_popcount(
                        rows.data() + static_cast<std::size_t>(v) * words,
                        rows.data() + static_cast<std::size_t>(u) * words, words));
                } else {
                    among += sorted_intersection_size(nbrs, g.undirected_neighbors(u));
                }
            }
            // `among` counts each triangle edge twice (once from each endpoint)
            c = static_cast<double>(among) / static_cast<double>(d * (d - 1));
        }
        result.coefficient[nodes[t]] = c;
        sum += c;
    }
    result.mean = targets.empty() ? 0.0 : sum / static_cast<double>(targets.size());
    return result;
}

// ---------------------------------------------------------------------------
// Edge-list text format

std::vector<std::tuple<std::string, std::string, std::int64_t>> read_edge_list(std::istream& in) {
    std::vector<std::tuple<std::string, std::string, std::int64_t>> edges;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty() || line.front() == '#') {
            continue;
        }
        const auto tab1 = line.find('\t');
        if (tab1 == std::string::npos) {
            throw InputError("edge list line " + std::to_string(line_no) + ": expected source<TAB>target");
        }
        const auto tab2 = line.find('\t', tab1 + 1);
        const std::string source = line.substr(0, tab1);
        std::string target;
        std::int64_t weight = 1;
        if (tab2 == std::string::npos) {
            target = line.substr(tab1 + 1);
        } else {
            target = line.substr(tab1 + 1, tab2 - tab1 - 1);
            const std::string weight_text = line.substr(tab2 + 1);
            auto [ptr, ec] = std::from_chars(weight_text.data(), weight_text.data() + weight_text.size(), weight);
            if (ec != std::errc{} || ptr != weight_text.data() + weight_text.size()) {
                throw InputError("edge list line " + std::to_string(line_no) + ": bad weight");
            }
        }
        if (source.empty() || target.empty()) {
            throw InputError("edge list line " + std::to_string(line_no) + ": empty node id");
        }
        edges.emplace_back(source, target, weight);
    }
    return edges;
}

void write_edge_list(std::ostream& out, const DirectedWeightedGraph& g) {
    for (const auto& e : g.edges()) {
        out << g.id(e.source) << '\t' << g.id(e.target) << '\t' << e.weight << '\n';
    }
}

}  // namespace echo
