#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "echo/graph.hpp"

// Bipartite Configuration Model: the maximum-entropy ensemble of bipartite
// graphs whose expected degree sequences equal the observed ones. The graph
// probability factorizes over links, p_ia = x_i y_a / (1 + x_i y_a), with one
// unknown per distinct degree per layer.

namespace echo::bicm {

struct FitOptions {
    double tolerance = 1e-8;   // max-norm over per-node degree residuals
    int max_iterations = 5000;
    double initial_damping = 0.5;
    // fixed-point iterations without sufficient residual progress before a
    // Newton step on the reduced system is attempted
    int stall_window = 50;
    // called after every accepted iterate (iteration, max residual, log-likelihood)
    std::function<void(int, double, double)> on_iterate;
};

struct DegreeClass {
    int degree = 0;          // degree in the input graph
    int reduced_degree = 0;  // degree solved against, after degeneracy stripping
    int count = 0;           // nodes in this class
    double multiplier = 0.0; // x (top) or y (bottom)
};

/// Fitted model. Nodes whose multipliers diverge (zero-degree and
/// full-degree nodes) are stripped before solving and answered exactly:
/// their link probabilities are 0 or 1. `strip order` records the pass in
/// which a node was stripped (even = zero pass, odd = full pass); for a pair
/// of stripped endpoints the earlier pass decides the probability.
class BicmModel {
public:
    int top_count() const { return static_cast<int>(top_key_.size()); }
    int bottom_count() const { return static_cast<int>(bottom_key_.size()); }

    const std::vector<DegreeClass>& top_classes() const { return top_classes_; }
    const std::vector<DegreeClass>& bottom_classes() const { return bottom_classes_; }

    /// Class index of an active node, or -1 when the node was stripped.
    int top_class_of(int i) const;
    int bottom_class_of(int a) const;

    /// Strip pass (>= 0) or -1 for active nodes.
    int top_strip_order(int i) const { return top_strip_[static_cast<std::size_t>(i)]; }
    int bottom_strip_order(int a) const { return bottom_strip_[static_cast<std::size_t>(a)]; }

    /// p_ia; exactly 0 / 1 for stripped nodes. Throws InputError on bad indices.
    double link_probability(int i, int a) const;

    /// Probability of node i (by status) against an active bottom class.
    double top_probability_vs_class(int i, int bottom_class) const;

    /// (expected top degrees, expected bottom degrees), degenerate nodes included.
    std::pair<std::vector<double>, std::vector<double>> expected_degrees() const;

    double tolerance_achieved() const { return tolerance_achieved_; }
    int iterations() const { return iterations_; }

    /// Stable key describing how a node enters every pairwise computation:
    /// its class for active nodes, -2 - strip_order for stripped ones. Two
    /// top nodes with equal keys are exchangeable in the null model.
    int top_status_key(int i) const;
    int bottom_status_key(int a) const;

    nlohmann::json to_json() const;
    static BicmModel from_json(const nlohmann::json& j);

private:
    friend BicmModel fit(const BipartiteGraph&, const FitOptions&);

    std::vector<DegreeClass> top_classes_;
    std::vector<DegreeClass> bottom_classes_;
    // per node: class index if active (strip == -1), else -1
    std::vector<int> top_key_;
    std::vector<int> bottom_key_;
    std::vector<int> top_strip_;
    std::vector<int> bottom_strip_;
    double tolerance_achieved_ = 0.0;
    int iterations_ = 0;
};

/// Fits the model. Throws ConvergenceError when the residual does not reach
/// options.tolerance within options.max_iterations, and InputError
/// ("degenerate network") when the graph has no edges at all.
BicmModel fit(const BipartiteGraph& graph, const FitOptions& options = {});

/// Class-compressed log-likelihood of the observed graph under multipliers.
double log_likelihood(const std::vector<DegreeClass>& top, const std::vector<DegreeClass>& bottom);

}  // namespace echo::bicm
