#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "echo/bicm.hpp"
#include "echo/graph.hpp"

// Statistical validation of bipartite projections: observed co-occurrences
// of top-layer pairs are compared against the exact Poisson-Binomial null
// distribution implied by a fitted model, and the surviving edges are chosen
// by Benjamini-Hochberg control of the false discovery rate.

namespace echo::validation {

struct CooccurrencePair {
    int i = 0;  // top-layer index, i < j
    int j = 0;
    int count = 0;  // shared bottom-layer neighbours
};

struct CooccurrenceTable {
    std::vector<CooccurrencePair> pairs;  // (i, j) lexicographic, count >= 1 only
    int top_count = 0;
};

/// Counts V_ij = number of bottom nodes adjacent to both i and j, for all
/// top pairs with V >= 1.
CooccurrenceTable cooccurrences(const BipartiteGraph& graph);

/// The null distribution of a pair's co-occurrence: a deterministic shift
/// (bottom nodes linked to both with probability 1) plus one independent
/// Bernoulli block per active bottom class.
struct PairNull {
    int shift = 0;
    std::vector<std::pair<double, int>> classes;  // (success probability, trials)
};

PairNull pair_null(const bicm::BicmModel& model, int i, int j);

/// Exact upper-tail probability P(V >= observed) under the null. The full
/// probability mass function is built by convolving binomial blocks and the
/// tail is accumulated from the smallest terms upward, so tiny p-values keep
/// full relative precision. observed == 0 returns 1.
double pair_pvalue(const bicm::BicmModel& model, int i, int j, int observed);

struct FdrResult {
    double threshold = 0.0;          // largest rejected p-value; 0 when none
    int rejected = 0;                // number of rejected hypotheses
    std::vector<char> selected;      // one flag per input p-value
};

/// Benjamini-Hochberg step-up at level alpha over the whole input family.
FdrResult fdr_select(const std::vector<double>& pvalues, double alpha);

struct ValidatedEdge {
    int i = 0;
    int j = 0;
    int count = 0;
    double p_value = 1.0;
    bool selected = false;
};

struct ValidatedProjection {
    std::vector<ValidatedEdge> edges;  // all tested pairs, (i, j) lexicographic
    std::vector<std::string> ids;      // top-layer ids, by index
    double alpha = 0.0;
    int tested = 0;                    // family size: pairs with V >= 1
    int selected_count = 0;
    double threshold = 0.0;
};

/// Fits pairs against the model, applies FDR selection and returns every
/// tested pair with its verdict. P-values are memoized per degree-class
/// family; `threads` > 1 computes families concurrently (identical results).
ValidatedProjection validated_projection(const BipartiteGraph& graph,
                                         const bicm::BicmModel& model, double alpha,
                                         int threads = 1);

/// The validated monopartite graph: one unit-weight edge per selected pair.
UndirectedWeightedGraph projection_graph(const ValidatedProjection& projection);

/// Tab-separated dump of all tested pairs:
/// top_i, top_j, cooccurrence, p_value, selected.
void write_projection_tsv(const ValidatedProjection& projection, std::ostream& out);

/// Summary: alpha, family size and convention, threshold, selection counts.
nlohmann::json projection_metadata(const ValidatedProjection& projection);

}  // namespace echo::validation
