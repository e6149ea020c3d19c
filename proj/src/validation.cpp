#include "echo/validation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <ostream>
#include <thread>

#include "echo/errors.hpp"
#include "echo/kernels.hpp"
#include "echo/textio.hpp"

namespace echo::validation {

namespace {

// P(PB >= v) for the Poisson-Binomial part, indexed by v; shift handled by
// the caller. upper[0] is the total mass (== 1 up to rounding).
struct FamilyDist {
    int shift = 0;
    std::vector<double> upper;
};

std::vector<double> binomial_pmf(int trials, double q) {
    std::vector<double> pmf(static_cast<std::size_t>(trials) + 1);
    const double log_q = std::log(q);
    const double log_1mq = std::log1p(-q);
    const double log_fact_n = std::lgamma(static_cast<double>(trials) + 1.0);
    for (int k = 0; k <= trials; ++k) {
        const double log_binom = log_fact_n - std::lgamma(static_cast<double>(k) + 1.0) -
                                 std::lgamma(static_cast<double>(trials - k) + 1.0);
        pmf[static_cast<std::size_t>(k)] =
            std::exp(log_binom + k * log_q + (trials - k) * log_1mq);
    }
    return pmf;
}

FamilyDist family_distribution(const PairNull& null) {
    FamilyDist dist;
    dist.shift = null.shift;
    std::vector<double> pmf{1.0};
    std::vector<double> next;
    for (const auto& [q, trials] : null.classes) {
        const std::vector<double> block = binomial_pmf(trials, q);
        next.assign(pmf.size() + static_cast<std::size_t>(trials), 0.0);
        for (std::size_t k = 0; k < block.size(); ++k) {
            if (block[k] == 0.0) continue;
            kernels::axpy(block[k], pmf.data(), next.data() + k, pmf.size());
        }
        pmf.swap(next);
    }
    // Tail sums accumulated from the smallest terms upward keep tiny
    // p-values at full relative precision.
    dist.upper.assign(pmf.size(), 0.0);
    double running = 0.0;
    for (std::size_t v = pmf.size(); v-- > 0;) {
        running += pmf[v];
        dist.upper[v] = running;
    }
    return dist;
}

double query(const FamilyDist& dist, int observed) {
    const long long t = static_cast<long long>(observed) - dist.shift;
    if (t <= 0) return 1.0;
    if (t >= static_cast<long long>(dist.upper.size())) return 0.0;
    return std::clamp(dist.upper[static_cast<std::size_t>(t)], 0.0, 1.0);
}

}  // namespace

CooccurrenceTable cooccurrences(const BipartiteGraph& graph) {
    CooccurrenceTable table;
    table.top_count = graph.top_count();
    std::vector<std::map<int, int>> rows(static_cast<std::size_t>(graph.top_count()));
    for (int a = 0; a < graph.bottom_count(); ++a) {
        const std::vector<int>& tops = graph.bottom_neighbors(a);
        for (std::size_t s = 0; s < tops.size(); ++s) {
            auto& row = rows[static_cast<std::size_t>(tops[s])];
            for (std::size_t t = s + 1; t < tops.size(); ++t) {
                row[tops[t]] += 1;
            }
        }
    }
    for (int i = 0; i < graph.top_count(); ++i) {
        for (const auto& [j, count] : rows[static_cast<std::size_t>(i)]) {
            table.pairs.push_back({i, j, count});
        }
    }
    return table;
}

PairNull pair_null(const bicm::BicmModel& model, int i, int j) {
    if (i < 0 || j < 0 || i >= model.top_count() || j >= model.top_count() || i == j) {
        throw InputError("pair_null: bad top-layer pair");
    }
    PairNull null;
    const auto& bottom_classes = model.bottom_classes();
    for (int d = 0; d < static_cast<int>(bottom_classes.size()); ++d) {
        const double q = model.top_probability_vs_class(i, d) * model.top_probability_vs_class(j, d);
        const int m = bottom_classes[static_cast<std::size_t>(d)].count;
        if (q <= 0.0) continue;
        if (q >= 1.0) {
            null.shift += m;
        } else {
            null.classes.emplace_back(q, m);
        }
    }
    for (int a = 0; a < model.bottom_count(); ++a) {
        if (model.bottom_strip_order(a) == -1) continue;
        const double q = model.link_probability(i, a) * model.link_probability(j, a);
        if (q >= 1.0) null.shift += 1;
    }
    return null;
}

double pair_pvalue(const bicm::BicmModel& model, int i, int j, int observed) {
    if (observed <= 0) return 1.0;
    return query(family_distribution(pair_null(model, i, j)), observed);
}

FdrResult fdr_select(const std::vector<double>& pvalues, double alpha) {
    FdrResult result;
    const std::size_t n = pvalues.size();
    result.selected.assign(n, 0);
    if (n == 0) return result;

    std::vector<double> sorted = pvalues;
    std::sort(sorted.begin(), sorted.end());
    double threshold = -1.0;
    for (std::size_t rank = n; rank >= 1; --rank) {
        const double bound = static_cast<double>(rank) * alpha / static_cast<double>(n);
        if (sorted[rank - 1] <= bound) {
            threshold = sorted[rank - 1];
            break;
        }
    }
    if (threshold < 0.0) return result;

    result.threshold = threshold;
    for (std::size_t k = 0; k < n; ++k) {
        if (pvalues[k] <= threshold) {
            result.selected[k] = 1;
            ++result.rejected;
        }
    }
    return result;
}

ValidatedProjection validated_projection(const BipartiteGraph& graph,
                                         const bicm::BicmModel& model, double alpha,
                                         int threads) {
    if (graph.top_count() != model.top_count() || graph.bottom_count() != model.bottom_count()) {
        throw InputError("validated_projection: model does not match the graph");
    }
    ValidatedProjection projection;
    projection.alpha = alpha;
    projection.ids = graph.top_ids();

    const CooccurrenceTable table = cooccurrences(graph);
    projection.tested = static_cast<int>(table.pairs.size());
    if (table.pairs.empty()) return projection;

    // Pairs with the same unordered status keys share one exact null
    // distribution; compute it once per family.
    std::map<std::pair<int, int>, int> family_of;
    std::vector<std::pair<int, int>> representative;  // one (i, j) per family
    std::vector<int> pair_family(table.pairs.size());
    for (std::size_t p = 0; p < table.pairs.size(); ++p) {
        const auto& pair = table.pairs[p];
        const int ki = model.top_status_key(pair.i);
        const int kj = model.top_status_key(pair.j);
        const std::pair<int, int> key = std::minmax(ki, kj);
        auto [it, inserted] = family_of.emplace(key, static_cast<int>(representative.size()));
        if (inserted) representative.emplace_back(pair.i, pair.j);
        pair_family[p] = it->second;
    }

    std::vector<FamilyDist> dists(representative.size());
    const int worker_count =
        std::max(1, std::min(threads, static_cast<int>(representative.size())));
    auto compute_range = [&](std::size_t begin, std::size_t step) {
        for (std::size_t f = begin; f < representative.size(); f += step) {
            const auto [i, j] = representative[f];
            dists[f] = family_distribution(pair_null(model, i, j));
        }
    };
    if (worker_count == 1) {
        compute_range(0, 1);
    } else {
        std::vector<std::thread> workers;
        workers.reserve(static_cast<std::size_t>(worker_count));
        for (int w = 0; w < worker_count; ++w) {
            workers.emplace_back(compute_range, static_cast<std::size_t>(w),
                                 static_cast<std::size_t>(worker_count));
        }
        for (auto& worker : workers) worker.join();
    }

    std::vector<double> pvalues(table.pairs.size());
    for (std::size_t p = 0; p < table.pairs.size(); ++p) {
        pvalues[p] = query(dists[static_cast<std::size_t>(pair_family[p])], table.pairs[p].count);
    }
    const FdrResult fdr = fdr_select(pvalues, alpha);
    projection.threshold = fdr.threshold;
    projection.selected_count = fdr.rejected;

    projection.edges.reserve(table.pairs.size());
    for (std::size_t p = 0; p < table.pairs.size(); ++p) {
        const auto& pair = table.pairs[p];
        projection.edges.push_back(
            {pair.i, pair.j, pair.count, pvalues[p], fdr.selected[p] != 0});
    }
    return projection;
}

UndirectedWeightedGraph projection_graph(const ValidatedProjection& projection) {
    std::vector<std::tuple<std::string, std::string, double>> edges;
    for (const auto& edge : projection.edges) {
        if (!edge.selected) continue;
        edges.emplace_back(projection.ids[static_cast<std::size_t>(edge.i)],
                           projection.ids[static_cast<std::size_t>(edge.j)], 1.0);
    }
    return UndirectedWeightedGraph::from_edges(edges);
}

void write_projection_tsv(const ValidatedProjection& projection, std::ostream& out) {
    out << "top_i\ttop_j\tcooccurrence\tp_value\tselected\n";
    for (const auto& edge : projection.edges) {
        out << projection.ids[static_cast<std::size_t>(edge.i)] << '\t'
            << projection.ids[static_cast<std::size_t>(edge.j)] << '\t' << edge.count << '\t'
            << textio::format_double(edge.p_value) << '\t' << (edge.selected ? 1 : 0) << '\n';
    }
}

nlohmann::json projection_metadata(const ValidatedProjection& projection) {
    return nlohmann::json{{"alpha", projection.alpha},
                          {"family", "pairs with positive cooccurrence"},
                          {"tested", projection.tested},
                          {"selected", projection.selected_count},
                          {"threshold", projection.threshold},
                          {"top_count", static_cast<int>(projection.ids.size())}};
}

}  // namespace echo::validation
