#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "echo/dataset.hpp"
#include "echo/graph.hpp"
#include "echo/urltools.hpp"

// End-to-end orchestration: discourse communities (DiCo), news-engagement
// communities (NEC), their intersection into echo chambers, and the reported
// metrics (clustering, flows, purity, trust histograms).

namespace echo::pipeline {

struct PipelineOptions {
    double alpha = 0.05;
    int shuffles = 1000;
    std::uint64_t seed = 0;
    bool lp_weighted = false;          // weight the label-propagation majority
    std::int64_t min_flow_weight = 1000;
    double bicm_tolerance = 1e-8;
    int bicm_max_iterations = 5000;
    int threads = 1;
};

struct ProjectionSummary {
    int tested = 0;        // pairs with positive co-occurrence
    int selected = 0;      // pairs surviving FDR
    double threshold = 0;  // largest rejected p-value
    int nodes = 0;         // nodes of the validated graph
    double modularity = 0; // of the community partition on it
};

struct DicoStats {
    int dico = 0;  // 1-based; 0 is the "none" row
    std::int64_t users = 0, tweets = 0, retweets = 0, url_tweets = 0, url_retweets = 0;
};

struct DicoAssignment {
    std::unordered_map<std::string, int> dico;  // user → 1-based id; absent = none
    Partition verified_core;                    // on the validated verified projection
    std::vector<DicoStats> stats;               // ids ascending, "none" row last
    ProjectionSummary projection;
    int community_count = 0;
    bool propagation_converged = false;
    int propagation_sweeps = 0;
};

/// Verified×unverified bipartite graph (link = a retweet in either
/// direction), validated projection of the verified layer, shuffled
/// community detection on it, then label propagation over the undirected
/// retweet network seeded with the verified users' community ids.
DicoAssignment detect_dico(const Dataset& dataset, const PipelineOptions& options);

enum class NecLayer { users, urls };

struct NecStats {
    int nec = 0;
    int members = 0;
    std::int64_t shares = 0;  // URL-share multiplicity carried by the members
};

struct NecAssignment {
    NecLayer layer = NecLayer::users;
    std::unordered_map<std::string, int> nec;  // member → 1-based id
    std::vector<NecStats> stats;
    int layer_population = 0;   // nodes of that layer in the share graph
    int validated_members = 0;  // of which, nodes in the validated projection
    ProjectionSummary projection;
    int community_count = 0;
};

/// User×URL bipartite graph (link = shared at least once), validated
/// projection of the requested layer, communities on the validated graph.
NecAssignment detect_nec(const Dataset& dataset, NecLayer layer, const PipelineOptions& options);

struct EchoChamber {
    int nec = 0;
    int dico = 0;
    std::vector<std::string> members;     // sorted
    std::int64_t internal_edges = 0;      // directed retweet edges inside
    std::int64_t internal_weight = 0;     // summed retweet counts inside
};

struct EchoChamberSet {
    std::vector<EchoChamber> chambers;          // flow node id = position here
    std::vector<std::string> excluded_members;  // NEC users in no chamber
};

/// For every (user-NEC, DiCo) pair: weakly connected components of the
/// retweet graph restricted to users holding both memberships; components of
/// size ≥ 2 become chambers.
EchoChamberSet detect_echo_chambers(const Dataset& dataset, const DicoAssignment& dicos,
                                    const NecAssignment& necs);

struct ChamberClustering {
    int chamber = 0;  // index into EchoChamberSet::chambers
    int nec = 0;
    int dico = 0;
    double mean = 0.0;       // mean coefficient over chamber members
    double benchmark = 0.0;  // mean over the LWCC of the DiCo-induced subgraph
};

struct ClusteringReport {
    std::vector<ChamberClustering> chambers;
    std::vector<std::pair<int, double>> dico_benchmarks;  // (dico, LWCC mean)
    double pooled = 0.0;  // mean over all chamber members together
};

/// Clustering coefficients are computed on the DiCo-induced undirected
/// retweet subgraph each chamber lives in.
ClusteringReport clustering_report(const Dataset& dataset, const DicoAssignment& dicos,
                                   const EchoChamberSet& chambers);

/// Contracts users to their chamber's flow node (or −1), sums retweet
/// weights between groups including self-loops, then drops aggregate edges
/// lighter than min_weight. Total weight is conserved before filtering.
DirectedWeightedGraph aggregate_flow(const DirectedWeightedGraph& retweets,
                                     const EchoChamberSet& chambers, std::int64_t min_weight);

enum class CountMode { distinct, multiplicity };

struct PurityGroup {
    std::string name;
    std::vector<std::string> members;  // user ids or URL strings
};

struct GroupPurity {
    std::string name;
    double t = 0.0, n = 0.0, unc = 0.0;  // fractions over T+N+UNC items
    std::int64_t items = 0;              // the denominator
};

struct PurityReport {
    CountMode mode = CountMode::distinct;
    bool members_are_users = true;
    std::vector<GroupPurity> groups;
    GroupPurity pooled;      // all groups together (share-weighted mean)
    GroupPurity complement;  // items carried by non-members only
};

/// Trust-label composition of URL items per group. Platform and satire
/// labels never enter the counts. mode=distinct counts each URL once per
/// group; mode=multiplicity counts every share. Unknown members are errors.
PurityReport purity(const Dataset& dataset, const urltools::TrustLabelTable& labels,
                    const std::vector<PurityGroup>& groups, bool members_are_users,
                    CountMode mode);

struct TrustRow {
    std::string grouping;  // "dataset", "dico", "nec", "chamber"
    std::string group;
    std::int64_t t_urls = 0, n_urls = 0, unc_urls = 0;        // distinct URLs
    std::int64_t t_shares = 0, n_shares = 0, unc_shares = 0;  // with multiplicity
};

struct Grouping {
    std::string name;
    std::vector<PurityGroup> groups;
    bool members_are_users = true;
};

/// T/N/UNC counts per group, distinct and with-multiplicity side by side.
std::vector<TrustRow> trust_histogram(const Dataset& dataset,
                                      const urltools::TrustLabelTable& labels,
                                      const std::vector<Grouping>& groupings);

struct RunResult {
    DicoAssignment dico;
    NecAssignment user_nec;
    std::optional<NecAssignment> url_nec;
    EchoChamberSet chambers;
    ClusteringReport clustering;
    DirectedWeightedGraph flow;
    std::optional<PurityReport> chamber_purity;     // multiplicity mode
    std::optional<PurityReport> url_nec_purity;     // distinct mode
    std::vector<TrustRow> trust;
};

/// The whole chain on one dataset. Label-dependent sections are produced
/// only when a label table is supplied.
RunResult run_all(const Dataset& dataset, const urltools::TrustLabelTable* labels,
                  const PipelineOptions& options);

/// JSON document listing chambers (flow node, memberships, internal edges),
/// excluded members, and the clustering report. Used for chambers.json.
nlohmann::json chambers_json(const EchoChamberSet& chambers, const ClusteringReport& clustering);

/// Reproducibility manifest: parameters, inputs, library version, optional
/// collection keywords. Deliberately carries no timestamps so identical runs
/// are byte-identical.
nlohmann::json run_manifest(const PipelineOptions& options, const nlohmann::json& inputs,
                            const std::vector<std::string>& keywords);

/// Writes the report bundle: dico_stats.csv, nec_members.csv, chambers.json,
/// flow_edges.csv, purity.json, trust_histogram.csv, run_manifest.json.
void write_report_bundle(const std::string& directory, const RunResult& result,
                         const nlohmann::json& manifest);

}  // namespace echo::pipeline
