#include "echo/pipeline.hpp"

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "echo/bicm.hpp"
#include "echo/community.hpp"
#include "echo/errors.hpp"
#include "echo/rng.hpp"
#include "echo/textio.hpp"
#include "echo/validation.hpp"

namespace echo::pipeline {
namespace {

constexpr const char* kLibraryName = "ecdetect";
constexpr const char* kLibraryVersion = "0.1.0";

// Seed streams: every stage derives its generator from the run seed so each
// stage is reproducible in isolation and stages never share a stream.
constexpr std::uint64_t kDicoLouvainStream = 1;
constexpr std::uint64_t kDicoPropagationStream = 2;
constexpr std::uint64_t kUserNecStream = 3;
constexpr std::uint64_t kUrlNecStream = 4;

bicm::FitOptions fit_options(const PipelineOptions& options) {
    bicm::FitOptions fit;
    fit.tolerance = options.bicm_tolerance;
    fit.max_iterations = options.bicm_max_iterations;
    return fit;
}

/// Renumbers raw community ids to 1..K ordered by descending size, ties by
/// smallest member id, so community numbering is stable across runs.
std::pair<std::unordered_map<std::string, int>, int> renumber_by_size(
    const std::unordered_map<std::string, int>& assignment) {
    struct Info {
        int size = 0;
        std::string least;
    };
    std::map<int, Info> info;
    for (const auto& [id, c] : assignment) {
        Info& entry = info[c];
        if (entry.size == 0 || id < entry.least) entry.least = id;
        ++entry.size;
    }
    std::vector<std::pair<int, const Info*>> order;
    order.reserve(info.size());
    for (const auto& [c, entry] : info) order.emplace_back(c, &entry);
    std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
        if (a.second->size != b.second->size) return a.second->size > b.second->size;
        return a.second->least < b.second->least;
    });
    std::unordered_map<int, int> renumbered;
    renumbered.reserve(order.size());
    for (std::size_t k = 0; k < order.size(); ++k) {
        renumbered[order[k].first] = static_cast<int>(k) + 1;
    }
    std::unordered_map<std::string, int> out;
    out.reserve(assignment.size());
    for (const auto& [id, c] : assignment) out[id] = renumbered[c];
    return {std::move(out), static_cast<int>(order.size())};
}

ProjectionSummary summarize(const validation::ValidatedProjection& projection,
                            const UndirectedWeightedGraph& vgraph, double modularity) {
    ProjectionSummary summary;
    summary.tested = projection.tested;
    summary.selected = projection.selected_count;
    summary.threshold = projection.threshold;
    summary.nodes = vgraph.node_count();
    summary.modularity = modularity;
    return summary;
}

struct LabelCounts {
    std::int64_t t = 0, n = 0, unc = 0;

    std::int64_t total() const { return t + n + unc; }

    void add(urltools::TrustLabel label, std::int64_t amount) {
        switch (label) {
            case urltools::TrustLabel::T: t += amount; break;
            case urltools::TrustLabel::N: n += amount; break;
            case urltools::TrustLabel::UNC: unc += amount; break;
            default: break;  // platform and satire items never enter the counts
        }
    }
};

struct ShareIndex {
    std::vector<std::vector<std::pair<int, std::int64_t>>> by_user;  // (url, count)
    std::vector<std::int64_t> url_multiplicity;                      // per url, all users
};

ShareIndex index_shares(const Dataset& dataset) {
    ShareIndex index;
    index.by_user.resize(static_cast<std::size_t>(dataset.user_count()));
    index.url_multiplicity.assign(static_cast<std::size_t>(dataset.url_count()), 0);
    for (const auto& [user, url, count] : dataset.shares()) {
        index.by_user[static_cast<std::size_t>(user)].emplace_back(url, count);
        index.url_multiplicity[static_cast<std::size_t>(url)] += count;
    }
    return index;
}

LabelCounts count_user_items(const ShareIndex& shares,
                             const std::vector<urltools::TrustLabel>& url_labels,
                             const std::vector<int>& member_users, CountMode mode) {
    std::map<int, std::int64_t> url_totals;
    for (const int user : member_users) {
        for (const auto& [url, count] : shares.by_user[static_cast<std::size_t>(user)]) {
            url_totals[url] += count;
        }
    }
    LabelCounts counts;
    for (const auto& [url, count] : url_totals) {
        counts.add(url_labels[static_cast<std::size_t>(url)],
                   mode == CountMode::distinct ? 1 : count);
    }
    return counts;
}

LabelCounts count_url_items(const ShareIndex& shares,
                            const std::vector<urltools::TrustLabel>& url_labels,
                            const std::vector<int>& member_urls, CountMode mode) {
    LabelCounts counts;
    for (const int url : member_urls) {
        counts.add(url_labels[static_cast<std::size_t>(url)],
                   mode == CountMode::distinct
                       ? 1
                       : shares.url_multiplicity[static_cast<std::size_t>(url)]);
    }
    return counts;
}

GroupPurity make_purity(const std::string& name, const LabelCounts& counts) {
    GroupPurity purity;
    purity.name = name;
    purity.items = counts.total();
    if (purity.items > 0) {
        purity.t = static_cast<double>(counts.t) / static_cast<double>(purity.items);
        purity.n = static_cast<double>(counts.n) / static_cast<double>(purity.items);
        purity.unc = static_cast<double>(counts.unc) / static_cast<double>(purity.items);
    }
    return purity;
}

nlohmann::json summary_json(const ProjectionSummary& summary) {
    return {{"tested", summary.tested},
            {"selected", summary.selected},
            {"threshold", summary.threshold},
            {"nodes", summary.nodes},
            {"modularity", summary.modularity}};
}

nlohmann::json purity_json(const PurityReport& report) {
    const auto entry = [](const GroupPurity& group) {
        return nlohmann::json{{"name", group.name},
                              {"t", group.t},
                              {"n", group.n},
                              {"unc", group.unc},
                              {"items", group.items}};
    };
    nlohmann::json doc;
    doc["mode"] = report.mode == CountMode::distinct ? "distinct" : "multiplicity";
    doc["members"] = report.members_are_users ? "users" : "urls";
    doc["groups"] = nlohmann::json::array();
    for (const auto& group : report.groups) doc["groups"].push_back(entry(group));
    doc["pooled"] = entry(report.pooled);
    doc["complement"] = entry(report.complement);
    return doc;
}

}  // namespace

DicoAssignment detect_dico(const Dataset& dataset, const PipelineOptions& options) {
    // Throws InputError("no seed layer: ...") when no verified user has
    // retweet interactions.
    const BipartiteGraph seed_graph = dataset.verified_unverified_graph();
    const bicm::BicmModel model = bicm::fit(seed_graph, fit_options(options));
    const validation::ValidatedProjection projection =
        validation::validated_projection(seed_graph, model, options.alpha, options.threads);
    const UndirectedWeightedGraph vgraph = validation::projection_graph(projection);

    DicoAssignment out;
    Partition part;
    if (vgraph.node_count() > 0) {
        community::LouvainOptions louvain;
        louvain.shuffles = options.shuffles;
        louvain.seed = rng::child_seed(options.seed, kDicoLouvainStream);
        part = community::louvain_shuffled(vgraph, louvain);
    }
    auto [core, count] = renumber_by_size(part.community);
    out.verified_core = part;
    out.verified_core.community = core;
    out.community_count = count;
    out.projection = summarize(projection, vgraph, part.modularity);

    community::LabelingOptions labeling;
    labeling.weighted = options.lp_weighted;
    labeling.seed = rng::child_seed(options.seed, kDicoPropagationStream);
    const community::SeededLabeling propagated =
        community::propagate_labels(dataset.retweet_graph(), core, labeling);
    out.propagation_converged = propagated.converged;
    out.propagation_sweeps = propagated.sweeps;
    out.dico = propagated.labels;
    // Seeds stay authoritative even for verified users outside the retweet
    // graph (none by construction, but the guarantee is cheap).
    for (const auto& [id, c] : core) out.dico[id] = c;

    std::vector<DicoStats> stats(static_cast<std::size_t>(count) + 1);
    for (int d = 0; d <= count; ++d) stats[static_cast<std::size_t>(d)].dico = d;
    const std::vector<std::string>& users = dataset.users();
    for (int u = 0; u < dataset.user_count(); ++u) {
        const auto it = out.dico.find(users[static_cast<std::size_t>(u)]);
        DicoStats& row = stats[static_cast<std::size_t>(it == out.dico.end() ? 0 : it->second)];
        const UserStats& per_user = dataset.user_stats(u);
        row.users += 1;
        row.tweets += per_user.tweets;
        row.retweets += per_user.retweets;
        row.url_tweets += per_user.url_tweets;
        row.url_retweets += per_user.url_retweets;
    }
    out.stats.assign(stats.begin() + 1, stats.end());
    out.stats.push_back(stats.front());  // the "none" row goes last
    return out;
}

NecAssignment detect_nec(const Dataset& dataset, NecLayer layer, const PipelineOptions& options) {
    // Throws InputError("dataset has no URL shares") when there is nothing to
    // project.
    const BipartiteGraph shares = dataset.user_url_graph();
    const BipartiteGraph graph = layer == NecLayer::users ? shares : shares.transposed();

    const bicm::BicmModel model = bicm::fit(graph, fit_options(options));
    const validation::ValidatedProjection projection =
        validation::validated_projection(graph, model, options.alpha, options.threads);
    const UndirectedWeightedGraph vgraph = validation::projection_graph(projection);

    NecAssignment out;
    out.layer = layer;
    out.layer_population = graph.top_count();
    out.validated_members = vgraph.node_count();

    Partition part;
    if (vgraph.node_count() > 0) {
        community::LouvainOptions louvain;
        louvain.shuffles = options.shuffles;
        louvain.seed = rng::child_seed(
            options.seed, layer == NecLayer::users ? kUserNecStream : kUrlNecStream);
        part = community::louvain_shuffled(vgraph, louvain);
    }
    auto [renumbered, count] = renumber_by_size(part.community);
    out.nec = std::move(renumbered);
    out.community_count = count;
    out.projection = summarize(projection, vgraph, part.modularity);

    std::unordered_map<std::string, std::int64_t> multiplicity;
    for (const auto& [user, url, count_shares] : dataset.shares()) {
        const std::string& key = layer == NecLayer::users
                                     ? dataset.users()[static_cast<std::size_t>(user)]
                                     : dataset.urls()[static_cast<std::size_t>(url)];
        multiplicity[key] += count_shares;
    }
    out.stats.resize(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) out.stats[static_cast<std::size_t>(k)].nec = k + 1;
    for (const auto& [id, c] : out.nec) {
        NecStats& row = out.stats[static_cast<std::size_t>(c - 1)];
        row.members += 1;
        const auto it = multiplicity.find(id);
        row.shares += it == multiplicity.end() ? 0 : it->second;
    }
    return out;
}

EchoChamberSet detect_echo_chambers(const Dataset& dataset, const DicoAssignment& dicos,
                                    const NecAssignment& necs) {
    if (necs.layer != NecLayer::users) {
        throw InputError("echo chambers need a user-layer NEC assignment");
    }
    const DirectedWeightedGraph& retweets = dataset.retweet_graph();

    // Users holding both memberships, bucketed by the (NEC, DiCo) pair.
    // Users whose DiCo is "none" never join a chamber.
    std::map<std::pair<int, int>, std::vector<std::string>> buckets;
    for (const auto& [id, nec] : necs.nec) {
        const auto it = dicos.dico.find(id);
        if (it == dicos.dico.end()) continue;
        buckets[{nec, it->second}].push_back(id);
    }

    EchoChamberSet out;
    std::unordered_set<std::string> chambered;
    for (auto& [key, members] : buckets) {
        std::sort(members.begin(), members.end());
        const std::unordered_set<std::string> member_set(members.begin(), members.end());
        const DirectedWeightedGraph sub = induced_subgraph(retweets, member_set);

        std::unordered_map<std::string, std::size_t> slot_of;
        const std::size_t first_slot = out.chambers.size();
        for (const auto& component : weakly_connected_components(sub)) {
            if (component.size() < 2) continue;
            EchoChamber chamber;
            chamber.nec = key.first;
            chamber.dico = key.second;
            chamber.members = component;  // components arrive sorted
            for (const auto& member : chamber.members) {
                slot_of.emplace(member, out.chambers.size());
                chambered.insert(member);
            }
            out.chambers.push_back(std::move(chamber));
        }
        if (out.chambers.size() == first_slot) continue;

        for (const auto& edge : sub.edges()) {
            const auto s = slot_of.find(sub.ids()[static_cast<std::size_t>(edge.source)]);
            const auto t = slot_of.find(sub.ids()[static_cast<std::size_t>(edge.target)]);
            if (s == slot_of.end() || t == slot_of.end() || s->second != t->second) continue;
            EchoChamber& chamber = out.chambers[s->second];
            chamber.internal_edges += 1;
            chamber.internal_weight += edge.weight;
        }
    }

    for (const auto& [id, nec] : necs.nec) {
        (void)nec;
        if (chambered.count(id) == 0) out.excluded_members.push_back(id);
    }
    std::sort(out.excluded_members.begin(), out.excluded_members.end());
    return out;
}

ClusteringReport clustering_report(const Dataset& dataset, const DicoAssignment& dicos,
                                   const EchoChamberSet& chambers) {
    ClusteringReport report;
    if (chambers.chambers.empty()) return report;

    std::set<int> dicos_used;
    for (const auto& chamber : chambers.chambers) dicos_used.insert(chamber.dico);

    const DirectedWeightedGraph& retweets = dataset.retweet_graph();
    std::unordered_map<int, ClusteringResult> coefficients;
    std::unordered_map<int, double> benchmarks;
    for (const int d : dicos_used) {
        std::unordered_set<std::string> members;
        for (const auto& [id, c] : dicos.dico) {
            if (c == d) members.insert(id);
        }
        const DirectedWeightedGraph sub = induced_subgraph(retweets, members);
        ClusteringResult clustering = undirected_clustering(sub, sub.ids());

        double benchmark = 0.0;
        const auto components = weakly_connected_components(sub);
        if (!components.empty()) {
            double sum = 0.0;
            for (const auto& id : components.front()) sum += clustering.coefficient.at(id);
            benchmark = sum / static_cast<double>(components.front().size());
        }
        report.dico_benchmarks.emplace_back(d, benchmark);
        benchmarks.emplace(d, benchmark);
        coefficients.emplace(d, std::move(clustering));
    }

    double pooled_sum = 0.0;
    std::int64_t pooled_count = 0;
    for (std::size_t i = 0; i < chambers.chambers.size(); ++i) {
        const EchoChamber& chamber = chambers.chambers[i];
        const ClusteringResult& clustering = coefficients.at(chamber.dico);
        double sum = 0.0;
        for (const auto& member : chamber.members) {
            const auto it = clustering.coefficient.find(member);
            const double value = it == clustering.coefficient.end() ? 0.0 : it->second;
            sum += value;
            pooled_sum += value;
        }
        pooled_count += static_cast<std::int64_t>(chamber.members.size());

        ChamberClustering row;
        row.chamber = static_cast<int>(i);
        row.nec = chamber.nec;
        row.dico = chamber.dico;
        row.mean = sum / static_cast<double>(chamber.members.size());
        row.benchmark = benchmarks.at(chamber.dico);
        report.chambers.push_back(row);
    }
    report.pooled = pooled_count == 0 ? 0.0 : pooled_sum / static_cast<double>(pooled_count);
    return report;
}

DirectedWeightedGraph aggregate_flow(const DirectedWeightedGraph& retweets,
                                     const EchoChamberSet& chambers, std::int64_t min_weight) {
    if (min_weight < 0) throw InputError("minimum flow weight must be non-negative");

    std::unordered_map<std::string, int> flow_node;
    for (std::size_t i = 0; i < chambers.chambers.size(); ++i) {
        for (const auto& member : chambers.chambers[i].members) {
            flow_node[member] = static_cast<int>(i);
        }
    }

    std::map<std::pair<int, int>, std::int64_t> accumulated;
    for (const auto& edge : retweets.edges()) {
        const auto s = flow_node.find(retweets.ids()[static_cast<std::size_t>(edge.source)]);
        const auto t = flow_node.find(retweets.ids()[static_cast<std::size_t>(edge.target)]);
        const int fs = s == flow_node.end() ? -1 : s->second;
        const int ft = t == flow_node.end() ? -1 : t->second;
        accumulated[{fs, ft}] += edge.weight;
    }

    // Zero-weight self-loops intern every flow node up front (chambers in
    // order, then the outside pool) so the node set does not depend on which
    // aggregate edges survive the weight filter.
    std::vector<std::tuple<std::string, std::string, std::int64_t>> edges;
    edges.reserve(accumulated.size() + chambers.chambers.size() + 1);
    for (std::size_t i = 0; i < chambers.chambers.size(); ++i) {
        const std::string id = std::to_string(i);
        edges.emplace_back(id, id, 0);
    }
    edges.emplace_back("-1", "-1", 0);
    for (const auto& [key, weight] : accumulated) {
        if (weight < min_weight) continue;
        edges.emplace_back(std::to_string(key.first), std::to_string(key.second), weight);
    }
    return DirectedWeightedGraph::from_edges(edges);
}

PurityReport purity(const Dataset& dataset, const urltools::TrustLabelTable& labels,
                    const std::vector<PurityGroup>& groups, bool members_are_users,
                    CountMode mode) {
    const std::vector<urltools::TrustLabel> url_labels = join_labels(dataset, labels);
    const ShareIndex shares = index_shares(dataset);

    PurityReport report;
    report.mode = mode;
    report.members_are_users = members_are_users;

    LabelCounts pooled;
    std::unordered_set<int> in_any_group;
    for (const auto& group : groups) {
        std::vector<int> members;
        members.reserve(group.members.size());
        for (const auto& member : group.members) {
            // user_index / url_index throw InputError on unknown members
            const int index =
                members_are_users ? dataset.user_index(member) : dataset.url_index(member);
            members.push_back(index);
            in_any_group.insert(index);
        }
        const LabelCounts counts = members_are_users
                                       ? count_user_items(shares, url_labels, members, mode)
                                       : count_url_items(shares, url_labels, members, mode);
        report.groups.push_back(make_purity(group.name, counts));
        pooled.t += counts.t;
        pooled.n += counts.n;
        pooled.unc += counts.unc;
    }
    report.pooled = make_purity("pooled", pooled);

    std::vector<int> outsiders;
    const int population = members_are_users ? dataset.user_count() : dataset.url_count();
    for (int i = 0; i < population; ++i) {
        if (in_any_group.count(i) == 0) outsiders.push_back(i);
    }
    const LabelCounts rest = members_are_users
                                 ? count_user_items(shares, url_labels, outsiders, mode)
                                 : count_url_items(shares, url_labels, outsiders, mode);
    report.complement = make_purity("complement", rest);
    return report;
}

std::vector<TrustRow> trust_histogram(const Dataset& dataset,
                                      const urltools::TrustLabelTable& labels,
                                      const std::vector<Grouping>& groupings) {
    const std::vector<urltools::TrustLabel> url_labels = join_labels(dataset, labels);
    const ShareIndex shares = index_shares(dataset);

    std::vector<TrustRow> rows;
    for (const auto& grouping : groupings) {
        for (const auto& group : grouping.groups) {
            std::vector<int> members;
            members.reserve(group.members.size());
            for (const auto& member : group.members) {
                members.push_back(grouping.members_are_users ? dataset.user_index(member)
                                                             : dataset.url_index(member));
            }
            const LabelCounts distinct =
                grouping.members_are_users
                    ? count_user_items(shares, url_labels, members, CountMode::distinct)
                    : count_url_items(shares, url_labels, members, CountMode::distinct);
            const LabelCounts multiplicity =
                grouping.members_are_users
                    ? count_user_items(shares, url_labels, members, CountMode::multiplicity)
                    : count_url_items(shares, url_labels, members, CountMode::multiplicity);

            TrustRow row;
            row.grouping = grouping.name;
            row.group = group.name;
            row.t_urls = distinct.t;
            row.n_urls = distinct.n;
            row.unc_urls = distinct.unc;
            row.t_shares = multiplicity.t;
            row.n_shares = multiplicity.n;
            row.unc_shares = multiplicity.unc;
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

RunResult run_all(const Dataset& dataset, const urltools::TrustLabelTable* labels,
                  const PipelineOptions& options) {
    RunResult result;
    result.dico = detect_dico(dataset, options);
    result.user_nec = detect_nec(dataset, NecLayer::users, options);
    result.url_nec = detect_nec(dataset, NecLayer::urls, options);
    result.chambers = detect_echo_chambers(dataset, result.dico, result.user_nec);
    result.clustering = clustering_report(dataset, result.dico, result.chambers);
    result.flow =
        aggregate_flow(dataset.retweet_graph(), result.chambers, options.min_flow_weight);

    if (labels == nullptr) return result;

    std::vector<PurityGroup> chamber_groups;
    chamber_groups.reserve(result.chambers.chambers.size());
    for (std::size_t i = 0; i < result.chambers.chambers.size(); ++i) {
        chamber_groups.push_back(
            {std::to_string(i), result.chambers.chambers[i].members});
    }
    result.chamber_purity =
        purity(dataset, *labels, chamber_groups, true, CountMode::multiplicity);

    std::map<int, std::vector<std::string>> urls_per_nec;
    for (const auto& [url, c] : result.url_nec->nec) urls_per_nec[c].push_back(url);
    std::vector<PurityGroup> url_groups;
    url_groups.reserve(urls_per_nec.size());
    for (auto& [c, members] : urls_per_nec) {
        std::sort(members.begin(), members.end());
        url_groups.push_back({std::to_string(c), std::move(members)});
    }
    result.url_nec_purity = purity(dataset, *labels, url_groups, false, CountMode::distinct);

    std::vector<Grouping> groupings;
    {
        Grouping dataset_grouping{"dataset", {}, true};
        dataset_grouping.groups.push_back({"all", dataset.users()});
        groupings.push_back(std::move(dataset_grouping));
    }
    {
        Grouping dico_grouping{"dico", {}, true};
        std::map<int, std::vector<std::string>> per_dico;  // 0 collects "none"
        for (const auto& user : dataset.users()) {
            const auto it = result.dico.dico.find(user);
            per_dico[it == result.dico.dico.end() ? 0 : it->second].push_back(user);
        }
        for (auto& [c, members] : per_dico) {
            if (c == 0) continue;
            std::sort(members.begin(), members.end());
            dico_grouping.groups.push_back({std::to_string(c), std::move(members)});
        }
        const auto none = per_dico.find(0);
        if (none != per_dico.end()) {
            std::sort(none->second.begin(), none->second.end());
            dico_grouping.groups.push_back({"none", std::move(none->second)});
        }
        groupings.push_back(std::move(dico_grouping));
    }
    {
        Grouping nec_grouping{"nec", {}, true};
        std::map<int, std::vector<std::string>> per_nec;
        for (const auto& [user, c] : result.user_nec.nec) per_nec[c].push_back(user);
        for (auto& [c, members] : per_nec) {
            std::sort(members.begin(), members.end());
            nec_grouping.groups.push_back({std::to_string(c), std::move(members)});
        }
        groupings.push_back(std::move(nec_grouping));
    }
    {
        Grouping chamber_grouping{"chamber", {}, true};
        for (std::size_t i = 0; i < result.chambers.chambers.size(); ++i) {
            chamber_grouping.groups.push_back(
                {std::to_string(i), result.chambers.chambers[i].members});
        }
        groupings.push_back(std::move(chamber_grouping));
    }
    result.trust = trust_histogram(dataset, *labels, groupings);
    return result;
}

nlohmann::json run_manifest(const PipelineOptions& options, const nlohmann::json& inputs,
                            const std::vector<std::string>& keywords) {
    nlohmann::json manifest;
    manifest["library"] = {{"name", kLibraryName}, {"version", kLibraryVersion}};
    manifest["parameters"] = {
        {"alpha", options.alpha},
        {"shuffles", options.shuffles},
        {"seed", options.seed},
        {"lp_weighted", options.lp_weighted},
        {"min_flow_weight", options.min_flow_weight},
        {"bicm",
         {{"tolerance", options.bicm_tolerance}, {"max_iterations", options.bicm_max_iterations}}},
        {"threads", options.threads},
    };
    manifest["inputs"] = inputs;
    manifest["keywords"] = keywords;
    return manifest;
}

nlohmann::json chambers_json(const EchoChamberSet& chambers, const ClusteringReport& clustering) {
    nlohmann::json doc;
    doc["chambers"] = nlohmann::json::array();
    for (std::size_t i = 0; i < chambers.chambers.size(); ++i) {
        const EchoChamber& chamber = chambers.chambers[i];
        doc["chambers"].push_back({
            {"flow_node", static_cast<int>(i)},
            {"nec", chamber.nec},
            {"dico", chamber.dico},
            {"size", chamber.members.size()},
            {"members", chamber.members},
            {"internal_edges", chamber.internal_edges},
            {"internal_retweet_weight", chamber.internal_weight},
        });
    }
    doc["excluded_members"] = chambers.excluded_members;

    nlohmann::json report;
    report["pooled"] = clustering.pooled;
    report["dico_benchmarks"] = nlohmann::json::array();
    for (const auto& [dico, benchmark] : clustering.dico_benchmarks) {
        report["dico_benchmarks"].push_back({{"dico", dico}, {"mean", benchmark}});
    }
    report["chambers"] = nlohmann::json::array();
    for (const auto& row : clustering.chambers) {
        report["chambers"].push_back({{"chamber", row.chamber},
                                      {"nec", row.nec},
                                      {"dico", row.dico},
                                      {"mean", row.mean},
                                      {"benchmark", row.benchmark}});
    }
    doc["clustering"] = std::move(report);
    return doc;
}

void write_report_bundle(const std::string& directory, const RunResult& result,
                         const nlohmann::json& manifest) {
    namespace fs = std::filesystem;
    const fs::path dir(directory);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw InputError("cannot create report directory: " + directory);

    const auto open = [&dir](const char* name) {
        std::ofstream out(dir / name, std::ios::binary);
        if (!out) throw InputError(std::string("cannot write report file: ") + name);
        return out;
    };

    {
        auto out = open("dico_stats.csv");
        textio::write_csv_row(
            out, {"dico", "users", "tweets", "retweets", "tweets_with_url", "retweets_with_url"});
        for (const auto& row : result.dico.stats) {
            textio::write_csv_row(
                out, {row.dico == 0 ? std::string("none") : std::to_string(row.dico),
                      std::to_string(row.users), std::to_string(row.tweets),
                      std::to_string(row.retweets), std::to_string(row.url_tweets),
                      std::to_string(row.url_retweets)});
        }
    }

    {
        auto out = open("nec_members.csv");
        textio::write_csv_row(out, {"layer", "nec", "member"});
        const auto dump_layer = [&out](const char* layer, const NecAssignment& nec) {
            std::map<int, std::vector<std::string>> per_nec;
            for (const auto& [member, c] : nec.nec) per_nec[c].push_back(member);
            for (auto& [c, members] : per_nec) {
                std::sort(members.begin(), members.end());
                for (const auto& member : members) {
                    textio::write_csv_row(out, {layer, std::to_string(c), member});
                }
            }
        };
        dump_layer("users", result.user_nec);
        if (result.url_nec.has_value()) dump_layer("urls", *result.url_nec);
    }

    {
        auto out = open("chambers.json");
        out << chambers_json(result.chambers, result.clustering).dump(2) << "\n";
    }

    {
        auto out = open("flow_edges.csv");
        textio::write_csv_row(out, {"source", "target", "weight"});
        for (const auto& edge : result.flow.edges()) {
            textio::write_csv_row(out, {result.flow.ids()[static_cast<std::size_t>(edge.source)],
                                        result.flow.ids()[static_cast<std::size_t>(edge.target)],
                                        std::to_string(edge.weight)});
        }
    }

    {
        nlohmann::json doc;
        doc["echo_chambers"] = result.chamber_purity.has_value()
                                   ? purity_json(*result.chamber_purity)
                                   : nlohmann::json();
        doc["url_necs"] = result.url_nec_purity.has_value() ? purity_json(*result.url_nec_purity)
                                                            : nlohmann::json();
        auto out = open("purity.json");
        out << doc.dump(2) << "\n";
    }

    {
        auto out = open("trust_histogram.csv");
        textio::write_csv_row(out, {"grouping", "group", "t_urls", "n_urls", "unc_urls",
                                    "t_shares", "n_shares", "unc_shares"});
        for (const auto& row : result.trust) {
            textio::write_csv_row(
                out, {row.grouping, row.group, std::to_string(row.t_urls),
                      std::to_string(row.n_urls), std::to_string(row.unc_urls),
                      std::to_string(row.t_shares), std::to_string(row.n_shares),
                      std::to_string(row.unc_shares)});
        }
    }

    {
        nlohmann::json doc = manifest;
        nlohmann::json results;
        results["dicos"] = result.dico.community_count;
        results["dico_projection"] = summary_json(result.dico.projection);
        results["propagation"] = {{"converged", result.dico.propagation_converged},
                                  {"sweeps", result.dico.propagation_sweeps}};
        results["user_necs"] = result.user_nec.community_count;
        results["user_nec_projection"] = summary_json(result.user_nec.projection);
        if (result.url_nec.has_value()) {
            results["url_necs"] = result.url_nec->community_count;
            results["url_nec_projection"] = summary_json(result.url_nec->projection);
        } else {
            results["url_necs"] = nlohmann::json();
            results["url_nec_projection"] = nlohmann::json();
        }
        results["chambers"] = result.chambers.chambers.size();
        results["excluded_members"] = result.chambers.excluded_members.size();
        doc["results"] = std::move(results);

        auto out = open("run_manifest.json");
        out << doc.dump(2) << "\n";
    }
}

}  // namespace echo::pipeline
