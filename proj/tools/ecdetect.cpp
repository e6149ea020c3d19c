// Command-line front end: ingest JSONL tweet corpora, detect discourse and
// news-engagement communities, intersect them into echo chambers, and write
// the report bundle. Exit codes: 0 success, 1 input error, 2 non-convergence.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "echo/dataset.hpp"
#include "echo/errors.hpp"
#include "echo/pipeline.hpp"
#include "echo/synth.hpp"
#include "echo/textio.hpp"
#include "echo/urltools.hpp"

namespace {

struct GlobalArgs {
    double alpha = 0.05;
    int shuffles = 1000;
    std::uint64_t seed = 0;
    bool lp_weighted = false;
    std::int64_t min_flow_weight = 1000;
    std::string url_map;
    std::string labels;
    bool strict = false;
    double bicm_tolerance = 1e-8;
    int bicm_max_iterations = 5000;
    int threads = 1;
};

echo::pipeline::PipelineOptions pipeline_options(const GlobalArgs& g) {
    echo::pipeline::PipelineOptions options;
    options.alpha = g.alpha;
    options.shuffles = g.shuffles;
    options.seed = g.seed;
    options.lp_weighted = g.lp_weighted;
    options.min_flow_weight = g.min_flow_weight;
    options.bicm_tolerance = g.bicm_tolerance;
    options.bicm_max_iterations = g.bicm_max_iterations;
    options.threads = g.threads;
    return options;
}

echo::urltools::UrlResolver make_resolver(const GlobalArgs& g) {
    if (g.url_map.empty()) return nullptr;
    return echo::urltools::make_map_resolver(echo::urltools::load_url_map(g.url_map));
}

void print_warnings(const std::vector<std::string>& warnings) {
    for (const auto& warning : warnings) std::cerr << "warning: " << warning << "\n";
}

/// Analysis commands accept a raw JSONL corpus (--input) or a snapshot
/// produced by `ingest` (--snapshot); exactly one must be given.
echo::Dataset load_input(const GlobalArgs& g, const std::string& input,
                         const std::string& snapshot) {
    if (input.empty() == snapshot.empty()) {
        throw echo::InputError("provide exactly one of --input or --snapshot");
    }
    if (!snapshot.empty()) return echo::Dataset::load_snapshot(snapshot);
    echo::ParseResult parsed = echo::parse_tweets_file(input, make_resolver(g), g.strict);
    print_warnings(parsed.warnings);
    return std::move(parsed.dataset);
}

std::optional<echo::urltools::TrustLabelTable> load_labels(const GlobalArgs& g) {
    if (g.labels.empty()) return std::nullopt;
    return echo::urltools::load_labels_csv(g.labels);
}

std::ofstream open_output(const std::filesystem::path& dir, const char* name) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw echo::InputError("cannot create output directory: " + dir.string());
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw echo::InputError(std::string("cannot write output file: ") + name);
    return out;
}

void write_dico_stats(std::ostream& out, const echo::pipeline::DicoAssignment& dico) {
    echo::textio::write_csv_row(
        out, {"dico", "users", "tweets", "retweets", "tweets_with_url", "retweets_with_url"});
    for (const auto& row : dico.stats) {
        echo::textio::write_csv_row(
            out, {row.dico == 0 ? std::string("none") : std::to_string(row.dico),
                  std::to_string(row.users), std::to_string(row.tweets),
                  std::to_string(row.retweets), std::to_string(row.url_tweets),
                  std::to_string(row.url_retweets)});
    }
}

void write_flow_edges(std::ostream& out, const echo::DirectedWeightedGraph& flow) {
    echo::textio::write_csv_row(out, {"source", "target", "weight"});
    for (const auto& edge : flow.edges()) {
        echo::textio::write_csv_row(out, {flow.ids()[static_cast<std::size_t>(edge.source)],
                                          flow.ids()[static_cast<std::size_t>(edge.target)],
                                          std::to_string(edge.weight)});
    }
}

nlohmann::json describe_inputs(const char* command, const GlobalArgs& g,
                               const std::string& input, const std::string& snapshot) {
    nlohmann::json inputs;
    inputs["command"] = command;
    inputs["input"] = input.empty() ? nlohmann::json() : nlohmann::json(input);
    inputs["snapshot"] = snapshot.empty() ? nlohmann::json() : nlohmann::json(snapshot);
    inputs["labels"] = g.labels.empty() ? nlohmann::json() : nlohmann::json(g.labels);
    inputs["url_map"] = g.url_map.empty() ? nlohmann::json() : nlohmann::json(g.url_map);
    inputs["strict"] = g.strict;
    return inputs;
}

int cmd_ingest(const GlobalArgs& g, const std::string& input, const std::string& snapshot,
               const std::string& export_path) {
    echo::ParseResult parsed = echo::parse_tweets_file(input, make_resolver(g), g.strict);
    print_warnings(parsed.warnings);
    const echo::Dataset& dataset = parsed.dataset;
    dataset.save_snapshot(snapshot);
    if (!export_path.empty()) {
        std::ofstream out(export_path, std::ios::binary);
        if (!out) throw echo::InputError("cannot write export file: " + export_path);
        dataset.export_jsonl(out);
    }
    const echo::IngestCounters& counters = dataset.counters();
    std::cout << "parsed=" << counters.parsed << " malformed=" << counters.malformed
              << " duplicates=" << counters.duplicates
              << " flagged_urls=" << counters.flagged_urls << " users=" << dataset.user_count()
              << " urls=" << dataset.url_count() << " snapshot=" << snapshot << "\n";
    return 0;
}

int cmd_dico(const GlobalArgs& g, const std::string& input, const std::string& snapshot,
             const std::string& out_dir) {
    const echo::Dataset dataset = load_input(g, input, snapshot);
    const echo::pipeline::DicoAssignment dico =
        echo::pipeline::detect_dico(dataset, pipeline_options(g));

    const std::filesystem::path dir(out_dir);
    {
        auto out = open_output(dir, "dico_stats.csv");
        write_dico_stats(out, dico);
    }
    {
        auto out = open_output(dir, "dico_members.csv");
        echo::textio::write_csv_row(out, {"user", "dico", "seed"});
        std::map<std::string, int> sorted(dico.dico.begin(), dico.dico.end());
        for (const auto& [user, community] : sorted) {
            const bool seeded = dico.verified_core.community.count(user) > 0;
            echo::textio::write_csv_row(
                out, {user, std::to_string(community), seeded ? "1" : "0"});
        }
    }
    std::cout << "dicos=" << dico.community_count << " tested=" << dico.projection.tested
              << " selected=" << dico.projection.selected
              << " propagation_sweeps=" << dico.propagation_sweeps
              << " converged=" << (dico.propagation_converged ? "yes" : "no") << "\n";
    return 0;
}

int cmd_nec(const GlobalArgs& g, const std::string& input, const std::string& snapshot,
            const std::string& layer_name, const std::string& out_dir) {
    const echo::Dataset dataset = load_input(g, input, snapshot);
    const echo::pipeline::NecLayer layer = layer_name == "urls"
                                               ? echo::pipeline::NecLayer::urls
                                               : echo::pipeline::NecLayer::users;
    const echo::pipeline::NecAssignment nec =
        echo::pipeline::detect_nec(dataset, layer, pipeline_options(g));

    const std::filesystem::path dir(out_dir);
    {
        auto out = open_output(dir, "nec_stats.csv");
        echo::textio::write_csv_row(out, {"nec", "members", "shares"});
        for (const auto& row : nec.stats) {
            echo::textio::write_csv_row(out, {std::to_string(row.nec),
                                              std::to_string(row.members),
                                              std::to_string(row.shares)});
        }
    }
    {
        auto out = open_output(dir, "nec_members.csv");
        echo::textio::write_csv_row(out, {"layer", "nec", "member"});
        std::map<int, std::vector<std::string>> per_nec;
        for (const auto& [member, c] : nec.nec) per_nec[c].push_back(member);
        for (auto& [c, members] : per_nec) {
            std::sort(members.begin(), members.end());
            for (const auto& member : members) {
                echo::textio::write_csv_row(out, {layer_name, std::to_string(c), member});
            }
        }
    }
    std::cout << "layer=" << layer_name << " necs=" << nec.community_count
              << " population=" << nec.layer_population
              << " validated=" << nec.validated_members << " tested=" << nec.projection.tested
              << " selected=" << nec.projection.selected << "\n";
    return 0;
}

int cmd_echo(const GlobalArgs& g, const std::string& input, const std::string& snapshot,
             const std::string& out_dir) {
    const echo::Dataset dataset = load_input(g, input, snapshot);
    const echo::pipeline::PipelineOptions options = pipeline_options(g);
    const echo::pipeline::DicoAssignment dico = echo::pipeline::detect_dico(dataset, options);
    const echo::pipeline::NecAssignment nec =
        echo::pipeline::detect_nec(dataset, echo::pipeline::NecLayer::users, options);
    const echo::pipeline::EchoChamberSet chambers =
        echo::pipeline::detect_echo_chambers(dataset, dico, nec);
    const echo::pipeline::ClusteringReport clustering =
        echo::pipeline::clustering_report(dataset, dico, chambers);
    const echo::DirectedWeightedGraph flow = echo::pipeline::aggregate_flow(
        dataset.retweet_graph(), chambers, options.min_flow_weight);

    const std::filesystem::path dir(out_dir);
    {
        auto out = open_output(dir, "chambers.json");
        out << echo::pipeline::chambers_json(chambers, clustering).dump(2) << "\n";
    }
    {
        auto out = open_output(dir, "flow_edges.csv");
        write_flow_edges(out, flow);
    }
    std::cout << "chambers=" << chambers.chambers.size()
              << " excluded=" << chambers.excluded_members.size()
              << " dicos=" << dico.community_count << " necs=" << nec.community_count << "\n";
    return 0;
}

int cmd_report(const char* command, const GlobalArgs& g, const std::string& input,
               const std::string& snapshot, const std::string& save_snapshot,
               const std::string& out_dir, const std::vector<std::string>& keywords) {
    const echo::Dataset dataset = load_input(g, input, snapshot);
    if (!save_snapshot.empty()) dataset.save_snapshot(save_snapshot);

    const std::optional<echo::urltools::TrustLabelTable> labels = load_labels(g);
    const echo::pipeline::PipelineOptions options = pipeline_options(g);
    const echo::pipeline::RunResult result =
        echo::pipeline::run_all(dataset, labels.has_value() ? &*labels : nullptr, options);
    const nlohmann::json manifest = echo::pipeline::run_manifest(
        options, describe_inputs(command, g, input, snapshot), keywords);
    echo::pipeline::write_report_bundle(out_dir, result, manifest);

    std::cout << "dicos=" << result.dico.community_count
              << " user_necs=" << result.user_nec.community_count << " url_necs="
              << (result.url_nec.has_value() ? result.url_nec->community_count : 0)
              << " chambers=" << result.chambers.chambers.size()
              << " excluded=" << result.chambers.excluded_members.size()
              << " report=" << out_dir << "\n";
    return 0;
}

int cmd_synth(const GlobalArgs& g, echo::synth::SyntheticConfig config,
              const std::string& out_dir) {
    config.seed = g.seed;
    const echo::synth::SyntheticData data = echo::synth::generate_synthetic(config);
    echo::synth::write_synthetic(data, out_dir);
    const nlohmann::json& ledger = data.manifest.at("ledger");
    std::cout << "records=" << ledger.at("records").get<std::int64_t>()
              << " users=" << ledger.at("distinct_users").get<std::int64_t>()
              << " urls=" << ledger.at("distinct_urls").get<std::int64_t>()
              << " out=" << out_dir << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Echo-chamber detection over retweet and URL-sharing networks"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalArgs g;
    app.add_option("--alpha", g.alpha, "FDR level for projection validation")
        ->capture_default_str();
    app.add_option("--shuffles", g.shuffles, "community-detection restarts over shuffled orders")
        ->capture_default_str();
    app.add_option("--seed", g.seed, "run seed; every stage derives its own stream")
        ->capture_default_str();
    app.add_flag("--lp-weighted", g.lp_weighted,
                 "weight the label-propagation majority by retweet counts");
    app.add_option("--min-flow-weight", g.min_flow_weight,
                   "drop aggregated flow edges lighter than this")
        ->capture_default_str();
    app.add_option("--url-map", g.url_map, "CSV short→long URL map for the resolver");
    app.add_option("--labels", g.labels, "CSV domain→trust-label table");
    app.add_flag("--strict", g.strict, "abort ingestion on the first malformed line");
    app.add_option("--bicm-tol", g.bicm_tolerance, "null-model degree residual tolerance")
        ->capture_default_str();
    app.add_option("--bicm-max-iter", g.bicm_max_iterations, "null-model iteration cap")
        ->capture_default_str();
    app.add_option("--threads", g.threads, "worker threads for p-value families")
        ->capture_default_str();

    auto* ingest = app.add_subcommand("ingest", "Parse a JSONL corpus into a binary snapshot");
    std::string ingest_input, ingest_snapshot, ingest_export;
    ingest->add_option("--input", ingest_input, "JSONL tweet records")->required();
    ingest->add_option("--snapshot", ingest_snapshot, "snapshot file to write")->required();
    ingest->add_option("--export", ingest_export, "also export the canonicalized JSONL");

    std::string in_path, snap_path, out_dir;
    const auto add_io = [&](CLI::App* cmd, bool with_out = true) {
        cmd->add_option("--input", in_path, "JSONL tweet records");
        cmd->add_option("--snapshot", snap_path, "snapshot produced by `ingest`");
        if (with_out) cmd->add_option("--out", out_dir, "output directory")->required();
    };

    auto* dico = app.add_subcommand("dico", "Detect discourse communities");
    add_io(dico);

    auto* nec = app.add_subcommand("nec", "Detect news-engagement communities");
    std::string nec_layer = "users";
    nec->add_option("--layer", nec_layer, "projection layer")
        ->check(CLI::IsMember({"users", "urls"}))
        ->capture_default_str();
    add_io(nec);

    auto* echo_cmd = app.add_subcommand("echo", "Detect echo chambers");
    add_io(echo_cmd);

    auto* report = app.add_subcommand("report", "Run the full pipeline and write the bundle");
    add_io(report);
    std::vector<std::string> keywords;
    report->add_option("--keywords", keywords, "collection keywords recorded in the manifest");

    auto* run_all = app.add_subcommand("run-all", "Ingest and run the full pipeline");
    add_io(run_all);
    std::string run_all_snapshot;
    run_all->add_option("--save-snapshot", run_all_snapshot, "also save a snapshot here");
    run_all->add_option("--keywords", keywords, "collection keywords recorded in the manifest");

    auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus with ground truth");
    echo::synth::SyntheticConfig config;
    std::string synth_out;
    synth->add_option("--out", synth_out, "output directory")->required();
    synth->add_option("--camps", config.camps)->capture_default_str();
    synth->add_option("--verified-per-camp", config.verified_per_camp)->capture_default_str();
    synth->add_option("--unverified-per-camp", config.unverified_per_camp)
        ->capture_default_str();
    synth->add_option("--chambers-per-camp", config.chambers_per_camp)->capture_default_str();
    synth->add_option("--chamber-size", config.chamber_size)->capture_default_str();
    synth->add_option("--chamber-share-prob", config.chamber_share_prob)->capture_default_str();
    synth->add_option("--chamber-retweet-prob", config.chamber_retweet_prob)
        ->capture_default_str();
    synth->add_option("--chamber-url-pool", config.chamber_url_pool)->capture_default_str();
    synth->add_option("--noise-url-pool", config.noise_url_pool)->capture_default_str();
    synth->add_option("--noise-urls-per-user", config.noise_urls_per_user)
        ->capture_default_str();
    synth->add_option("--noise-retweet-rate", config.noise_retweet_rate)->capture_default_str();
    synth->add_option("--cross-camp-rate", config.cross_camp_rate)->capture_default_str();
    synth->add_option("--retweets-per-user", config.retweets_per_user)->capture_default_str();
    synth->add_option("--tweets-per-verified", config.tweets_per_verified)
        ->capture_default_str();
    synth->add_option("--fraction-n-domains", config.fraction_n_domains)->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (ingest->parsed()) return cmd_ingest(g, ingest_input, ingest_snapshot, ingest_export);
        if (dico->parsed()) return cmd_dico(g, in_path, snap_path, out_dir);
        if (nec->parsed()) return cmd_nec(g, in_path, snap_path, nec_layer, out_dir);
        if (echo_cmd->parsed()) return cmd_echo(g, in_path, snap_path, out_dir);
        if (report->parsed()) {
            return cmd_report("report", g, in_path, snap_path, "", out_dir, keywords);
        }
        if (run_all->parsed()) {
            return cmd_report("run-all", g, in_path, snap_path, run_all_snapshot, out_dir,
                              keywords);
        }
        if (synth->parsed()) return cmd_synth(g, config, synth_out);
    } catch (const echo::InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const echo::ConvergenceError& e) {
        std::cerr << "error: " << e.what() << " (residual " << e.residual() << " after "
                  << e.iterations() << " iterations)\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
