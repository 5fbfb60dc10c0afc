#include "g2g/cli.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "g2g/checkpoint.hpp"
#include "g2g/evaluation.hpp"

namespace g2g {

namespace {

nlohmann::json edges_to_json(const std::vector<Edge>& edges) {
    auto arr = nlohmann::json::array();
    for (const auto& [u, v] : edges) arr.push_back({u, v});
    return arr;
}

std::vector<Edge> edges_from_json(const nlohmann::json& arr) {
    std::vector<Edge> edges;
    for (const auto& e : arr) edges.emplace_back(e.at(0).get<NodeId>(), e.at(1).get<NodeId>());
    return edges;
}

void write_json_file(const nlohmann::json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write file: " + path);
    out << j.dump(2) << '\n';
}

nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path);
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path + ": invalid JSON: " + e.what());
    }
}

} // namespace

nlohmann::json split_to_json(const DataSplit& split) {
    nlohmann::json j;
    j["train_edges"] = edges_to_json(split.train_edges);
    j["val_edges"] = edges_to_json(split.val_edges);
    j["test_edges"] = edges_to_json(split.test_edges);
    j["val_non_edges"] = edges_to_json(split.val_non_edges);
    j["test_non_edges"] = edges_to_json(split.test_non_edges);
    j["hidden_nodes"] = split.hidden_nodes;
    return j;
}

DataSplit split_from_json(const nlohmann::json& j) {
    DataSplit split;
    split.train_edges = edges_from_json(j.at("train_edges"));
    split.val_edges = edges_from_json(j.at("val_edges"));
    split.test_edges = edges_from_json(j.at("test_edges"));
    split.val_non_edges = edges_from_json(j.at("val_non_edges"));
    split.test_non_edges = edges_from_json(j.at("test_non_edges"));
    split.hidden_nodes = j.at("hidden_nodes").get<std::vector<NodeId>>();
    return split;
}

void save_split_manifest(const DataSplit& split, const std::string& path, const nlohmann::json& extra) {
    nlohmann::json j = split_to_json(split);
    j["meta"] = extra;
    write_json_file(j, path);
}

DataSplit load_split_manifest(const std::string& path, nlohmann::json* extra) {
    nlohmann::json j = read_json_file(path);
    if (extra && j.contains("meta")) *extra = j["meta"];
    return split_from_json(j);
}

nlohmann::json trace_to_json(const TrainingTrace& trace) {
    nlohmann::json j;
    j["loss"] = trace.loss;
    auto val = nlohmann::json::array();
    for (const auto& [epoch, score] : trace.val_auc) val.push_back({epoch, score});
    j["val_auc"] = val;
    j["mean_variance"] = trace.mean_variance;
    j["sampled_terms"] = trace.sampled_terms;
    j["best_epoch"] = trace.best_epoch;
    j["best_val_auc"] = trace.best_val_auc;
    j["epochs_run"] = trace.epochs_run;
    return j;
}

TrainingTrace trace_from_json(const nlohmann::json& j) {
    TrainingTrace trace;
    trace.loss = j.at("loss").get<std::vector<double>>();
    for (const auto& entry : j.at("val_auc")) {
        trace.val_auc.emplace_back(entry.at(0).get<int>(), entry.at(1).get<double>());
    }
    trace.mean_variance = j.at("mean_variance").get<std::vector<std::vector<double>>>();
    trace.sampled_terms = j.at("sampled_terms").get<std::vector<std::size_t>>();
    trace.best_epoch = j.at("best_epoch").get<int>();
    trace.best_val_auc = j.at("best_val_auc").get<double>();
    trace.epochs_run = j.at("epochs_run").get<int>();
    return trace;
}

void save_trace(const TrainingTrace& trace, const std::string& path) {
    write_json_file(trace_to_json(trace), path);
}

TrainingTrace load_trace(const std::string& path) { return trace_from_json(read_json_file(path)); }

void write_embedding_tsv(const std::vector<GaussianEmbedding>& embeddings, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write file: " + path);
    char buffer[64];
    for (std::size_t i = 0; i < embeddings.size(); ++i) {
        out << i;
        for (double m : embeddings[i].mu) {
            std::snprintf(buffer, sizeof(buffer), "%.17g", m);
            out << '\t' << buffer;
        }
        for (double v : embeddings[i].var) {
            std::snprintf(buffer, sizeof(buffer), "%.17g", v);
            out << '\t' << buffer;
        }
        out << '\n';
    }
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

namespace {

struct GraphFlags {
    std::string graph_path;
    std::string attrs_path;
    std::string labels_path;
    bool one_hot = false;
    bool directed = false;
};

void add_graph_flags(CLI::App* cmd, GraphFlags& flags, bool require_features) {
    cmd->add_option("--graph", flags.graph_path, "edge list file")->required();
    auto* attrs = cmd->add_option("--attrs", flags.attrs_path, "attribute triplet file");
    auto* one_hot = cmd->add_flag("--one-hot", flags.one_hot, "use X = I instead of attributes");
    attrs->excludes(one_hot);
    one_hot->excludes(attrs);
    (void)require_features;
    auto* directed = cmd->add_flag("--directed", flags.directed, "treat edges as directed");
    cmd->add_flag("--undirected{false}", flags.directed, "treat edges as undirected (default)")
        ->excludes(directed);
    cmd->add_option("--labels", flags.labels_path, "label file");
}

AttributedGraph load_graph_from_flags(const GraphFlags& flags, bool require_features) {
    AttributedGraph graph = load_edge_list(flags.graph_path, flags.directed);
    if (!flags.attrs_path.empty()) {
        load_attributes(flags.attrs_path, graph);
    } else if (flags.one_hot) {
        use_one_hot_attributes(graph);
    } else if (require_features) {
        throw CLI::ValidationError("--attrs or --one-hot is required");
    }
    if (!flags.labels_path.empty()) load_labels(flags.labels_path, graph);
    return graph;
}

struct TrainFlags {
    GraphFlags graph;
    int dim = 128;
    int k = 2;
    std::string hidden_csv = "512";
    int epochs = 2000;
    double lr = 1e-3;
    double val_frac = 0.05;
    double test_frac = 0.10;
    bool edge_cover = false;
    std::string sampler = "node_anchored";
    std::uint64_t seed = 1;
    std::string out;
    int overfit_epochs = 0;
    int eval_every = 5;
    int patience = 10;
    int anchor_batch = 0;
    bool hops_undirected = false;
    bool quiet = false;
};

std::vector<int> parse_hidden_csv(const std::string& csv) {
    std::vector<int> sizes;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        sizes.push_back(std::stoi(item));
    }
    if (sizes.empty()) throw CLI::ValidationError("--hidden needs at least one layer size");
    return sizes;
}

SamplerKind parse_sampler(const std::string& name) {
    if (name == "node_anchored") return SamplerKind::node_anchored;
    if (name == "naive") return SamplerKind::naive;
    if (name == "full") return SamplerKind::full;
    throw CLI::ValidationError("unknown sampler '" + name + "'");
}

TrainConfig config_from_flags(const TrainFlags& flags) {
    if (flags.dim % 2 != 0 || flags.dim < 2) {
        throw CLI::ValidationError("--dim must be a positive even number (L_half = L/2)");
    }
    TrainConfig config;
    config.max_hop = flags.k;
    config.half_dim = flags.dim / 2;
    config.hidden_sizes = parse_hidden_csv(flags.hidden_csv);
    config.learning_rate = flags.lr;
    config.max_epochs = flags.epochs;
    config.sampler = parse_sampler(flags.sampler);
    config.seed = flags.seed;
    config.overfit_epochs = flags.overfit_epochs;
    config.eval_every = flags.val_frac > 0 ? flags.eval_every : 0;
    config.patience = flags.patience;
    config.anchor_batch = flags.anchor_batch;
    config.hops_undirected = flags.hops_undirected;
    config.verbose = !flags.quiet;
    return config;
}

int cmd_train(const TrainFlags& flags) {
    AttributedGraph graph = load_graph_from_flags(flags.graph, true);
    DataSplit split = split_edges(graph, flags.val_frac, flags.test_frac, flags.edge_cover,
                                  derive_seed(flags.seed, "split"));
    TrainConfig config = config_from_flags(flags);

    TrainResult result = train(graph, split, config);

    nlohmann::json meta{{"k", flags.k},
                        {"dim", flags.dim},
                        {"directed", flags.graph.directed},
                        {"seed", flags.seed},
                        {"sampler", flags.sampler},
                        {"graph", flags.graph.graph_path},
                        {"one_hot", flags.graph.one_hot}};
    save_model(result.params, flags.out, meta);
    save_trace(result.trace, flags.out + ".trace.json");
    save_split_manifest(split, flags.out + ".split.json", meta);

    nlohmann::json summary{{"checkpoint", flags.out},
                           {"epochs_run", result.trace.epochs_run},
                           {"best_epoch", result.trace.best_epoch},
                           {"best_val_auc", result.trace.best_val_auc}};
    std::cout << summary.dump(2) << '\n';
    return 0;
}

int cmd_embed(const std::string& model_path, const std::string& attrs_path,
              const std::string& out_path) {
    EncoderParameters params = load_model(model_path);
    AttributeMatrix attrs = load_attribute_file(attrs_path);
    if (attrs.cols() != params.input_dim) {
        throw DataError("attribute file has D=" + std::to_string(attrs.cols()) +
                        " but the checkpoint expects D=" + std::to_string(params.input_dim));
    }
    write_embedding_tsv(forward_batch(params, attrs), out_path);
    return 0;
}

// Flattens a report's array-of-objects tables into one CSV per table,
// written as PREFIX.<table>.csv.
void write_tables_csv(const nlohmann::json& tables, const std::string& prefix) {
    for (const auto& [name, table] : tables.items()) {
        if (!table.is_array() || table.empty() || !table.front().is_object()) continue;
        std::ofstream out(prefix + "." + name + ".csv");
        if (!out) throw DataError("cannot write CSV table: " + prefix + "." + name + ".csv");
        std::vector<std::string> columns;
        for (const auto& [key, value] : table.front().items()) columns.push_back(key);
        for (std::size_t c = 0; c < columns.size(); ++c) {
            out << columns[c] << (c + 1 < columns.size() ? ',' : '\n');
        }
        for (const auto& row : table) {
            for (std::size_t c = 0; c < columns.size(); ++c) {
                out << row.value(columns[c], nlohmann::json()).dump()
                    << (c + 1 < columns.size() ? ',' : '\n');
            }
        }
    }
}

struct EvalFlags {
    GraphFlags graph;
    std::string model_path;
    std::string split_path;
    std::string trace_path;
    std::string protocol;
    std::string out;
    std::string csv_prefix;
    std::string which = "test";
    double hidden_frac = 0.10;
    std::string fractions_csv = "0.1,0.3,0.5";
    int trials = 10;
    std::uint64_t seed = 1;
    int dim = 128;
    int k = 2;
    int epochs = 2000;
    int window = 200;
    double slope_threshold = 1e-3;
    bool logvar_features = false;
    bool quiet = false;
};

int cmd_eval(const EvalFlags& flags) {
    nlohmann::json output;
    if (flags.protocol == "link") {
        AttributedGraph graph = load_graph_from_flags(flags.graph, true);
        EncoderParameters params = load_model(flags.model_path);
        DataSplit split = load_split_manifest(flags.split_path);
        auto which = flags.which == "val" ? SplitPart::val : SplitPart::test;
        output = eval_link_prediction(params, graph, split, which).to_json();
    } else if (flags.protocol == "classify") {
        AttributedGraph graph = load_graph_from_flags(flags.graph, true);
        if (!graph.has_labels()) throw DataError("classification requires --labels");
        EncoderParameters params = load_model(flags.model_path);
        std::vector<double> fractions;
        std::stringstream ss(flags.fractions_csv);
        std::string item;
        while (std::getline(ss, item, ',')) {
            if (!item.empty()) fractions.push_back(std::stod(item));
        }
        output = eval_classification(params, graph, fractions, flags.trials, flags.seed,
                                     flags.logvar_features)
                     .to_json();
    } else if (flags.protocol == "inductive") {
        AttributedGraph graph = load_graph_from_flags(flags.graph, true);
        if (flags.dim % 2 != 0) throw CLI::ValidationError("--dim must be even");
        TrainConfig config;
        config.max_hop = flags.k;
        config.half_dim = flags.dim / 2;
        config.max_epochs = flags.epochs;
        config.seed = flags.seed;
        config.verbose = !flags.quiet;
        output = eval_inductive(graph, flags.hidden_frac, config).to_json();
    } else if (flags.protocol == "uncertainty") {
        AttributedGraph graph = load_graph_from_flags(flags.graph, true);
        if (!graph.has_labels()) throw DataError("the uncertainty protocol requires --labels");
        EncoderParameters params = load_model(flags.model_path);
        TrainingTrace trace = load_trace(flags.trace_path);

        LatentDimensionReport latent =
            detect_latent_dimensions(trace, flags.window, flags.slope_threshold);
        std::vector<GaussianEmbedding> embeddings = forward_batch(params, graph.attributes);
        EvaluationReport diversity =
            diversity_variance_report(embeddings, neighborhood_diversity(graph, 3));

        output["protocol"] = "uncertainty";
        output["diversity"] = diversity.to_json();
        output["latent_dimensions"] = {{"kept", latent.kept},
                                       {"flagged", latent.flagged},
                                       {"normalized_slopes", latent.normalized_slopes}};
        if (!flags.split_path.empty()) {
            DataSplit split = load_split_manifest(flags.split_path);
            output["pruning"] = pruning_curve(params, graph, split).to_json();
        }
    } else {
        throw CLI::ValidationError("unknown protocol '" + flags.protocol + "'");
    }

    if (flags.out.empty()) {
        std::cout << output.dump(2) << '\n';
    } else {
        write_json_file(output, flags.out);
    }
    if (!flags.csv_prefix.empty()) {
        if (output.contains("tables")) write_tables_csv(output["tables"], flags.csv_prefix);
        for (const auto& [key, section] : output.items()) {
            if (section.is_object() && section.contains("tables")) {
                write_tables_csv(section["tables"], flags.csv_prefix + "." + key);
            }
        }
    }
    return 0;
}

int cmd_synth(const SbmParams& params, const std::string& out_prefix) {
    AttributedGraph graph = generate_sbm(params);
    save_edge_list(graph, out_prefix + ".edges.tsv");
    save_attribute_file(graph, out_prefix + ".attrs.tsv");
    save_label_file(graph, out_prefix + ".labels.tsv");
    nlohmann::json summary{{"nodes", graph.num_nodes},
                           {"edges", graph.num_edges()},
                           {"blocks", params.num_blocks},
                           {"prefix", out_prefix}};
    std::cout << summary.dump(2) << '\n';
    return 0;
}

} // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"Gaussian graph embeddings via personalized ranking"};
    app.require_subcommand(1);

    TrainFlags train_flags;
    auto* train_cmd =
        app.add_subcommand("train", "train an encoder, write checkpoint + trace + split manifest");
    add_graph_flags(train_cmd, train_flags.graph, true);
    train_cmd->add_option("--dim", train_flags.dim, "parameter budget L (L_half = L/2)");
    train_cmd->add_option("--k", train_flags.k, "max hop K");
    train_cmd->add_option("--hidden", train_flags.hidden_csv, "hidden layer sizes, comma separated");
    train_cmd->add_option("--epochs", train_flags.epochs, "max training epochs");
    train_cmd->add_option("--lr", train_flags.lr, "Adam learning rate");
    train_cmd->add_option("--val-frac", train_flags.val_frac, "validation edge fraction");
    train_cmd->add_option("--test-frac", train_flags.test_frac, "test edge fraction");
    train_cmd->add_option("--edge-cover", train_flags.edge_cover,
                          "pin a greedy edge cover into the train split");
    train_cmd->add_option("--sampler", train_flags.sampler, "node_anchored|naive|full");
    train_cmd->add_option("--seed", train_flags.seed, "master seed");
    train_cmd->add_option("--out", train_flags.out, "checkpoint output path")->required();
    train_cmd->add_option("--overfit-epochs", train_flags.overfit_epochs,
                          "record past early stop for latent-dimension analysis");
    train_cmd->add_option("--eval-every", train_flags.eval_every, "epochs between validation checks");
    train_cmd->add_option("--patience", train_flags.patience, "validation checks without improvement");
    train_cmd->add_option("--anchor-batch", train_flags.anchor_batch, "anchors per step (0 = auto)");
    train_cmd->add_flag("--hops-undirected", train_flags.hops_undirected,
                        "compute hop sets on the symmetrized graph");
    train_cmd->add_flag("--quiet", train_flags.quiet, "suppress per-epoch progress lines");

    std::string embed_model, embed_attrs, embed_out;
    auto* embed_cmd = app.add_subcommand("embed", "embed attribute rows through a trained encoder");
    embed_cmd->add_option("--model", embed_model, "checkpoint path")->required();
    embed_cmd->add_option("--attrs", embed_attrs, "attribute triplet file")->required();
    embed_cmd->add_option("--out", embed_out, "output TSV path")->required();

    EvalFlags eval_flags;
    auto* eval_cmd = app.add_subcommand("eval", "run an evaluation protocol");
    add_graph_flags(eval_cmd, eval_flags.graph, false);
    eval_cmd->add_option("--protocol", eval_flags.protocol, "link|classify|inductive|uncertainty")
        ->required();
    eval_cmd->add_option("--model", eval_flags.model_path, "checkpoint path");
    eval_cmd->add_option("--split-manifest", eval_flags.split_path, "split manifest JSON");
    eval_cmd->add_option("--trace", eval_flags.trace_path, "training trace JSON");
    eval_cmd->add_option("--out", eval_flags.out, "report output path (default stdout)");
    eval_cmd->add_option("--csv", eval_flags.csv_prefix, "also write report tables as PREFIX.*.csv");
    eval_cmd->add_option("--which", eval_flags.which, "val|test (link protocol)");
    eval_cmd->add_option("--hidden-frac", eval_flags.hidden_frac, "hidden node fraction (inductive)");
    eval_cmd->add_option("--fractions", eval_flags.fractions_csv, "train fractions CSV (classify)");
    eval_cmd->add_option("--trials", eval_flags.trials, "trials per fraction (classify)");
    eval_cmd->add_option("--seed", eval_flags.seed, "seed");
    eval_cmd->add_option("--dim", eval_flags.dim, "embedding budget L (inductive)");
    eval_cmd->add_option("--k", eval_flags.k, "max hop K (inductive)");
    eval_cmd->add_option("--epochs", eval_flags.epochs, "max epochs (inductive)");
    eval_cmd->add_option("--window", eval_flags.window, "slope window (uncertainty)");
    eval_cmd->add_option("--slope-threshold", eval_flags.slope_threshold,
                         "divergence threshold (uncertainty)");
    eval_cmd->add_flag("--logvar-features", eval_flags.logvar_features,
                       "append log variances to classification features");
    eval_cmd->add_flag("--quiet", eval_flags.quiet, "suppress progress output");

    SbmParams sbm;
    std::string synth_prefix;
    auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic attributed SBM dataset");
    synth_cmd->add_option("--n", sbm.num_nodes, "number of nodes")->required();
    synth_cmd->add_option("--blocks", sbm.num_blocks, "number of blocks")->required();
    synth_cmd->add_option("--p-in", sbm.p_in, "intra-block edge probability")->required();
    synth_cmd->add_option("--p-out", sbm.p_out, "inter-block edge probability")->required();
    synth_cmd->add_option("--attr-dim", sbm.attr_dim, "attribute dimension")->required();
    synth_cmd->add_option("--attr-noise", sbm.attr_noise, "attribute noise std-dev");
    synth_cmd->add_option("--seed", sbm.seed, "seed");
    synth_cmd->add_option("--out-prefix", synth_prefix, "output file prefix")->required();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
        if (*train_cmd) return cmd_train(train_flags);
        if (*embed_cmd) return cmd_embed(embed_model, embed_attrs, embed_out);
        if (*eval_cmd) return cmd_eval(eval_flags);
        if (*synth_cmd) return cmd_synth(sbm, synth_prefix);
        return 1;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const std::domain_error& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}

} // namespace g2g
