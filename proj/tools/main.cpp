// edgeprop command-line toolchain: data generation, training, evaluation,
// gradient checking, and estimator-variance diagnostics.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "edgeprop/errors.hpp"
#include "edgeprop/gradcheck.hpp"
#include "edgeprop/graph_io.hpp"
#include "edgeprop/loss.hpp"
#include "edgeprop/pipeline.hpp"
#include "edgeprop/runconfig.hpp"
#include "edgeprop/synth.hpp"
#include "edgeprop/trainer.hpp"

namespace fs = std::filesystem;
using namespace edgeprop;

namespace {

// exit codes: 0 ok, 1 check failed, 2 config, 3 data, 4 numeric, 5 shape/version
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;
constexpr int kExitShape = 5;

struct GlobalOpts {
    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    bool json = false;
};

RunConfig load_config(const GlobalOpts& g, const std::string& seed_key) {
    std::map<std::string, std::string> overrides;
    if (g.seed) overrides[seed_key] = std::to_string(*g.seed);
    if (!g.out_dir.empty()) overrides["out_dir"] = g.out_dir;
    if (g.config_path.empty()) {
        std::map<std::string, std::string> kv = overrides;
        return RunConfig::parse(kv);
    }
    return RunConfig::load(g.config_path, overrides);
}

PreparedData load_and_prepare(const RunConfig& cfg) {
    const fs::path dir(cfg.data_dir);
    NodeTable nodes = load_nodes_csv((dir / "nodes.csv").string());
    if (fs::exists(dir / "transactions.csv")) {
        auto records = load_transactions_csv((dir / "transactions.csv").string());
        return prepare(std::move(nodes), records, cfg.ingest, cfg.train.split_seed);
    }
    if (fs::exists(dir / "edges.csv")) {
        auto edges = load_edges_csv((dir / "edges.csv").string());
        return prepare_from_edges(std::move(nodes), std::move(edges), cfg.ingest,
                                  cfg.train.split_seed);
    }
    throw DataError("no transactions.csv or edges.csv in " + cfg.data_dir);
}

void print_metrics(const MetricsReport& m, bool json, std::ostream& os) {
    if (json) {
        nlohmann::json j;
        j["accuracy"] = m.accuracy;
        j["macro_precision"] = m.macro_precision;
        j["macro_recall"] = m.macro_recall;
        j["macro_f1"] = m.macro_f1;
        j["precision"] = m.precision;
        j["recall"] = m.recall;
        j["f1"] = m.f1;
        j["support"] = m.support;
        j["confusion"] = m.confusion;
        os << j.dump(2) << "\n";
        return;
    }
    os << "accuracy        " << m.accuracy << "\n"
       << "macro_precision " << m.macro_precision << "\n"
       << "macro_recall    " << m.macro_recall << "\n"
       << "macro_f1        " << m.macro_f1 << "\n";
}

void write_metrics_csv(const std::string& path, const MetricsReport& m) {
    std::ofstream f(path);
    if (!f) throw DataError("cannot open " + path + " for writing");
    f.precision(17);
    f << "metric,value\n"
      << "accuracy," << m.accuracy << "\n"
      << "macro_precision," << m.macro_precision << "\n"
      << "macro_recall," << m.macro_recall << "\n"
      << "macro_f1," << m.macro_f1 << "\n";
    for (std::size_t c = 0; c < m.precision.size(); ++c)
        f << "precision_" << c << "," << m.precision[c] << "\n"
          << "recall_" << c << "," << m.recall[c] << "\n"
          << "f1_" << c << "," << m.f1[c] << "\n";
}

int cmd_gen_data(const GlobalOpts& g) {
    RunConfig cfg = load_config(g, "data_seed");
    const fs::path out(cfg.out_dir);
    fs::create_directories(out);
    SynthData data = generate(cfg.synth);

    save_nodes_csv((out / "nodes.csv").string(), data.nodes);
    save_transactions_csv((out / "transactions.csv").string(), data.records);
    {
        std::ofstream f(out / "labels_full.csv");
        f << "id,label\n";
        for (std::size_t i = 0; i < data.nodes.count; ++i)
            f << i << "," << data.nodes.labels[i] << "\n";
    }
    {
        std::ofstream f(out / "manifest.txt");
        char hash[32];
        std::snprintf(hash, sizeof hash, "%016llx",
                      static_cast<unsigned long long>(cfg.config_hash()));
        f << "config_hash=" << hash << "\n" << cfg.canonical_text();
    }
    std::cout << "wrote " << data.nodes.count << " nodes, " << data.records.size()
              << " transactions to " << out.string() << "\n";
    return 0;
}

int cmd_train(const GlobalOpts& g) {
    RunConfig cfg = load_config(g, "train_seed");
    PreparedData data = load_and_prepare(cfg);
    cfg.train.model.num_classes = data.graph.nodes().num_classes;

    const fs::path out(cfg.out_dir);
    fs::create_directories(out);
    std::ofstream log(out / "train_log.csv");
    if (!log) throw DataError("cannot open train_log.csv for writing");
    log << "epoch,train_loss,val_accuracy,elapsed_ms\n";
    log.precision(17);

    auto result = train(data.graph, data.split, cfg.train, nullptr, [&log](const LogRow& r) {
        log << r.epoch << "," << r.train_loss << "," << r.val_accuracy << "," << r.elapsed_ms
            << "\n";
        log.flush();
    });

    result.final_state.config_text = cfg.canonical_text();
    save_checkpoint((out / "checkpoint.bin").string(), result.final_state);

    auto metrics = evaluate(result.best_params, data.graph, cfg.train.model, data.split.validation);
    write_metrics_csv((out / "metrics_val.csv").string(), metrics);
    std::cout << "best_val_accuracy " << result.best_val_acc << " at epoch " << result.best_epoch
              << " (" << result.final_state.epoch << " epochs run)\n";
    print_metrics(metrics, g.json, std::cout);
    return 0;
}

int cmd_eval(const GlobalOpts& g, const std::string& checkpoint_path, const std::string& split_sel,
             const std::string& data_dir_override) {
    CheckpointRecord ckpt = load_checkpoint(checkpoint_path);
    std::istringstream cfg_text(ckpt.config_text);
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(cfg_text, line)) {
        auto eq = line.find('=');
        if (eq != std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    if (!data_dir_override.empty()) kv["data_dir"] = data_dir_override;
    if (!g.out_dir.empty()) kv["out_dir"] = g.out_dir;
    RunConfig cfg = RunConfig::parse(kv);
    PreparedData data = load_and_prepare(cfg);

    if (data.graph.nodes().feature_dim() != ckpt.node_feature_dim ||
        data.graph.edges().feature_dim() != ckpt.edge_feature_dim)
        throw ShapeError("checkpoint/data feature dimensions disagree: checkpoint F=" +
                         std::to_string(ckpt.node_feature_dim) +
                         " P=" + std::to_string(ckpt.edge_feature_dim) + ", data F=" +
                         std::to_string(data.graph.nodes().feature_dim()) +
                         " P=" + std::to_string(data.graph.edges().feature_dim()));

    const std::vector<NodeId>* nodes = nullptr;
    if (split_sel == "train")
        nodes = &data.split.train;
    else if (split_sel == "val" || split_sel == "validation")
        nodes = &data.split.validation;
    else if (split_sel == "test")
        nodes = &data.split.test;
    else
        throw ConfigError("unknown split selector '" + split_sel + "'");

    ModelConfig mcfg = ckpt.cfg.model;
    auto metrics = evaluate(ckpt.best_params, data.graph, mcfg, *nodes);
    print_metrics(metrics, g.json, std::cout);
    const fs::path out(cfg.out_dir);
    fs::create_directories(out);
    write_metrics_csv((out / ("metrics_" + split_sel + ".csv")).string(), metrics);
    return 0;
}

int cmd_gradcheck(const GlobalOpts& g, bool perturb) {
    RunConfig cfg = load_config(g, "train_seed");
    SynthConfig synth_cfg = cfg.synth;
    synth_cfg.num_nodes = 20;
    SynthData data = generate(synth_cfg);
    EdgeTable edges = collapse_multiedges(data.records, data.nodes.count, 1, 0.0);
    auto zscore = [](Matrix& m) {
        for (std::size_t c = 0; c < m.cols(); ++c) {
            double s = 0.0, s2 = 0.0;
            for (std::size_t r = 0; r < m.rows(); ++r) {
                s += m(r, c);
                s2 += m(r, c) * m(r, c);
            }
            const double mean = s / static_cast<double>(m.rows());
            const double sd = std::sqrt(std::max(0.0, s2 / static_cast<double>(m.rows()) -
                                                           mean * mean));
            const double inv = sd > 1e-12 ? 1.0 / sd : 1.0;
            for (std::size_t r = 0; r < m.rows(); ++r) m(r, c) = (m(r, c) - mean) * inv;
        }
    };
    zscore(data.nodes.features);
    zscore(edges.features);
    if (cfg.ingest.augment) edges = augment_edges(edges);
    const Graph graph = build_graph(std::move(data.nodes), std::move(edges));

    double worst = 0.0;
    for (Aggregator agg : {Aggregator::Mean, Aggregator::Sum}) {
        ModelConfig mcfg = cfg.train.model;
        mcfg.aggregator = agg;
        mcfg.num_classes = graph.nodes().num_classes;
        mcfg.cv_enabled = false;
        if (mcfg.layers == 0 || mcfg.layers > 2) mcfg.layers = 1;

        auto labeled = graph.nodes().labeled_ids();
        SamplerConfig full{.batch_size = labeled.size(), .sample_size = 0,
                           .mode = SampleMode::Full};
        auto frontier = build_frontiers(graph, labeled, mcfg.layers, full);
        const auto& batch_nodes = frontier.layers[mcfg.layers];
        std::vector<std::int32_t> labels(batch_nodes.size());
        for (std::size_t i = 0; i < batch_nodes.size(); ++i)
            labels[i] = graph.nodes().labels[batch_nodes[i]];

        // Finite differences near a relu kink measure a one-sided slope, not
        // the gradient; re-seed until every pre-activation clears the probe
        // scale by a wide margin.
        ModelParams params = init_params(mcfg, graph.nodes().feature_dim(),
                                         graph.edges().feature_dim(), cfg.train.seed);
        for (std::uint64_t t = 1; t < 64; ++t) {
            if (min_relu_gap(forward_exact(graph, frontier, params, mcfg), mcfg) >= 1e-3)
                break;
            params = init_params(mcfg, graph.nodes().feature_dim(),
                                 graph.edges().feature_dim(), cfg.train.seed + t);
        }

        ModelParams probe = params;
        auto f = [&](const std::vector<double>& flat) {
            probe.from_flat(flat);
            auto fwd = forward_exact(graph, frontier, probe, mcfg);
            return minibatch_loss(fwd.logits, labels).loss;
        };
        auto fwd = forward_exact(graph, frontier, params, mcfg);
        auto bl = minibatch_loss(fwd.logits, labels);
        auto grads = backward(graph, frontier, params, mcfg, fwd, bl.dlogits).to_flat();
        if (perturb) grads[grads.size() / 2] += 1e-2;
        const double err = grad_check(f, grads, params.to_flat(), 1e-5);
        std::cout << (agg == Aggregator::Mean ? "mean" : "sum ")
                  << " aggregator: max relative error " << err << "\n";
        worst = std::max(worst, err);
    }
    std::cout << (worst < 1e-4 ? "PASS" : "FAIL") << " (threshold 1e-4)\n";
    return worst < 1e-4 ? 0 : 1;
}

int cmd_variance(const GlobalOpts& g, std::size_t trials) {
    RunConfig cfg = load_config(g, "train_seed");
    PreparedData data = [&] {
        if (!cfg.data_dir.empty() && fs::exists(fs::path(cfg.data_dir) / "nodes.csv"))
            return load_and_prepare(cfg);
        SynthData sd = generate(cfg.synth);
        return prepare(std::move(sd.nodes), sd.records, cfg.ingest, cfg.train.split_seed);
    }();
    ModelConfig mcfg = cfg.train.model;
    mcfg.num_classes = data.graph.nodes().num_classes;
    if (mcfg.layers == 0) mcfg.layers = 1;
    ModelParams params = init_params(mcfg, data.graph.nodes().feature_dim(),
                                     data.graph.edges().feature_dim(), cfg.train.seed);

    auto rows = estimator_variance_report(data.graph, params, mcfg, cfg.train.sample_size,
                                          trials, cfg.train.seed);
    std::cout << "node,deg,plain_mse,cv_mse\n";
    std::cout.precision(12);
    std::size_t cv_wins = 0, probed = 0;
    for (const auto& r : rows) {
        std::cout << r.node << "," << r.degree << "," << r.plain_mse << "," << r.cv_mse << "\n";
        if (r.degree > cfg.train.sample_size) {
            ++probed;
            if (r.cv_mse <= r.plain_mse) ++cv_wins;
        }
    }
    std::cerr << "probed " << probed << " nodes with degree > " << cfg.train.sample_size
              << ", cv_mse <= plain_mse on " << cv_wins << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"EdgeProp graph neural network toolchain"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalOpts g;
    app.add_option("--config", g.config_path, "run configuration file (key=value lines)");
    app.add_option("--seed", g.seed, "seed override");
    app.add_option("--out", g.out_dir, "output directory override");
    app.add_flag("--json", g.json, "machine-readable metric output");

    auto* gen = app.add_subcommand("gen-data", "generate a synthetic transaction corpus");
    auto* tr = app.add_subcommand("train", "ingest data and train a model");
    auto* ev = app.add_subcommand("eval", "evaluate a checkpoint on a data split");
    std::string ckpt_path, split_sel = "test", data_dir_override;
    ev->add_option("--checkpoint", ckpt_path, "checkpoint file")->required();
    ev->add_option("--split", split_sel, "train|val|test");
    ev->add_option("--data", data_dir_override, "data directory override");
    auto* gc = app.add_subcommand("gradcheck", "finite-difference check of the composed gradient");
    bool perturb = false;
    gc->add_flag("--perturb", perturb, "negative control: corrupt the analytic gradient");
    auto* var = app.add_subcommand("variance", "plain vs control-variate estimator MSE table");
    std::size_t trials = 100;
    var->add_option("--trials", trials, "resamples per probed node");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) return cmd_gen_data(g);
        if (tr->parsed()) return cmd_train(g);
        if (ev->parsed()) return cmd_eval(g, ckpt_path, split_sel, data_dir_override);
        if (gc->parsed()) return cmd_gradcheck(g, perturb);
        if (var->parsed()) return cmd_variance(g, trials);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const ShapeError& e) {
        std::cerr << "shape error: " << e.what() << "\n";
        return kExitShape;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return kExitNumeric;
    }
    return 0;
}
