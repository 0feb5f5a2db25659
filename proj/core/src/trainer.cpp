#include "edgeprop/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "edgeprop/errors.hpp"
#include "edgeprop/loss.hpp"
#include "edgeprop/rng.hpp"

namespace edgeprop {

BatchLoss minibatch_loss(const Matrix& batch_logits, const std::vector<std::int32_t>& labels) {
    if (batch_logits.rows() != labels.size())
        throw ShapeError("minibatch_loss: one logit row per label required");
    const double inv_n = 1.0 / static_cast<double>(labels.size());
    BatchLoss out{0.0, Matrix(batch_logits.rows(), batch_logits.cols())};
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= batch_logits.cols())
            throw DataError("minibatch_loss: label out of range at row " + std::to_string(i));
        auto row = softmax_cross_entropy(batch_logits.row_span(i),
                                         static_cast<std::size_t>(labels[i]));
        out.loss += row.loss * inv_n;
        for (std::size_t c = 0; c < row.dlogits.size(); ++c)
            out.dlogits(i, c) = row.dlogits[c] * inv_n;
    }
    return out;
}

MetricsReport evaluate(const ModelParams& params, const Graph& graph, const ModelConfig& cfg,
                       const std::vector<NodeId>& node_set) {
    if (node_set.empty()) throw DataError("evaluate: empty node set");
    const std::size_t c = cfg.num_classes;
    std::vector<std::vector<std::uint64_t>> confusion(c, std::vector<std::uint64_t>(c, 0));
    SamplerConfig full{.batch_size = 0, .sample_size = 0, .mode = SampleMode::Full};

    constexpr std::size_t kChunk = 512;
    for (std::size_t i = 0; i < node_set.size(); i += kChunk) {
        std::vector<NodeId> chunk(node_set.begin() + i,
                                  node_set.begin() + std::min(i + kChunk, node_set.size()));
        auto frontier = build_frontiers(graph, chunk, cfg.layers, full);
        auto fwd = forward_exact(graph, frontier, params, cfg);
        const auto& nodes = frontier.layers[cfg.layers];
        for (std::size_t r = 0; r < nodes.size(); ++r) {
            const std::int32_t label = graph.nodes().labels[nodes[r]];
            if (label == kUnlabeled) throw DataError("evaluate: unlabeled node in node set");
            std::size_t pred = 0;
            for (std::size_t j = 1; j < c; ++j)
                if (fwd.logits(r, j) > fwd.logits(r, pred)) pred = j;
            ++confusion[static_cast<std::size_t>(label)][pred];
        }
    }
    return metrics_from_confusion(confusion);
}

TrainResult train(const Graph& graph, const DatasetSplit& split, const TrainConfig& cfg,
                  const CheckpointRecord* resume, const std::function<void(const LogRow&)>& on_log) {
    if (split.train.empty()) throw DataError("train: empty train split");
    const auto start_time = std::chrono::steady_clock::now();

    ModelConfig mcfg = cfg.model;
    mcfg.num_classes = graph.nodes().num_classes;
    const std::size_t feat_dim = graph.nodes().feature_dim();
    const std::size_t edge_dim = graph.edges().feature_dim();

    TrainResult res;
    CheckpointRecord& st = res.final_state;
    if (resume) {
        st = *resume;
        st.cfg = cfg;
    } else {
        st.cfg = cfg;
        st.params = init_params(mcfg, feat_dim, edge_dim, cfg.seed);
        st.best_params = st.params;
        st.adam = AdamState(st.params.total_size());
        st.epoch = 0;
        st.best_val_acc = -1.0;
        st.evals_since_improve = 0;
        if (mcfg.cv_enabled)
            st.history.reset(mcfg.layers, graph.num_edges(), graph.num_nodes(), mcfg.embed_dim);
    }
    st.node_feature_dim = feat_dim;
    st.edge_feature_dim = edge_dim;
    st.num_nodes = graph.num_nodes();
    st.num_edges = graph.num_edges();

    SamplerConfig scfg{.batch_size = cfg.batch_size,
                       .sample_size = cfg.sample_size,
                       .mode = cfg.sample_mode,
                       .seed = cfg.seed};

    std::vector<double> flat_p = st.params.to_flat();

    for (std::uint64_t epoch = st.epoch + 1; epoch <= cfg.max_epochs; ++epoch) {
        double epoch_loss = 0.0;
        std::size_t seen = 0;
        auto batches = batch_iterator(split.train, scfg, epoch);
        for (std::size_t bi = 0; bi < batches.size(); ++bi) {
            auto frontier =
                build_frontiers(graph, batches[bi], mcfg.layers, scfg, epoch, bi);
            ForwardResult fwd;
            if (mcfg.layers == 0 || cfg.sample_mode == SampleMode::Full)
                fwd = forward_exact(graph, frontier, st.params, mcfg);
            else if (mcfg.cv_enabled)
                fwd = forward_cv(graph, frontier, st.params, mcfg, st.history);
            else
                fwd = forward_plain(graph, frontier, st.params, mcfg);

            const auto& nodes = frontier.layers[mcfg.layers];
            std::vector<std::int32_t> labels(nodes.size());
            for (std::size_t i = 0; i < nodes.size(); ++i)
                labels[i] = graph.nodes().labels[nodes[i]];

            auto bl = minibatch_loss(fwd.logits, labels);
            if (!std::isfinite(bl.loss))
                throw NumericError("train: non-finite loss at epoch " + std::to_string(epoch) +
                                   " batch " + std::to_string(bi));
            epoch_loss += bl.loss * static_cast<double>(nodes.size());
            seen += nodes.size();

            auto grads = backward(graph, frontier, st.params, mcfg, fwd, bl.dlogits);
            auto flat_g = grads.to_flat();
            adam_step(flat_p, flat_g, st.adam, cfg.lr);
            st.params.from_flat(flat_p);
        }
        st.epoch = epoch;

        if (epoch % cfg.eval_every != 0) continue;
        const double val_acc =
            evaluate(st.params, graph, mcfg, split.validation).accuracy;
        if (val_acc > st.best_val_acc) {
            st.best_val_acc = val_acc;
            st.best_params = st.params;
            st.evals_since_improve = 0;
            res.best_epoch = epoch;
        } else {
            ++st.evals_since_improve;
        }
        const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                                 std::chrono::steady_clock::now() - start_time)
                                 .count();
        LogRow row{epoch, epoch_loss / static_cast<double>(seen), val_acc,
                   static_cast<std::uint64_t>(elapsed)};
        res.log.push_back(row);
        if (on_log) on_log(row);
        if (st.evals_since_improve >= cfg.patience) break;
    }

    res.best_params = st.best_params;
    res.best_val_acc = st.best_val_acc;
    return res;
}

std::vector<VarianceRow> estimator_variance_report(const Graph& graph, const ModelParams& params,
                                                   const ModelConfig& cfg,
                                                   std::size_t sample_size, std::size_t trials,
                                                   std::uint64_t seed,
                                                   const HistoryCache* external_history) {
    if (cfg.layers < 1) throw ShapeError("estimator_variance_report: needs at least one layer");
    HistoryCache warmed;
    if (!external_history) warm_history(graph, params, cfg, warmed);
    const HistoryCache& history = external_history ? *external_history : warmed;

    std::vector<NodeId> all(graph.num_nodes());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<NodeId>(i);
    Matrix z0 = input_features(graph, cfg, all);

    std::vector<VarianceRow> rows;
    for (NodeId v = 0; v < graph.num_nodes(); ++v) {
        const auto in = graph.in_neighbors(v);
        if (in.empty()) continue;
        Vector exact = aggregate_for_node(graph, params, cfg, v, in, z0, nullptr);

        double plain_mse = 0.0, cv_mse = 0.0;
        std::vector<std::pair<NodeId, EdgeId>> subset(in.begin(), in.end());
        auto rng = keyed_rng(seed, std::uint64_t{0x7A1}, static_cast<std::uint64_t>(v));
        const std::size_t s = std::min(sample_size, in.size());
        for (std::size_t t = 0; t < trials; ++t) {
            for (std::size_t j = 0; j < s; ++j) {
                std::uniform_int_distribution<std::size_t> pick(j, subset.size() - 1);
                std::swap(subset[j], subset[pick(rng)]);
            }
            std::span<const std::pair<NodeId, EdgeId>> sampled(subset.data(), s);
            Vector plain = aggregate_for_node(graph, params, cfg, v, sampled, z0, nullptr);
            Vector cv = aggregate_for_node(graph, params, cfg, v, sampled, z0, &history);
            for (std::size_t j = 0; j < exact.size(); ++j) {
                plain_mse += (plain[j] - exact[j]) * (plain[j] - exact[j]);
                cv_mse += (cv[j] - exact[j]) * (cv[j] - exact[j]);
            }
        }
        const double denom = static_cast<double>(trials);
        rows.push_back({v, in.size(), plain_mse / denom, cv_mse / denom});
    }
    return rows;
}

}  // namespace edgeprop
