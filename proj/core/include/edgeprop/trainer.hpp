#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "edgeprop/adam.hpp"
#include "edgeprop/metrics.hpp"
#include "edgeprop/model.hpp"

namespace edgeprop {

struct TrainConfig {
    double lr = 2e-4;
    std::size_t batch_size = 32;
    std::size_t sample_size = 10;
    std::size_t patience = 100;   // consecutive evaluations without improvement
    std::size_t max_epochs = 2000;
    std::size_t eval_every = 1;   // epochs between validation evaluations
    std::uint64_t seed = 0;       // training seed (init, shuffles, sampling)
    std::uint64_t split_seed = 0;
    SampleMode sample_mode = SampleMode::Uniform;
    ModelConfig model;
};

struct LogRow {
    std::uint64_t epoch;
    double train_loss;
    double val_accuracy;
    std::uint64_t elapsed_ms;
};

struct CheckpointRecord {
    std::string config_text;  // canonical key=value run configuration
    TrainConfig cfg;
    std::size_t node_feature_dim = 0;
    std::size_t edge_feature_dim = 0;
    std::size_t num_nodes = 0;
    std::size_t num_edges = 0;
    ModelParams params;       // parameters at the checkpointed epoch
    ModelParams best_params;  // best-validation parameters so far
    AdamState adam;
    std::uint64_t epoch = 0;  // epochs completed
    double best_val_acc = -1.0;
    std::uint64_t evals_since_improve = 0;
    HistoryCache history;
};

struct TrainResult {
    ModelParams best_params;
    double best_val_acc = -1.0;
    std::uint64_t best_epoch = 0;
    std::vector<LogRow> log;
    CheckpointRecord final_state;
};

struct BatchLoss {
    double loss;
    Matrix dlogits;
};

// Mean cross-entropy over the batch; dlogits scaled by 1/|batch|.
BatchLoss minibatch_loss(const Matrix& batch_logits, const std::vector<std::int32_t>& labels);

TrainResult train(const Graph& graph, const DatasetSplit& split, const TrainConfig& cfg,
                  const CheckpointRecord* resume = nullptr,
                  const std::function<void(const LogRow&)>& on_log = nullptr);

// Full-neighborhood inference; argmax ties break to the lowest class index.
MetricsReport evaluate(const ModelParams& params, const Graph& graph, const ModelConfig& cfg,
                       const std::vector<NodeId>& node_set);

struct VarianceRow {
    NodeId node;
    std::size_t degree;
    double plain_mse;
    double cv_mse;
};

// Per-node MSE of the plain and control-variate layer-1 aggregates against
// the exact aggregate, over `trials` independent resamples at fixed params.
// Histories are warmed by one exact full pass before probing.
std::vector<VarianceRow> estimator_variance_report(const Graph& graph, const ModelParams& params,
                                                   const ModelConfig& cfg,
                                                   std::size_t sample_size, std::size_t trials,
                                                   std::uint64_t seed,
                                                   const HistoryCache* external_history = nullptr);

void save_checkpoint(const std::string& path, const CheckpointRecord& record);
CheckpointRecord load_checkpoint(const std::string& path);

}  // namespace edgeprop
