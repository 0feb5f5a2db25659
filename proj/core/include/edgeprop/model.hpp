#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "edgeprop/graph.hpp"
#include "edgeprop/mlp.hpp"
#include "edgeprop/sampler.hpp"

namespace edgeprop {

enum class Aggregator { Sum, Mean };

struct ModelConfig {
    std::size_t layers = 1;  // K; 0 = head-only logistic baseline
    std::size_t embed_dim = 32;
    Aggregator aggregator = Aggregator::Mean;
    bool use_node_features = true;
    bool use_edge_features = true;
    bool augmented = true;  // edge table is expected pre-augmented upstream
    bool cv_enabled = true;
    std::size_t num_classes = 2;

    // Without node features z^0 is the surrogate [1, log1p(in), log1p(out)].
    std::size_t input_dim(std::size_t node_feature_dim) const {
        return use_node_features ? node_feature_dim : 3;
    }
};

struct ModelParams {
    std::vector<MLPParams> phi;  // message MLP per layer
    std::vector<MLPParams> rho;  // update MLP per layer
    Matrix head_w;               // d_last x C
    Vector head_b;               // C

    std::size_t total_size() const;
    std::vector<double> to_flat() const;
    void from_flat(std::span<const double> flat);
};

ModelParams init_params(const ModelConfig& cfg, std::size_t node_feature_dim,
                        std::size_t edge_feature_dim, std::uint64_t seed);

// Per-edge message histories plus per-node running sums, one set per layer.
struct HistoryCache {
    std::size_t num_layers = 0;
    std::size_t dim = 0;
    std::vector<Matrix> edge_hist;  // |E| x d per layer
    std::vector<Matrix> node_sums;  // N x d per layer

    void reset(std::size_t layers, std::size_t num_edges, std::size_t num_nodes, std::size_t d);
    bool matches(std::size_t layers, std::size_t num_edges, std::size_t num_nodes,
                 std::size_t d) const;
};

// --- elementwise building blocks (also the unit-test surface) ---

// relu(mlp(z_u || e_uv))
Vector phi_message(std::span<const double> z_u, std::span<const double> e_uv,
                   const MLPParams& phi);

// Elementwise sum or mean; empty multiset yields the zero vector.
Vector aggregate(const std::vector<Vector>& messages, Aggregator mode, std::size_t dim);

// mlp(z_prev || agg), relu unless final_layer.
Vector node_update(std::span<const double> z_prev, std::span<const double> agg,
                   const MLPParams& rho, bool final_layer);

// --- batched forward/backward over a frontier ---

struct LayerCache {
    std::vector<NodeId> row_src;       // source node per phi row
    std::vector<std::size_t> seg_off;  // per-node segment offsets into phi rows (size+1)
    std::vector<double> coeff;         // d(aggregate)/d(phi row), per row
    Matrix phi_in;
    MLPCache phi_cache;
    Matrix phi_pre;  // phi MLP output, pre-relu
    Matrix rho_in;
    MLPCache rho_cache;
    Matrix rho_pre;  // rho MLP output, pre-activation
};

struct ForwardResult {
    std::vector<Matrix> z;  // z[k]: |B^k| x d_k, post-activation
    Matrix logits;          // |B^K| x C
    std::vector<LayerCache> cache;
    std::vector<std::unordered_map<NodeId, std::size_t>> pos;  // node -> row, per layer
};

// Exact forward over a full-mode frontier.
ForwardResult forward_exact(const Graph& graph, const Frontier& frontier,
                            const ModelParams& params, const ModelConfig& cfg);

// Plain neighbor-sampling forward (no variance reduction).
ForwardResult forward_plain(const Graph& graph, const Frontier& frontier,
                            const ModelParams& params, const ModelConfig& cfg);

// Control-variate forward: sampled deltas against stored histories plus the
// exact full-neighborhood history mean; refreshes sampled histories in place
// when update_history is set.
ForwardResult forward_cv(const Graph& graph, const Frontier& frontier, const ModelParams& params,
                         const ModelConfig& cfg, HistoryCache& history,
                         bool update_history = true);

// Exact gradients of the computed forward map; history terms are constants.
ModelParams backward(const Graph& graph, const Frontier& frontier, const ModelParams& params,
                     const ModelConfig& cfg, const ForwardResult& fwd, const Matrix& dlogits);

// Smallest |pre-activation| feeding any relu in the pass. Finite-difference
// probes are only trustworthy when this clears the perturbation scale.
double min_relu_gap(const ForwardResult& fwd, const ModelConfig& cfg);

// z^0 rows for the given nodes (features or degree surrogate).
Matrix input_features(const Graph& graph, const ModelConfig& cfg,
                      const std::vector<NodeId>& nodes);

// One exact full-graph pass that fills every layer's histories and sums.
void warm_history(const Graph& graph, const ModelParams& params, const ModelConfig& cfg,
                  HistoryCache& history);

// Layer-1 aggregate for node v over an explicit neighbor subset, given z^0
// rows for all nodes. history = nullptr gives the plain estimator.
Vector aggregate_for_node(const Graph& graph, const ModelParams& params, const ModelConfig& cfg,
                          NodeId v, std::span<const std::pair<NodeId, EdgeId>> subset,
                          const Matrix& z0_all, const HistoryCache* history);

}  // namespace edgeprop
