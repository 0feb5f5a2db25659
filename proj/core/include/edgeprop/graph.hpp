#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "edgeprop/matrix.hpp"

namespace edgeprop {

using NodeId = std::uint32_t;
using EdgeId = std::uint32_t;

constexpr std::int32_t kUnlabeled = -1;

struct TransactionRecord {
    NodeId src;
    NodeId dst;
    std::uint64_t timestamp;  // seconds since epoch
    double value;             // non-negative
};

struct NodeTable {
    std::size_t count = 0;
    Matrix features;                  // count x F
    std::vector<std::int32_t> labels; // class index or kUnlabeled
    std::size_t num_classes = 0;

    std::size_t feature_dim() const { return features.cols(); }
    std::vector<NodeId> labeled_ids() const;
};

struct EdgeTable {
    std::vector<std::pair<NodeId, NodeId>> edges;  // deduplicated ordered pairs
    Matrix features;                               // |edges| x P

    std::size_t size() const { return edges.size(); }
    std::size_t feature_dim() const { return features.cols(); }
};

// Immutable directed graph with incoming/outgoing CSR indexes.
// Neighbor lists are sorted by neighbor id.
class Graph {
public:
    Graph() = default;
    Graph(NodeTable nodes, EdgeTable edges);

    const NodeTable& nodes() const { return nodes_; }
    const EdgeTable& edges() const { return edges_; }
    std::size_t num_nodes() const { return nodes_.count; }
    std::size_t num_edges() const { return edges_.size(); }

    // (neighbor id, edge row) pairs for edges neighbor -> v.
    std::span<const std::pair<NodeId, EdgeId>> in_neighbors(NodeId v) const {
        return {in_adj_.data() + in_off_[v], in_off_[v + 1] - in_off_[v]};
    }
    std::span<const std::pair<NodeId, EdgeId>> out_neighbors(NodeId v) const {
        return {out_adj_.data() + out_off_[v], out_off_[v + 1] - out_off_[v]};
    }
    std::size_t in_degree(NodeId v) const { return in_off_[v + 1] - in_off_[v]; }
    std::size_t out_degree(NodeId v) const { return out_off_[v + 1] - out_off_[v]; }

private:
    NodeTable nodes_;
    EdgeTable edges_;
    std::vector<std::size_t> in_off_, out_off_;
    std::vector<std::pair<NodeId, EdgeId>> in_adj_, out_adj_;
};

struct DatasetSplit {
    std::vector<NodeId> train;
    std::vector<NodeId> validation;
    std::vector<NodeId> test;
    std::uint64_t seed = 0;
};

// Aggregate all transactions per ordered (src, dst) pair into one edge with
// the 8-feature schema [count, total, mean, std, min, max, mean_ia, std_ia]
// (population std; inter-arrival stats over sorted timestamps, 0 for count 1).
// Pairs below either threshold are dropped.
EdgeTable collapse_multiedges(const std::vector<TransactionRecord>& records,
                              std::size_t num_nodes, std::size_t min_count,
                              double min_total_value);

constexpr std::size_t kCollapsedEdgeDim = 8;

// Mirror every connected pair: features become (e_fwd || e_rev), zero-padded
// when a direction is missing. Output dimension is 2P.
EdgeTable augment_edges(const EdgeTable& edges);

Graph build_graph(NodeTable nodes, EdgeTable edges);

// Stratified 70/10/20 shuffle-then-slice split of the labeled nodes;
// per class, remainders go to train.
DatasetSplit split_labels(const NodeTable& nodes, std::uint64_t seed);

}  // namespace edgeprop
