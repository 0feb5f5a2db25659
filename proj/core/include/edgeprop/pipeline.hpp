#pragma once

#include <cstdint>
#include <vector>

#include "edgeprop/graph.hpp"

namespace edgeprop {

struct IngestOptions {
    std::size_t min_count = 1;
    double min_total_value = 0.0;
    bool drop_isolated = true;
    bool standardize = true;  // z-score node features (train stats) and edge features
    bool augment = true;
};

struct PreparedData {
    Graph graph;
    DatasetSplit split;
};

// Full ingestion: collapse -> drop isolated (id compaction) -> standardize ->
// augment -> split -> build.
PreparedData prepare(NodeTable nodes, const std::vector<TransactionRecord>& records,
                     const IngestOptions& opt, std::uint64_t split_seed);

// Pre-collapsed alternative (edges.csv input); collapse thresholds ignored.
PreparedData prepare_from_edges(NodeTable nodes, EdgeTable edges, const IngestOptions& opt,
                                std::uint64_t split_seed);

}  // namespace edgeprop
