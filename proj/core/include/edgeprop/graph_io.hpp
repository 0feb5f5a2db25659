#pragma once

#include <string>
#include <vector>

#include "edgeprop/graph.hpp"

namespace edgeprop {

// nodes.csv: header id,label,f1..fF; empty label means unlabeled.
// Node ids must be the contiguous range 0..N-1 (any row order).
NodeTable load_nodes_csv(const std::string& path);
void save_nodes_csv(const std::string& path, const NodeTable& nodes);

// transactions.csv: header src,dst,timestamp,value.
std::vector<TransactionRecord> load_transactions_csv(const std::string& path);
void save_transactions_csv(const std::string& path,
                           const std::vector<TransactionRecord>& records);

// edges.csv: header src,dst,e1..eP (pre-collapsed alternative input).
EdgeTable load_edges_csv(const std::string& path);
void save_edges_csv(const std::string& path, const EdgeTable& edges);

// Binary cache: magic EPGRAPH1, little-endian u64 counts (N, |E|, F, P, C),
// row-major f64 feature matrices, then label and endpoint arrays.
void save_graph_cache(const std::string& path, const Graph& g);
Graph load_graph_cache(const std::string& path);

}  // namespace edgeprop
