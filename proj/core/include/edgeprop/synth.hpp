#pragma once

#include <cstdint>
#include <vector>

#include "edgeprop/graph.hpp"

namespace edgeprop {

// Synthetic transaction graph with a planted, edge-statistic-borne class
// signal: class-1 senders move larger amounts in bursts, node features carry
// only a weak shift.
struct SynthConfig {
    std::size_t num_nodes = 1000;
    std::size_t num_classes = 2;
    std::vector<double> class_prior;       // defaults to uniform
    double out_degree_mean = 5.0;          // Poisson, min 1
    double tx_per_edge_mean = 3.0;         // count = 1 + Poisson
    double node_signal = 0.2;              // label shift on feature 0
    double edge_log_mean_base = 0.0;       // lognormal log-mean, class-0 senders
    double edge_log_mean_signal = 2.0;     // class-1 senders
    double edge_log_std = 0.5;
    double burstiness = 0.1;               // class-1 inter-arrival scale (others 1.0)
    double time_window = 2592000.0;        // seconds
    std::size_t node_feature_dim = 8;
    std::uint64_t seed = 0;
};

struct SynthData {
    NodeTable nodes;  // labels filled for every node
    std::vector<TransactionRecord> records;
};

SynthData generate(const SynthConfig& cfg);

}  // namespace edgeprop
