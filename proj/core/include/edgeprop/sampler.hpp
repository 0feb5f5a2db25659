#pragma once

#include <cstdint>
#include <vector>

#include "edgeprop/graph.hpp"

namespace edgeprop {

enum class SampleMode { Full, Uniform };

struct SamplerConfig {
    std::size_t batch_size = 32;
    std::size_t sample_size = 10;  // S
    SampleMode mode = SampleMode::Uniform;
    std::uint64_t seed = 0;
};

// Layered receptive field: layers[k] = B^k, sampled in-neighbor lists for
// every node of layers[k] at k >= 1, plus the node's full in-degree.
struct Frontier {
    struct NodeSample {
        std::vector<std::pair<NodeId, EdgeId>> in;  // subset of in-index(v)
        std::size_t full_degree = 0;
    };
    std::size_t depth = 0;                           // K
    std::vector<std::vector<NodeId>> layers;         // layers[k] = B^k, k = 0..K, sorted
    std::vector<std::vector<NodeSample>> sampled;    // sampled[k][i] for layers[k][i], k >= 1
};

// Deterministic shuffle keyed by (seed, epoch); every train node appears in
// exactly one batch, last batch may be short.
std::vector<std::vector<NodeId>> batch_iterator(const std::vector<NodeId>& train_set,
                                                const SamplerConfig& cfg, std::uint64_t epoch);

// Receptive-field construction: B^K = batch, B^(k-1) = B^k u sampled
// in-neighbors of B^k. Uniform mode draws min(S, deg) without replacement from
// an RNG stream keyed on (seed, epoch, batch_index, layer, node).
Frontier build_frontiers(const Graph& graph, const std::vector<NodeId>& batch, std::size_t k,
                         const SamplerConfig& cfg, std::uint64_t epoch = 0,
                         std::uint64_t batch_index = 0);

}  // namespace edgeprop
