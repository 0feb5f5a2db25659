#include "edgeprop/sampler.hpp"

#include <algorithm>

#include "edgeprop/errors.hpp"
#include "edgeprop/rng.hpp"

namespace edgeprop {

std::vector<std::vector<NodeId>> batch_iterator(const std::vector<NodeId>& train_set,
                                                const SamplerConfig& cfg, std::uint64_t epoch) {
    if (train_set.empty()) throw DataError("batch_iterator: empty train set");
    std::vector<NodeId> order = train_set;
    std::sort(order.begin(), order.end());
    auto rng = keyed_rng(cfg.seed, epoch, std::uint64_t{0xBA7C4});
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<std::vector<NodeId>> batches;
    for (std::size_t i = 0; i < order.size(); i += cfg.batch_size) {
        const std::size_t end = std::min(i + cfg.batch_size, order.size());
        batches.emplace_back(order.begin() + i, order.begin() + end);
    }
    return batches;
}

Frontier build_frontiers(const Graph& graph, const std::vector<NodeId>& batch, std::size_t k,
                         const SamplerConfig& cfg, std::uint64_t epoch,
                         std::uint64_t batch_index) {
    Frontier fr;
    fr.depth = k;
    fr.layers.resize(k + 1);
    fr.sampled.resize(k + 1);

    std::vector<NodeId> top(batch.begin(), batch.end());
    std::sort(top.begin(), top.end());
    top.erase(std::unique(top.begin(), top.end()), top.end());
    fr.layers[k] = std::move(top);

    for (std::size_t layer = k; layer >= 1; --layer) {
        const auto& nodes = fr.layers[layer];
        auto& samples = fr.sampled[layer];
        samples.resize(nodes.size());
        std::vector<NodeId> next(nodes.begin(), nodes.end());
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            const NodeId v = nodes[i];
            auto in = graph.in_neighbors(v);
            auto& s = samples[i];
            s.full_degree = in.size();
            if (cfg.mode == SampleMode::Full || in.size() <= cfg.sample_size) {
                s.in.assign(in.begin(), in.end());
            } else {
                // Partial Fisher-Yates over index positions.
                std::vector<std::uint32_t> idx(in.size());
                for (std::uint32_t j = 0; j < idx.size(); ++j) idx[j] = j;
                auto rng = keyed_rng(cfg.seed, epoch, batch_index, static_cast<std::uint64_t>(layer),
                                     static_cast<std::uint64_t>(v));
                for (std::size_t j = 0; j < cfg.sample_size; ++j) {
                    std::uniform_int_distribution<std::size_t> pick(j, idx.size() - 1);
                    std::swap(idx[j], idx[pick(rng)]);
                }
                idx.resize(cfg.sample_size);
                std::sort(idx.begin(), idx.end());
                s.in.reserve(cfg.sample_size);
                for (std::uint32_t j : idx) s.in.push_back(in[j]);
            }
            for (const auto& [u, e] : s.in) next.push_back(u);
        }
        std::sort(next.begin(), next.end());
        next.erase(std::unique(next.begin(), next.end()), next.end());
        fr.layers[layer - 1] = std::move(next);
    }
    return fr;
}

}  // namespace edgeprop
