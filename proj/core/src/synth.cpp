#include "edgeprop/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "edgeprop/errors.hpp"
#include "edgeprop/rng.hpp"

namespace edgeprop {

SynthData generate(const SynthConfig& cfg) {
    if (cfg.num_nodes < 20) throw ConfigError("generate: need at least 20 nodes");
    if (cfg.num_classes < 2) throw ConfigError("generate: need at least 2 classes");
    if (cfg.out_degree_mean <= 0.0 || cfg.tx_per_edge_mean < 0.0 || cfg.edge_log_std <= 0.0 ||
        cfg.burstiness <= 0.0 || cfg.time_window <= 0.0)
        throw ConfigError("generate: rates and scales must be positive");
    std::vector<double> prior = cfg.class_prior;
    if (prior.empty()) prior.assign(cfg.num_classes, 1.0 / static_cast<double>(cfg.num_classes));
    if (prior.size() != cfg.num_classes)
        throw ConfigError("generate: class_prior size != num_classes");
    const double prior_sum = std::accumulate(prior.begin(), prior.end(), 0.0);
    if (std::abs(prior_sum - 1.0) > 1e-9)
        throw ConfigError("generate: class_prior must sum to 1");

    const std::size_t n = cfg.num_nodes;
    SynthData out;
    out.nodes.count = n;
    out.nodes.num_classes = cfg.num_classes;
    out.nodes.labels.resize(n);
    out.nodes.features = Matrix(n, cfg.node_feature_dim);

    {
        auto rng = keyed_rng(cfg.seed, std::uint64_t{1});
        std::discrete_distribution<std::int32_t> label_dist(prior.begin(), prior.end());
        std::normal_distribution<double> normal(0.0, 1.0);
        for (std::size_t i = 0; i < n; ++i) {
            out.nodes.labels[i] = label_dist(rng);
            for (std::size_t j = 0; j < cfg.node_feature_dim; ++j)
                out.nodes.features(i, j) = normal(rng);
            out.nodes.features(i, 0) += cfg.node_signal * out.nodes.labels[i];
        }
    }

    auto deg_rng = keyed_rng(cfg.seed, std::uint64_t{2});
    std::poisson_distribution<std::size_t> deg_dist(cfg.out_degree_mean);
    std::poisson_distribution<std::size_t> tx_dist(cfg.tx_per_edge_mean);

    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t out_deg = std::min(n - 1, std::max<std::size_t>(1, deg_dist(deg_rng)));
        // distinct uniform targets, excluding self
        std::vector<NodeId> targets;
        std::uniform_int_distribution<NodeId> pick(0, static_cast<NodeId>(n - 1));
        while (targets.size() < out_deg) {
            NodeId t = pick(deg_rng);
            if (t == i || std::find(targets.begin(), targets.end(), t) != targets.end()) continue;
            targets.push_back(t);
        }

        const bool bursty = out.nodes.labels[i] == 1;
        const double log_mean =
            bursty ? cfg.edge_log_mean_signal : cfg.edge_log_mean_base;
        for (NodeId t : targets) {
            auto rng = keyed_rng(cfg.seed, std::uint64_t{3}, static_cast<std::uint64_t>(i),
                                 static_cast<std::uint64_t>(t));
            const std::size_t count = 1 + tx_dist(rng);
            std::lognormal_distribution<double> value_dist(log_mean, cfg.edge_log_std);
            const double ia_scale = (bursty ? cfg.burstiness : 1.0) * cfg.time_window /
                                    static_cast<double>(count);
            std::exponential_distribution<double> gap_dist(1.0 / ia_scale);
            std::uniform_real_distribution<double> start_dist(0.0, cfg.time_window / 2.0);
            double t_cur = start_dist(rng);
            for (std::size_t c = 0; c < count; ++c) {
                t_cur += gap_dist(rng);
                out.records.push_back({static_cast<NodeId>(i), t,
                                       static_cast<std::uint64_t>(std::llround(t_cur)),
                                       value_dist(rng)});
            }
        }
    }
    return out;
}

}  // namespace edgeprop
