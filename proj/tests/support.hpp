#pragma once

// Shared fixtures and independent oracles for the test suites. The oracles
// here deliberately avoid the library's batched code paths: adjacency is
// rebuilt from the raw edge list and everything runs as plain per-node
// scalar loops, so agreement with the library is meaningful evidence.

#include <cmath>
#include <cstdint>
#include <random>
#include <tuple>
#include <vector>

#include "edgeprop/graph.hpp"
#include "edgeprop/metrics.hpp"
#include "edgeprop/model.hpp"
#include "edgeprop/rng.hpp"

namespace testsupport {

using namespace edgeprop;

// ---- scalar-loop single-hidden-layer MLP (no Matrix ops) ----
inline Vector naive_mlp(const MLPParams& p, const Vector& x) {
    Vector hidden(p.d_hidden(), 0.0);
    for (std::size_t j = 0; j < p.d_hidden(); ++j) {
        double a = p.b1[j];
        for (std::size_t i = 0; i < p.d_in(); ++i) a += x[i] * p.w1(i, j);
        hidden[j] = a > 0.0 ? a : 0.0;
    }
    Vector out(p.d_out(), 0.0);
    for (std::size_t j = 0; j < p.d_out(); ++j) {
        double a = p.b2[j];
        for (std::size_t i = 0; i < p.d_hidden(); ++i) a += hidden[i] * p.w2(i, j);
        out[j] = a;
    }
    return out;
}

// ---- dense reference forward: materializes every node's neighborhood ----
struct DenseResult {
    std::vector<std::vector<Vector>> z;  // z[k][v]
    std::vector<Vector> logits;          // per node
};

inline DenseResult dense_forward(const Graph& g, const ModelParams& p, const ModelConfig& cfg) {
    const std::size_t n = g.num_nodes();
    // adjacency straight from the edge list, not from the graph's index
    std::vector<std::vector<std::pair<NodeId, EdgeId>>> incoming(n);
    std::vector<std::size_t> in_deg(n, 0), out_deg(n, 0);
    for (std::size_t e = 0; e < g.num_edges(); ++e) {
        auto [s, d] = g.edges().edges[e];
        incoming[d].emplace_back(s, static_cast<EdgeId>(e));
        ++in_deg[d];
        ++out_deg[s];
    }

    DenseResult r;
    r.z.resize(cfg.layers + 1);
    r.z[0].resize(n);
    for (std::size_t v = 0; v < n; ++v) {
        if (cfg.use_node_features) {
            const auto row = g.nodes().features.row_span(v);
            r.z[0][v].assign(row.begin(), row.end());
        } else {
            r.z[0][v] = {1.0, std::log1p(static_cast<double>(in_deg[v])),
                         std::log1p(static_cast<double>(out_deg[v]))};
        }
    }
    const std::size_t P = cfg.use_edge_features ? g.edges().feature_dim() : 0;
    for (std::size_t k = 1; k <= cfg.layers; ++k) {
        r.z[k].resize(n);
        for (std::size_t v = 0; v < n; ++v) {
            const std::size_t d_msg = p.phi[k - 1].d_out();
            Vector agg(d_msg, 0.0);
            for (auto [u, e] : incoming[v]) {
                Vector in = r.z[k - 1][u];
                for (std::size_t j = 0; j < P; ++j) in.push_back(g.edges().features(e, j));
                Vector msg = naive_mlp(p.phi[k - 1], in);
                for (double& m : msg)
                    if (m < 0.0) m = 0.0;
                for (std::size_t j = 0; j < d_msg; ++j) agg[j] += msg[j];
            }
            if (cfg.aggregator == Aggregator::Mean && !incoming[v].empty())
                for (double& a : agg) a /= static_cast<double>(incoming[v].size());
            Vector in = r.z[k - 1][v];
            in.insert(in.end(), agg.begin(), agg.end());
            Vector out = naive_mlp(p.rho[k - 1], in);
            if (k < cfg.layers)
                for (double& o : out)
                    if (o < 0.0) o = 0.0;
            r.z[k][v] = std::move(out);
        }
    }
    r.logits.resize(n);
    for (std::size_t v = 0; v < n; ++v) {
        const Vector& zl = r.z[cfg.layers][v];
        Vector lg(cfg.num_classes, 0.0);
        for (std::size_t c = 0; c < cfg.num_classes; ++c) {
            double a = p.head_b[c];
            for (std::size_t i = 0; i < zl.size(); ++i) a += zl[i] * p.head_w(i, c);
            lg[c] = a;
        }
        r.logits[v] = std::move(lg);
    }
    return r;
}

// ---- random small graph instances ----
struct RandomGraphSpec {
    std::size_t max_nodes = 20;
    std::size_t node_dim = 4;
    std::size_t edge_dim = 3;
    std::size_t classes = 2;
    double edge_prob = 0.25;
    bool augment = false;
    std::uint64_t seed = 0;
};

inline Graph random_graph(const RandomGraphSpec& spec) {
    auto rng = keyed_rng(spec.seed, 0x7E57ull);
    std::uniform_int_distribution<std::size_t> nd(3, spec.max_nodes);
    const std::size_t n = nd(rng);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::uniform_int_distribution<std::int32_t> cls(0, static_cast<std::int32_t>(spec.classes) - 1);

    NodeTable nodes;
    nodes.count = n;
    nodes.num_classes = spec.classes;
    nodes.features = Matrix(n, spec.node_dim);
    for (double& v : nodes.features.data()) v = gauss(rng);
    nodes.labels.resize(n);
    for (auto& l : nodes.labels) l = cls(rng);

    EdgeTable edges;
    edges.features = Matrix(0, spec.edge_dim);
    std::vector<Vector> rows;
    for (std::size_t s = 0; s < n; ++s)
        for (std::size_t d = 0; d < n; ++d) {
            if (s == d || unif(rng) >= spec.edge_prob) continue;
            edges.edges.emplace_back(static_cast<NodeId>(s), static_cast<NodeId>(d));
            Vector f(spec.edge_dim);
            for (double& v : f) v = gauss(rng);
            rows.push_back(std::move(f));
        }
    edges.features = Matrix(rows.size(), spec.edge_dim);
    for (std::size_t i = 0; i < rows.size(); ++i)
        std::copy(rows[i].begin(), rows[i].end(), edges.features.row(i));
    if (spec.augment) edges = augment_edges(edges);
    return build_graph(std::move(nodes), std::move(edges));
}

// ---- independent metrics oracle ----
inline MetricsReport oracle_metrics(const std::vector<std::vector<std::uint64_t>>& cm) {
    const std::size_t c = cm.size();
    MetricsReport r;
    r.confusion = cm;
    r.precision.assign(c, 0.0);
    r.recall.assign(c, 0.0);
    r.f1.assign(c, 0.0);
    r.support.assign(c, 0);
    std::uint64_t total = 0, correct = 0;
    for (std::size_t i = 0; i < c; ++i)
        for (std::size_t j = 0; j < c; ++j) {
            total += cm[i][j];
            if (i == j) correct += cm[i][j];
        }
    r.accuracy = total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0;
    for (std::size_t k = 0; k < c; ++k) {
        std::uint64_t tp = cm[k][k], fp = 0, fn = 0;
        for (std::size_t i = 0; i < c; ++i)
            if (i != k) {
                fp += cm[i][k];
                fn += cm[k][i];
            }
        for (std::size_t j = 0; j < c; ++j) r.support[k] += cm[k][j];
        r.precision[k] = tp + fp ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
        r.recall[k] = tp + fn ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
        const double pr = r.precision[k] + r.recall[k];
        r.f1[k] = pr > 0.0 ? 2.0 * r.precision[k] * r.recall[k] / pr : 0.0;
        r.macro_precision += r.precision[k];
        r.macro_recall += r.recall[k];
        r.macro_f1 += r.f1[k];
    }
    r.macro_precision /= static_cast<double>(c);
    r.macro_recall /= static_cast<double>(c);
    r.macro_f1 /= static_cast<double>(c);
    return r;
}

// Full-mode frontier over every node of the graph.
inline Frontier full_frontier(const Graph& g, std::size_t k) {
    std::vector<NodeId> all(g.num_nodes());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<NodeId>(i);
    SamplerConfig cfg{.batch_size = all.size(), .sample_size = 0, .mode = SampleMode::Full};
    return build_frontiers(g, all, k, cfg);
}

// Re-seed the initialization until every relu pre-activation clears the
// finite-difference perturbation scale; keeps FD probes one-sided-slope free.
inline ModelParams kink_free_params(const Graph& g, const Frontier& fr, const ModelConfig& cfg,
                                    std::uint64_t seed) {
    ModelParams p = init_params(cfg, g.nodes().feature_dim(), g.edges().feature_dim(), seed);
    for (std::uint64_t t = 1; t < 64; ++t) {
        if (min_relu_gap(forward_exact(g, fr, p, cfg), cfg) >= 1e-3) break;
        p = init_params(cfg, g.nodes().feature_dim(), g.edges().feature_dim(), seed + t);
    }
    return p;
}

}  // namespace testsupport
