#include "edgeprop/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "edgeprop/errors.hpp"

namespace edgeprop {

namespace {

// Remove nodes that survive no edge; compacts ids.
void drop_isolated_nodes(NodeTable& nodes, EdgeTable& edges) {
    std::vector<bool> keep(nodes.count, false);
    for (auto [s, d] : edges.edges) {
        keep[s] = true;
        keep[d] = true;
    }
    std::vector<NodeId> remap(nodes.count, 0);
    std::size_t next = 0;
    for (std::size_t i = 0; i < nodes.count; ++i)
        if (keep[i]) remap[i] = static_cast<NodeId>(next++);
    if (next == nodes.count) return;

    NodeTable compact;
    compact.count = next;
    compact.num_classes = nodes.num_classes;
    compact.features = Matrix(next, nodes.feature_dim());
    compact.labels.resize(next);
    for (std::size_t i = 0; i < nodes.count; ++i) {
        if (!keep[i]) continue;
        std::copy_n(nodes.features.row(i), nodes.feature_dim(),
                    compact.features.row(remap[i]));
        compact.labels[remap[i]] = nodes.labels[i];
    }
    for (auto& [s, d] : edges.edges) {
        s = remap[s];
        d = remap[d];
    }
    nodes = std::move(compact);
}

void zscore_columns(Matrix& m, const std::vector<std::size_t>& stat_rows) {
    if (stat_rows.empty()) return;
    const double n = static_cast<double>(stat_rows.size());
    for (std::size_t c = 0; c < m.cols(); ++c) {
        double s = 0.0, s2 = 0.0;
        for (std::size_t r : stat_rows) {
            s += m(r, c);
            s2 += m(r, c) * m(r, c);
        }
        const double mean = s / n;
        const double std = std::sqrt(std::max(0.0, s2 / n - mean * mean));
        const double scale = std > 1e-12 ? 1.0 / std : 1.0;
        for (std::size_t r = 0; r < m.rows(); ++r) m(r, c) = (m(r, c) - mean) * scale;
    }
}

PreparedData finish(NodeTable nodes, EdgeTable edges, const IngestOptions& opt,
                    std::uint64_t split_seed) {
    if (opt.drop_isolated) drop_isolated_nodes(nodes, edges);

    PreparedData out;
    out.split = split_labels(nodes, split_seed);

    if (opt.standardize) {
        std::vector<std::size_t> train_rows(out.split.train.begin(), out.split.train.end());
        zscore_columns(nodes.features, train_rows);
        std::vector<std::size_t> all_edges(edges.size());
        for (std::size_t i = 0; i < all_edges.size(); ++i) all_edges[i] = i;
        zscore_columns(edges.features, all_edges);
    }
    if (opt.augment) edges = augment_edges(edges);
    out.graph = build_graph(std::move(nodes), std::move(edges));
    return out;
}

}  // namespace

PreparedData prepare(NodeTable nodes, const std::vector<TransactionRecord>& records,
                     const IngestOptions& opt, std::uint64_t split_seed) {
    EdgeTable edges = collapse_multiedges(records, nodes.count, opt.min_count,
                                          opt.min_total_value);
    return finish(std::move(nodes), std::move(edges), opt, split_seed);
}

PreparedData prepare_from_edges(NodeTable nodes, EdgeTable edges, const IngestOptions& opt,
                                std::uint64_t split_seed) {
    return finish(std::move(nodes), std::move(edges), opt, split_seed);
}

}  // namespace edgeprop
