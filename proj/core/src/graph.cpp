#include "edgeprop/graph.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "edgeprop/errors.hpp"
#include "edgeprop/rng.hpp"

namespace edgeprop {

std::vector<NodeId> NodeTable::labeled_ids() const {
    std::vector<NodeId> out;
    for (std::size_t i = 0; i < count; ++i)
        if (labels[i] != kUnlabeled) out.push_back(static_cast<NodeId>(i));
    return out;
}

EdgeTable collapse_multiedges(const std::vector<TransactionRecord>& records,
                              std::size_t num_nodes, std::size_t min_count,
                              double min_total_value) {
    if (records.empty()) throw DataError("collapse_multiedges: no transaction records");
    if (min_total_value < 0.0) throw DataError("collapse_multiedges: negative value threshold");

    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        if (r.src >= num_nodes || r.dst >= num_nodes)
            throw DataError("collapse_multiedges: unknown node id in record " + std::to_string(i));
        if (r.value < 0.0)
            throw DataError("collapse_multiedges: negative value in record " + std::to_string(i));
    }

    std::map<std::pair<NodeId, NodeId>, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < records.size(); ++i)
        groups[{records[i].src, records[i].dst}].push_back(i);

    EdgeTable out;
    std::vector<double> rows;
    std::vector<std::uint64_t> ts;
    for (const auto& [pair, idxs] : groups) {
        const double n = static_cast<double>(idxs.size());
        double total = 0.0, sq = 0.0;
        double vmin = records[idxs[0]].value, vmax = vmin;
        ts.clear();
        for (std::size_t i : idxs) {
            const double v = records[i].value;
            total += v;
            sq += v * v;
            vmin = std::min(vmin, v);
            vmax = std::max(vmax, v);
            ts.push_back(records[i].timestamp);
        }
        if (idxs.size() < min_count || total < min_total_value) continue;

        const double mean = total / n;
        const double var = std::max(0.0, sq / n - mean * mean);

        double ia_mean = 0.0, ia_std = 0.0;
        if (idxs.size() > 1) {
            std::sort(ts.begin(), ts.end());
            double s = 0.0, s2 = 0.0;
            const double m = n - 1.0;
            for (std::size_t i = 1; i < ts.size(); ++i) {
                const double gap = static_cast<double>(ts[i] - ts[i - 1]);
                s += gap;
                s2 += gap * gap;
            }
            ia_mean = s / m;
            ia_std = std::sqrt(std::max(0.0, s2 / m - ia_mean * ia_mean));
        }

        out.edges.push_back(pair);
        rows.insert(rows.end(),
                    {n, total, mean, std::sqrt(var), vmin, vmax, ia_mean, ia_std});
    }

    out.features = Matrix(out.edges.size(), kCollapsedEdgeDim);
    std::copy(rows.begin(), rows.end(), out.features.data().begin());
    return out;
}

EdgeTable augment_edges(const EdgeTable& edges) {
    const std::size_t p = edges.feature_dim();
    std::map<std::pair<NodeId, NodeId>, EdgeId> index;
    for (std::size_t i = 0; i < edges.size(); ++i) {
        auto [it, inserted] = index.emplace(edges.edges[i], static_cast<EdgeId>(i));
        if (!inserted) throw DataError("augment_edges: duplicate ordered pair in input");
    }

    // One entry per unordered connected pair, keyed (min, max).
    std::map<std::pair<NodeId, NodeId>, std::pair<std::optional<EdgeId>, std::optional<EdgeId>>>
        pairs;
    for (std::size_t i = 0; i < edges.size(); ++i) {
        auto [a, b] = edges.edges[i];
        auto key = std::minmax(a, b);
        auto& slot = pairs[{key.first, key.second}];
        if (a <= b)
            slot.first = static_cast<EdgeId>(i);  // min -> max direction
        else
            slot.second = static_cast<EdgeId>(i);
    }

    EdgeTable out;
    out.features = Matrix(2 * pairs.size(), 2 * p);
    std::size_t row = 0;
    auto emit = [&](NodeId s, NodeId d, std::optional<EdgeId> fwd, std::optional<EdgeId> rev) {
        out.edges.emplace_back(s, d);
        double* dst = out.features.row(row++);
        if (fwd)
            std::copy_n(edges.features.row(*fwd), p, dst);
        if (rev)
            std::copy_n(edges.features.row(*rev), p, dst + p);
    };
    std::size_t self_loops = 0;
    for (const auto& [key, slot] : pairs) {
        if (key.first == key.second) {
            // Self loop: forward and reverse coincide.
            emit(key.first, key.second, slot.first, slot.first);
            ++self_loops;
            continue;
        }
        emit(key.first, key.second, slot.first, slot.second);
        emit(key.second, key.first, slot.second, slot.first);
    }
    if (self_loops > 0) {
        Matrix trimmed(out.edges.size(), 2 * p);
        std::copy_n(out.features.data().begin(), trimmed.size(), trimmed.data().begin());
        out.features = std::move(trimmed);
    }
    return out;
}

Graph::Graph(NodeTable nodes, EdgeTable edges)
    : nodes_(std::move(nodes)), edges_(std::move(edges)) {
    const std::size_t n = nodes_.count;
    for (std::size_t i = 0; i < edges_.size(); ++i) {
        auto [s, d] = edges_.edges[i];
        if (s >= n || d >= n)
            throw DataError("build_graph: endpoint out of range at edge row " + std::to_string(i));
    }
    in_off_.assign(n + 1, 0);
    out_off_.assign(n + 1, 0);
    for (auto [s, d] : edges_.edges) {
        ++in_off_[d + 1];
        ++out_off_[s + 1];
    }
    std::partial_sum(in_off_.begin(), in_off_.end(), in_off_.begin());
    std::partial_sum(out_off_.begin(), out_off_.end(), out_off_.begin());
    in_adj_.resize(edges_.size());
    out_adj_.resize(edges_.size());
    std::vector<std::size_t> ic(in_off_.begin(), in_off_.end() - 1);
    std::vector<std::size_t> oc(out_off_.begin(), out_off_.end() - 1);
    for (std::size_t e = 0; e < edges_.size(); ++e) {
        auto [s, d] = edges_.edges[e];
        in_adj_[ic[d]++] = {s, static_cast<EdgeId>(e)};
        out_adj_[oc[s]++] = {d, static_cast<EdgeId>(e)};
    }
    for (std::size_t v = 0; v < n; ++v) {
        std::sort(in_adj_.begin() + in_off_[v], in_adj_.begin() + in_off_[v + 1]);
        std::sort(out_adj_.begin() + out_off_[v], out_adj_.begin() + out_off_[v + 1]);
    }
}

Graph build_graph(NodeTable nodes, EdgeTable edges) {
    return Graph(std::move(nodes), std::move(edges));
}

DatasetSplit split_labels(const NodeTable& nodes, std::uint64_t seed) {
    auto labeled = nodes.labeled_ids();
    if (labeled.size() < 10) throw DataError("split_labels: fewer than 10 labeled nodes");

    std::vector<std::vector<NodeId>> per_class(nodes.num_classes);
    for (NodeId v : labeled) per_class[nodes.labels[v]].push_back(v);

    DatasetSplit split;
    split.seed = seed;
    for (std::size_t c = 0; c < per_class.size(); ++c) {
        auto& ids = per_class[c];
        const std::size_t n = ids.size();
        const std::size_t n_val = n / 10;
        const std::size_t n_test = n / 5;
        if (n_val < 1 || n_test < 1 || n - n_val - n_test < 1)
            throw DataError("split_labels: class " + std::to_string(c) +
                            " has too few labeled nodes for a 70/10/20 split");
        auto rng = keyed_rng(seed, static_cast<std::uint64_t>(c));
        std::shuffle(ids.begin(), ids.end(), rng);
        split.validation.insert(split.validation.end(), ids.begin(), ids.begin() + n_val);
        split.test.insert(split.test.end(), ids.begin() + n_val, ids.begin() + n_val + n_test);
        split.train.insert(split.train.end(), ids.begin() + n_val + n_test, ids.end());
    }
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.validation.begin(), split.validation.end());
    std::sort(split.test.begin(), split.test.end());
    return split;
}

}  // namespace edgeprop
