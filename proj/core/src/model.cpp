#include "edgeprop/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "edgeprop/errors.hpp"
#include "edgeprop/rng.hpp"

namespace edgeprop {

namespace {

void append_tensor(std::vector<double>& out, const std::vector<double>& t) {
    out.insert(out.end(), t.begin(), t.end());
}

std::size_t take_tensor(std::span<const double> flat, std::size_t off, std::vector<double>& t) {
    std::copy_n(flat.begin() + off, t.size(), t.begin());
    return off + t.size();
}

}  // namespace

std::size_t ModelParams::total_size() const {
    std::size_t n = head_w.size() + head_b.size();
    for (const auto& m : phi) n += m.w1.size() + m.b1.size() + m.w2.size() + m.b2.size();
    for (const auto& m : rho) n += m.w1.size() + m.b1.size() + m.w2.size() + m.b2.size();
    return n;
}

std::vector<double> ModelParams::to_flat() const {
    std::vector<double> out;
    out.reserve(total_size());
    for (const auto& m : phi) {
        append_tensor(out, m.w1.data());
        append_tensor(out, m.b1);
        append_tensor(out, m.w2.data());
        append_tensor(out, m.b2);
    }
    for (const auto& m : rho) {
        append_tensor(out, m.w1.data());
        append_tensor(out, m.b1);
        append_tensor(out, m.w2.data());
        append_tensor(out, m.b2);
    }
    append_tensor(out, head_w.data());
    append_tensor(out, head_b);
    return out;
}

void ModelParams::from_flat(std::span<const double> flat) {
    if (flat.size() != total_size()) throw ShapeError("ModelParams::from_flat: size mismatch");
    std::size_t off = 0;
    for (auto* group : {&phi, &rho})
        for (auto& m : *group) {
            off = take_tensor(flat, off, m.w1.data());
            off = take_tensor(flat, off, m.b1);
            off = take_tensor(flat, off, m.w2.data());
            off = take_tensor(flat, off, m.b2);
        }
    off = take_tensor(flat, off, head_w.data());
    take_tensor(flat, off, head_b);
}

ModelParams init_params(const ModelConfig& cfg, std::size_t node_feature_dim,
                        std::size_t edge_feature_dim, std::uint64_t seed) {
    const std::size_t d0 = cfg.input_dim(node_feature_dim);
    const std::size_t d = cfg.embed_dim;
    const std::size_t p = cfg.use_edge_features ? edge_feature_dim : 0;
    auto rng = keyed_rng(seed, std::uint64_t{0x1A17});
    ModelParams params;
    for (std::size_t k = 1; k <= cfg.layers; ++k) {
        const std::size_t d_prev = (k == 1) ? d0 : d;
        params.phi.push_back(glorot_init(d_prev + p, d, d, rng));
        params.rho.push_back(glorot_init(d_prev + d, d, d, rng));
    }
    const std::size_t d_last = (cfg.layers == 0) ? d0 : d;
    params.head_w = Matrix(d_last, cfg.num_classes);
    const double bound = std::sqrt(6.0 / static_cast<double>(d_last + cfg.num_classes));
    std::uniform_real_distribution<double> u(-bound, bound);
    for (double& v : params.head_w.data()) v = u(rng);
    params.head_b = Vector(cfg.num_classes, 0.0);
    return params;
}

void HistoryCache::reset(std::size_t layers, std::size_t num_edges, std::size_t num_nodes,
                         std::size_t d) {
    num_layers = layers;
    dim = d;
    edge_hist.assign(layers, Matrix(num_edges, d));
    node_sums.assign(layers, Matrix(num_nodes, d));
}

bool HistoryCache::matches(std::size_t layers, std::size_t num_edges, std::size_t num_nodes,
                           std::size_t d) const {
    return num_layers == layers && dim == d &&
           (layers == 0 ||
            (edge_hist[0].rows() == num_edges && node_sums[0].rows() == num_nodes));
}

Vector phi_message(std::span<const double> z_u, std::span<const double> e_uv,
                   const MLPParams& phi) {
    if (z_u.size() + e_uv.size() != phi.d_in())
        throw ShapeError("phi_message: input dimension mismatch");
    Matrix x(1, phi.d_in());
    std::copy(z_u.begin(), z_u.end(), x.row(0));
    std::copy(e_uv.begin(), e_uv.end(), x.row(0) + z_u.size());
    auto fwd = mlp_forward(phi, x);
    Vector out(fwd.output.row(0), fwd.output.row(0) + phi.d_out());
    for (double& v : out)
        if (v < 0.0) v = 0.0;
    return out;
}

Vector aggregate(const std::vector<Vector>& messages, Aggregator mode, std::size_t dim) {
    Vector out(dim, 0.0);
    for (const auto& m : messages) {
        if (m.size() != dim) throw ShapeError("aggregate: mixed message dimensions");
        for (std::size_t i = 0; i < dim; ++i) out[i] += m[i];
    }
    if (mode == Aggregator::Mean && !messages.empty())
        for (double& v : out) v /= static_cast<double>(messages.size());
    return out;
}

Vector node_update(std::span<const double> z_prev, std::span<const double> agg,
                   const MLPParams& rho, bool final_layer) {
    if (z_prev.size() + agg.size() != rho.d_in())
        throw ShapeError("node_update: input dimension mismatch");
    Matrix x(1, rho.d_in());
    std::copy(z_prev.begin(), z_prev.end(), x.row(0));
    std::copy(agg.begin(), agg.end(), x.row(0) + z_prev.size());
    auto fwd = mlp_forward(rho, x);
    Vector out(fwd.output.row(0), fwd.output.row(0) + rho.d_out());
    if (!final_layer)
        for (double& v : out)
            if (v < 0.0) v = 0.0;
    return out;
}

double min_relu_gap(const ForwardResult& fwd, const ModelConfig& cfg) {
    double gap = std::numeric_limits<double>::infinity();
    auto scan = [&gap](const Matrix& m) {
        for (double v : m.data()) gap = std::min(gap, std::abs(v));
    };
    for (std::size_t k = 1; k < fwd.cache.size(); ++k) {
        const LayerCache& lc = fwd.cache[k];
        scan(lc.phi_cache.hidden_pre);
        scan(lc.phi_pre);
        scan(lc.rho_cache.hidden_pre);
        if (k < cfg.layers) scan(lc.rho_pre);  // final rho output is not relu-gated
    }
    return gap;
}

Matrix input_features(const Graph& graph, const ModelConfig& cfg,
                      const std::vector<NodeId>& nodes) {
    const std::size_t d0 = cfg.input_dim(graph.nodes().feature_dim());
    Matrix z0(nodes.size(), d0);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const NodeId v = nodes[i];
        if (cfg.use_node_features) {
            std::copy_n(graph.nodes().features.row(v), d0, z0.row(i));
        } else {
            z0(i, 0) = 1.0;
            z0(i, 1) = std::log1p(static_cast<double>(graph.in_degree(v)));
            z0(i, 2) = std::log1p(static_cast<double>(graph.out_degree(v)));
        }
    }
    return z0;
}

namespace {

enum class FwdMode { Exact, Plain, Cv };

ForwardResult run_forward(const Graph& graph, const Frontier& frontier, const ModelParams& params,
                          const ModelConfig& cfg, FwdMode mode, HistoryCache* hist,
                          bool update_history) {
    const std::size_t k_layers = frontier.depth;
    if (k_layers != cfg.layers) throw ShapeError("forward: frontier depth != model layers");
    const std::size_t d = cfg.embed_dim;
    const std::size_t p = cfg.use_edge_features ? graph.edges().feature_dim() : 0;

    if (mode == FwdMode::Cv) {
        if (!hist) throw ShapeError("forward_cv: missing history cache");
        if (!hist->matches(k_layers, graph.num_edges(), graph.num_nodes(), d))
            throw ShapeError(
                "forward_cv: history cache shape is stale for this graph/config; reset it");
    }

    ForwardResult res;
    res.z.resize(k_layers + 1);
    res.cache.resize(k_layers + 1);
    res.pos.resize(k_layers + 1);
    for (std::size_t k = 0; k <= k_layers; ++k) {
        const auto& nodes = frontier.layers[k];
        res.pos[k].reserve(nodes.size());
        for (std::size_t i = 0; i < nodes.size(); ++i) res.pos[k][nodes[i]] = i;
    }
    res.z[0] = input_features(graph, cfg, frontier.layers[0]);

    for (std::size_t k = 1; k <= k_layers; ++k) {
        const auto& nodes = frontier.layers[k];
        const auto& samples = frontier.sampled[k];
        const auto& pos_prev = res.pos[k - 1];
        const Matrix& z_prev = res.z[k - 1];
        const std::size_t d_prev = z_prev.cols();
        LayerCache& lc = res.cache[k];

        std::size_t total_rows = 0;
        lc.seg_off.resize(nodes.size() + 1);
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            lc.seg_off[i] = total_rows;
            total_rows += samples[i].in.size();
        }
        lc.seg_off[nodes.size()] = total_rows;

        lc.phi_in = Matrix(total_rows, d_prev + p);
        lc.row_src.resize(total_rows);
        lc.coeff.resize(total_rows);
        std::vector<EdgeId> row_edge(total_rows);
        {
            std::size_t r = 0;
            for (std::size_t i = 0; i < nodes.size(); ++i) {
                const auto& s = samples[i];
                const double n_samp = static_cast<double>(s.in.size());
                const double scale =
                    (cfg.aggregator == Aggregator::Sum)
                        ? static_cast<double>(s.full_degree) / std::max(1.0, n_samp)
                        : 1.0 / std::max(1.0, n_samp);
                for (const auto& [u, e] : s.in) {
                    lc.row_src[r] = u;
                    row_edge[r] = e;
                    lc.coeff[r] = scale;
                    double* dst = lc.phi_in.row(r);
                    std::copy_n(z_prev.row(pos_prev.at(u)), d_prev, dst);
                    if (p > 0) std::copy_n(graph.edges().features.row(e), p, dst + d_prev);
                    ++r;
                }
            }
        }

        auto phi_fwd = mlp_forward(params.phi[k - 1], lc.phi_in);
        lc.phi_pre = std::move(phi_fwd.output);
        lc.phi_cache = std::move(phi_fwd.cache);

        // messages = relu(phi_pre)
        Matrix msg = lc.phi_pre;
        for (double& v : msg.data())
            if (v < 0.0) v = 0.0;

        lc.rho_in = Matrix(nodes.size(), d_prev + d);
        Matrix* eh = (mode == FwdMode::Cv) ? &hist->edge_hist[k - 1] : nullptr;
        Matrix* ns = (mode == FwdMode::Cv) ? &hist->node_sums[k - 1] : nullptr;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            const NodeId v = nodes[i];
            double* row = lc.rho_in.row(i);
            std::copy_n(z_prev.row(pos_prev.at(v)), d_prev, row);
            double* agg = row + d_prev;
            for (std::size_t r = lc.seg_off[i]; r < lc.seg_off[i + 1]; ++r) {
                const double* m = msg.row(r);
                if (eh) {
                    const double* h = eh->row(row_edge[r]);
                    for (std::size_t j = 0; j < d; ++j) agg[j] += lc.coeff[r] * (m[j] - h[j]);
                } else {
                    for (std::size_t j = 0; j < d; ++j) agg[j] += lc.coeff[r] * m[j];
                }
            }
            if (ns && samples[i].full_degree > 0) {
                const double full_scale = (cfg.aggregator == Aggregator::Sum)
                                              ? 1.0
                                              : 1.0 / static_cast<double>(samples[i].full_degree);
                const double* sum = ns->row(v);
                for (std::size_t j = 0; j < d; ++j) agg[j] += full_scale * sum[j];
            }
            if (eh && update_history) {
                for (std::size_t r = lc.seg_off[i]; r < lc.seg_off[i + 1]; ++r) {
                    double* h = eh->row(row_edge[r]);
                    double* sum = ns->row(v);
                    const double* m = msg.row(r);
                    for (std::size_t j = 0; j < d; ++j) {
                        sum[j] += m[j] - h[j];
                        h[j] = m[j];
                    }
                }
            }
        }

        auto rho_fwd = mlp_forward(params.rho[k - 1], lc.rho_in);
        lc.rho_pre = std::move(rho_fwd.output);
        lc.rho_cache = std::move(rho_fwd.cache);
        res.z[k] = lc.rho_pre;
        if (k < k_layers)
            for (double& v : res.z[k].data())
                if (v < 0.0) v = 0.0;
    }

    const Matrix& z_top = res.z[k_layers];
    res.logits = matmul(z_top, params.head_w);
    for (std::size_t i = 0; i < res.logits.rows(); ++i)
        for (std::size_t c = 0; c < res.logits.cols(); ++c) res.logits(i, c) += params.head_b[c];
    if (!res.logits.all_finite()) throw NumericError("forward: non-finite logits");
    return res;
}

}  // namespace

ForwardResult forward_exact(const Graph& graph, const Frontier& frontier,
                            const ModelParams& params, const ModelConfig& cfg) {
    return run_forward(graph, frontier, params, cfg, FwdMode::Exact, nullptr, false);
}

ForwardResult forward_plain(const Graph& graph, const Frontier& frontier,
                            const ModelParams& params, const ModelConfig& cfg) {
    return run_forward(graph, frontier, params, cfg, FwdMode::Plain, nullptr, false);
}

ForwardResult forward_cv(const Graph& graph, const Frontier& frontier, const ModelParams& params,
                         const ModelConfig& cfg, HistoryCache& history, bool update_history) {
    return run_forward(graph, frontier, params, cfg, FwdMode::Cv, &history, update_history);
}

ModelParams backward(const Graph& graph, const Frontier& frontier, const ModelParams& params,
                     const ModelConfig& cfg, const ForwardResult& fwd, const Matrix& dlogits) {
    (void)graph;
    const std::size_t k_layers = frontier.depth;
    if (dlogits.rows() != fwd.logits.rows() || dlogits.cols() != fwd.logits.cols())
        throw ShapeError("backward: dlogits shape mismatch");

    ModelParams grads;
    grads.phi.reserve(params.phi.size());
    grads.rho.reserve(params.rho.size());
    auto zero_like = [](const MLPParams& m) {
        MLPParams g;
        g.w1 = Matrix(m.w1.rows(), m.w1.cols());
        g.b1 = Vector(m.b1.size(), 0.0);
        g.w2 = Matrix(m.w2.rows(), m.w2.cols());
        g.b2 = Vector(m.b2.size(), 0.0);
        return g;
    };
    for (const auto& m : params.phi) grads.phi.push_back(zero_like(m));
    for (const auto& m : params.rho) grads.rho.push_back(zero_like(m));

    // head
    const Matrix& z_top = fwd.z[k_layers];
    grads.head_w = matmul_at_b(z_top, dlogits);
    grads.head_b = Vector(params.head_b.size(), 0.0);
    for (std::size_t i = 0; i < dlogits.rows(); ++i)
        for (std::size_t c = 0; c < dlogits.cols(); ++c) grads.head_b[c] += dlogits(i, c);

    std::vector<Matrix> dz(k_layers + 1);
    for (std::size_t k = 0; k <= k_layers; ++k) dz[k] = Matrix(fwd.z[k].rows(), fwd.z[k].cols());
    dz[k_layers] = matmul_a_bt(dlogits, params.head_w);

    for (std::size_t k = k_layers; k >= 1; --k) {
        const LayerCache& lc = fwd.cache[k];
        const auto& nodes = frontier.layers[k];
        const auto& pos_prev = fwd.pos[k - 1];
        const std::size_t d_prev = fwd.z[k - 1].cols();
        const std::size_t d = cfg.embed_dim;

        Matrix dzk = std::move(dz[k]);
        if (k < k_layers)
            for (std::size_t i = 0; i < dzk.size(); ++i)
                if (lc.rho_pre.data()[i] <= 0.0) dzk.data()[i] = 0.0;

        auto rho_back = mlp_backward(params.rho[k - 1], lc.rho_cache, dzk);
        auto& rg = grads.rho[k - 1];
        for (std::size_t i = 0; i < rg.w1.size(); ++i)
            rg.w1.data()[i] += rho_back.grads.w1.data()[i];
        for (std::size_t i = 0; i < rg.b1.size(); ++i) rg.b1[i] += rho_back.grads.b1[i];
        for (std::size_t i = 0; i < rg.w2.size(); ++i)
            rg.w2.data()[i] += rho_back.grads.w2.data()[i];
        for (std::size_t i = 0; i < rg.b2.size(); ++i) rg.b2[i] += rho_back.grads.b2[i];

        // split rho input gradient: z_prev part and aggregate part
        Matrix dphi_out(lc.phi_pre.rows(), d);
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            const double* din = rho_back.dx.row(i);
            double* dprev = dz[k - 1].row(pos_prev.at(nodes[i]));
            for (std::size_t j = 0; j < d_prev; ++j) dprev[j] += din[j];
            for (std::size_t r = lc.seg_off[i]; r < lc.seg_off[i + 1]; ++r) {
                double* dm = dphi_out.row(r);
                for (std::size_t j = 0; j < d; ++j) dm[j] = lc.coeff[r] * din[d_prev + j];
            }
        }

        // relu gate on phi output
        for (std::size_t i = 0; i < dphi_out.size(); ++i)
            if (lc.phi_pre.data()[i] <= 0.0) dphi_out.data()[i] = 0.0;

        auto phi_back = mlp_backward(params.phi[k - 1], lc.phi_cache, dphi_out);
        auto& pg = grads.phi[k - 1];
        for (std::size_t i = 0; i < pg.w1.size(); ++i)
            pg.w1.data()[i] += phi_back.grads.w1.data()[i];
        for (std::size_t i = 0; i < pg.b1.size(); ++i) pg.b1[i] += phi_back.grads.b1[i];
        for (std::size_t i = 0; i < pg.w2.size(); ++i)
            pg.w2.data()[i] += phi_back.grads.w2.data()[i];
        for (std::size_t i = 0; i < pg.b2.size(); ++i) pg.b2[i] += phi_back.grads.b2[i];

        for (std::size_t r = 0; r < lc.row_src.size(); ++r) {
            const double* din = phi_back.dx.row(r);
            double* dprev = dz[k - 1].row(pos_prev.at(lc.row_src[r]));
            for (std::size_t j = 0; j < d_prev; ++j) dprev[j] += din[j];
        }
    }
    return grads;
}

void warm_history(const Graph& graph, const ModelParams& params, const ModelConfig& cfg,
                  HistoryCache& history) {
    const std::size_t d = cfg.embed_dim;
    history.reset(cfg.layers, graph.num_edges(), graph.num_nodes(), d);
    if (cfg.layers == 0) return;

    std::vector<NodeId> all(graph.num_nodes());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<NodeId>(i);
    SamplerConfig full{.batch_size = all.size(), .sample_size = 0, .mode = SampleMode::Full};
    auto frontier = build_frontiers(graph, all, cfg.layers, full);
    auto fwd = forward_exact(graph, frontier, params, cfg);

    const std::size_t p = cfg.use_edge_features ? graph.edges().feature_dim() : 0;
    for (std::size_t k = 1; k <= cfg.layers; ++k) {
        const Matrix& z_prev = fwd.z[k - 1];
        const std::size_t d_prev = z_prev.cols();
        Matrix x(graph.num_edges(), d_prev + p);
        for (std::size_t e = 0; e < graph.num_edges(); ++e) {
            const NodeId u = graph.edges().edges[e].first;
            double* row = x.row(e);
            std::copy_n(z_prev.row(fwd.pos[k - 1].at(u)), d_prev, row);
            if (p > 0) std::copy_n(graph.edges().features.row(e), p, row + d_prev);
        }
        auto out = mlp_forward(params.phi[k - 1], x);
        Matrix& h = history.edge_hist[k - 1];
        Matrix& sums = history.node_sums[k - 1];
        for (std::size_t e = 0; e < graph.num_edges(); ++e) {
            const NodeId v = graph.edges().edges[e].second;
            double* hr = h.row(e);
            double* sr = sums.row(v);
            const double* yr = out.output.row(e);
            for (std::size_t j = 0; j < d; ++j) {
                hr[j] = std::max(0.0, yr[j]);
                sr[j] += hr[j];
            }
        }
    }
}

Vector aggregate_for_node(const Graph& graph, const ModelParams& params, const ModelConfig& cfg,
                          NodeId v, std::span<const std::pair<NodeId, EdgeId>> subset,
                          const Matrix& z0_all, const HistoryCache* history) {
    const std::size_t d = cfg.embed_dim;
    const std::size_t p = cfg.use_edge_features ? graph.edges().feature_dim() : 0;
    Vector agg(d, 0.0);
    if (graph.in_degree(v) == 0) return agg;
    const double n_samp = static_cast<double>(subset.size());
    const double full_deg = static_cast<double>(graph.in_degree(v));
    const double scale = (cfg.aggregator == Aggregator::Sum) ? full_deg / std::max(1.0, n_samp)
                                                             : 1.0 / std::max(1.0, n_samp);
    for (const auto& [u, e] : subset) {
        Vector ein(p);
        if (p > 0) std::copy_n(graph.edges().features.row(e), p, ein.begin());
        Vector msg = phi_message(z0_all.row_span(u), ein, params.phi[0]);
        if (history) {
            const double* h = history->edge_hist[0].row(e);
            for (std::size_t j = 0; j < d; ++j) agg[j] += scale * (msg[j] - h[j]);
        } else {
            for (std::size_t j = 0; j < d; ++j) agg[j] += scale * msg[j];
        }
    }
    if (history) {
        const double full_scale = (cfg.aggregator == Aggregator::Sum) ? 1.0 : 1.0 / full_deg;
        const double* sum = history->node_sums[0].row(v);
        for (std::size_t j = 0; j < d; ++j) agg[j] += full_scale * sum[j];
    }
    return agg;
}

}  // namespace edgeprop
