#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "edgeprop/errors.hpp"
#include "edgeprop/trainer.hpp"

namespace edgeprop {

namespace {

constexpr char kMagic[8] = {'E', 'P', 'C', 'K', 'P', 'T', '0', '1'};

void put_u64(std::string& buf, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>(v >> (8 * i)));
}

void put_f64(std::string& buf, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    put_u64(buf, bits);
}

void put_f64s(std::string& buf, const std::vector<double>& xs) {
    for (double x : xs) put_f64(buf, x);
}

struct Reader {
    const std::string& buf;
    std::size_t off = 0;
    std::uint64_t u64() {
        if (off + 8 > buf.size()) throw DataError("checkpoint: truncated section");
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i)
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[off + i])) << (8 * i);
        off += 8;
        return v;
    }
    double f64() {
        std::uint64_t bits = u64();
        double v;
        std::memcpy(&v, &bits, 8);
        return v;
    }
    std::string bytes(std::size_t n) {
        if (off + n > buf.size()) throw DataError("checkpoint: truncated section");
        std::string s = buf.substr(off, n);
        off += n;
        return s;
    }
};

void write_section(std::ostream& os, const std::string& name, const std::string& payload) {
    auto emit_u64 = [&os](std::uint64_t v) {
        char b[8];
        for (int i = 0; i < 8; ++i) b[i] = static_cast<char>(v >> (8 * i));
        os.write(b, 8);
    };
    emit_u64(name.size());
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    emit_u64(payload.size());
    os.write(payload.data(), static_cast<std::streamsize>(payload.size()));
}

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string traincfg_text(const TrainConfig& c) {
    std::ostringstream os;
    os << "batch_size=" << c.batch_size << "\n"
       << "eval_every=" << c.eval_every << "\n"
       << "lr=" << fmt_double(c.lr) << "\n"
       << "max_epochs=" << c.max_epochs << "\n"
       << "model.aggregator=" << (c.model.aggregator == Aggregator::Sum ? "sum" : "mean") << "\n"
       << "model.augmented=" << (c.model.augmented ? 1 : 0) << "\n"
       << "model.cv_enabled=" << (c.model.cv_enabled ? 1 : 0) << "\n"
       << "model.embed_dim=" << c.model.embed_dim << "\n"
       << "model.layers=" << c.model.layers << "\n"
       << "model.num_classes=" << c.model.num_classes << "\n"
       << "model.use_edge_features=" << (c.model.use_edge_features ? 1 : 0) << "\n"
       << "model.use_node_features=" << (c.model.use_node_features ? 1 : 0) << "\n"
       << "patience=" << c.patience << "\n"
       << "sample_mode=" << (c.sample_mode == SampleMode::Full ? "full" : "uniform") << "\n"
       << "sample_size=" << c.sample_size << "\n"
       << "seed=" << c.seed << "\n"
       << "split_seed=" << c.split_seed << "\n";
    return os.str();
}

TrainConfig parse_traincfg(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    auto req = [&kv](const std::string& k) {
        auto it = kv.find(k);
        if (it == kv.end()) throw DataError("checkpoint: missing config key " + k);
        return it->second;
    };
    TrainConfig c;
    c.batch_size = std::stoull(req("batch_size"));
    c.eval_every = std::stoull(req("eval_every"));
    c.lr = std::stod(req("lr"));
    c.max_epochs = std::stoull(req("max_epochs"));
    c.model.aggregator = req("model.aggregator") == "sum" ? Aggregator::Sum : Aggregator::Mean;
    c.model.augmented = req("model.augmented") == "1";
    c.model.cv_enabled = req("model.cv_enabled") == "1";
    c.model.embed_dim = std::stoull(req("model.embed_dim"));
    c.model.layers = std::stoull(req("model.layers"));
    c.model.num_classes = std::stoull(req("model.num_classes"));
    c.model.use_edge_features = req("model.use_edge_features") == "1";
    c.model.use_node_features = req("model.use_node_features") == "1";
    c.patience = std::stoull(req("patience"));
    c.sample_mode = req("sample_mode") == "full" ? SampleMode::Full : SampleMode::Uniform;
    c.sample_size = std::stoull(req("sample_size"));
    c.seed = std::stoull(req("seed"));
    c.split_seed = std::stoull(req("split_seed"));
    return c;
}

void put_tensor(std::string& buf, const std::string& name, const std::vector<std::uint64_t>& dims,
                const std::vector<double>& data) {
    put_u64(buf, name.size());
    buf += name;
    put_u64(buf, dims.size());
    for (auto d : dims) put_u64(buf, d);
    put_f64s(buf, data);
}

}  // namespace

void save_checkpoint(const std::string& path, const CheckpointRecord& r) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot open " + path + " for writing");
    f.write(kMagic, 8);

    write_section(f, "config", r.config_text);
    write_section(f, "traincfg", traincfg_text(r.cfg));

    std::string meta;
    put_u64(meta, r.epoch);
    put_u64(meta, r.evals_since_improve);
    put_f64(meta, r.best_val_acc);
    put_u64(meta, r.adam.step);
    put_u64(meta, r.node_feature_dim);
    put_u64(meta, r.edge_feature_dim);
    put_u64(meta, r.num_nodes);
    put_u64(meta, r.num_edges);
    write_section(f, "meta", meta);

    std::string rng;
    put_u64(rng, r.cfg.seed);
    put_u64(rng, r.cfg.split_seed);
    put_u64(rng, r.epoch);  // sampling streams are keyed by (seed, epoch, ...)
    write_section(f, "rng", rng);

    std::string tensors;
    std::uint64_t count = 4 + 2 * r.history.num_layers;
    put_u64(tensors, count);
    put_tensor(tensors, "params", {r.params.total_size()}, r.params.to_flat());
    put_tensor(tensors, "best_params", {r.best_params.total_size()}, r.best_params.to_flat());
    put_tensor(tensors, "adam_m", {r.adam.m.size()}, r.adam.m);
    put_tensor(tensors, "adam_v", {r.adam.v.size()}, r.adam.v);
    for (std::size_t k = 0; k < r.history.num_layers; ++k) {
        const Matrix& eh = r.history.edge_hist[k];
        const Matrix& ns = r.history.node_sums[k];
        put_tensor(tensors, "hist_edge_" + std::to_string(k), {eh.rows(), eh.cols()}, eh.data());
        put_tensor(tensors, "hist_sums_" + std::to_string(k), {ns.rows(), ns.cols()}, ns.data());
    }
    write_section(f, "tensors", tensors);
    if (!f) throw DataError("checkpoint: write failed for " + path);
}

CheckpointRecord load_checkpoint(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot open " + path);
    char magic[8];
    if (!f.read(magic, 8)) throw DataError(path + ": truncated file");
    if (std::memcmp(magic, kMagic, 8) != 0)
        throw DataError(path + ": bad magic, not an EPCKPT01 checkpoint");

    std::map<std::string, std::string> sections;
    while (true) {
        char lenb[8];
        if (!f.read(lenb, 8)) break;
        std::uint64_t name_len = 0;
        for (int i = 0; i < 8; ++i)
            name_len |= static_cast<std::uint64_t>(static_cast<unsigned char>(lenb[i])) << (8 * i);
        std::string name(name_len, '\0');
        if (!f.read(name.data(), static_cast<std::streamsize>(name_len)))
            throw DataError(path + ": truncated section name");
        if (!f.read(lenb, 8)) throw DataError(path + ": truncated section length");
        std::uint64_t payload_len = 0;
        for (int i = 0; i < 8; ++i)
            payload_len |=
                static_cast<std::uint64_t>(static_cast<unsigned char>(lenb[i])) << (8 * i);
        std::string payload(payload_len, '\0');
        if (!f.read(payload.data(), static_cast<std::streamsize>(payload_len)))
            throw DataError(path + ": truncated section payload");
        sections[name] = std::move(payload);
    }
    for (const char* required : {"config", "traincfg", "meta", "tensors"})
        if (!sections.count(required))
            throw DataError(path + ": missing checkpoint section " + required);

    CheckpointRecord r;
    r.config_text = sections["config"];
    r.cfg = parse_traincfg(sections["traincfg"]);

    Reader meta{sections["meta"]};
    r.epoch = meta.u64();
    r.evals_since_improve = meta.u64();
    r.best_val_acc = meta.f64();
    const std::uint64_t adam_step = meta.u64();
    r.node_feature_dim = meta.u64();
    r.edge_feature_dim = meta.u64();
    r.num_nodes = meta.u64();
    r.num_edges = meta.u64();

    Reader tr{sections["tensors"]};
    const std::uint64_t count = tr.u64();
    std::map<std::string, std::pair<std::vector<std::uint64_t>, std::vector<double>>> tensors;
    for (std::uint64_t t = 0; t < count; ++t) {
        std::string name = tr.bytes(tr.u64());
        std::vector<std::uint64_t> dims(tr.u64());
        std::uint64_t total = 1;
        for (auto& d : dims) {
            d = tr.u64();
            total *= d;
        }
        std::vector<double> data(total);
        for (auto& x : data) x = tr.f64();
        tensors[name] = {std::move(dims), std::move(data)};
    }
    auto tensor = [&tensors, &path](const std::string& name) -> auto& {
        auto it = tensors.find(name);
        if (it == tensors.end()) throw DataError(path + ": missing tensor " + name);
        return it->second;
    };

    ModelConfig mcfg = r.cfg.model;
    r.params = init_params(mcfg, r.node_feature_dim, r.edge_feature_dim, 0);
    r.params.from_flat(tensor("params").second);
    r.best_params = init_params(mcfg, r.node_feature_dim, r.edge_feature_dim, 0);
    r.best_params.from_flat(tensor("best_params").second);
    r.adam = AdamState(r.params.total_size());
    r.adam.step = adam_step;
    r.adam.m = tensor("adam_m").second;
    r.adam.v = tensor("adam_v").second;
    if (r.adam.m.size() != r.params.total_size() || r.adam.v.size() != r.params.total_size())
        throw DataError(path + ": optimizer state size mismatch");

    if (mcfg.cv_enabled && mcfg.layers > 0) {
        r.history.reset(mcfg.layers, r.num_edges, r.num_nodes, mcfg.embed_dim);
        for (std::size_t k = 0; k < mcfg.layers; ++k) {
            auto& eh = tensor("hist_edge_" + std::to_string(k));
            auto& ns = tensor("hist_sums_" + std::to_string(k));
            if (eh.second.size() != r.history.edge_hist[k].size() ||
                ns.second.size() != r.history.node_sums[k].size())
                throw DataError(path + ": history tensor shape mismatch");
            std::copy(eh.second.begin(), eh.second.end(),
                      r.history.edge_hist[k].data().begin());
            std::copy(ns.second.begin(), ns.second.end(),
                      r.history.node_sums[k].data().begin());
        }
    }
    return r;
}

}  // namespace edgeprop
