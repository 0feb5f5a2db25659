#include "edgeprop/runconfig.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "edgeprop/errors.hpp"

namespace edgeprop {

namespace {

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt_prior(const std::vector<double>& prior) {
    std::string out;
    for (std::size_t i = 0; i < prior.size(); ++i) {
        if (i) out += ";";
        out += fmt_double(prior[i]);
    }
    return out;
}

std::vector<double> parse_prior(const std::string& s) {
    std::vector<double> out;
    std::istringstream is(s);
    std::string tok;
    while (std::getline(is, tok, ';'))
        if (!tok.empty()) out.push_back(std::stod(tok));
    return out;
}

struct KvReader {
    const std::map<std::string, std::string>& kv;

    std::string str(const std::string& k, const std::string& dflt) const {
        auto it = kv.find(k);
        return it == kv.end() ? dflt : it->second;
    }
    double real(const std::string& k, double dflt) const {
        auto it = kv.find(k);
        if (it == kv.end()) return dflt;
        try {
            return std::stod(it->second);
        } catch (const std::exception&) {
            throw ConfigError("config: bad numeric value for " + k + ": " + it->second);
        }
    }
    std::uint64_t integer(const std::string& k, std::uint64_t dflt) const {
        auto it = kv.find(k);
        if (it == kv.end()) return dflt;
        try {
            return std::stoull(it->second);
        } catch (const std::exception&) {
            throw ConfigError("config: bad integer value for " + k + ": " + it->second);
        }
    }
    bool flag(const std::string& k, bool dflt) const {
        auto it = kv.find(k);
        if (it == kv.end()) return dflt;
        if (it->second == "1" || it->second == "true") return true;
        if (it->second == "0" || it->second == "false") return false;
        throw ConfigError("config: bad boolean value for " + k + ": " + it->second);
    }
};

const char* kKnownKeys[] = {
    "aggregator",      "augment",          "batch_size",        "burstiness",
    "class_prior",     "classes",          "cv",                "data_dir",
    "data_seed",       "drop_isolated",    "edge_log_mean_base","edge_log_mean_signal",
    "edge_log_std",    "embed_dim",        "eval_every",        "layers",
    "lr",              "max_epochs",       "min_count",         "min_total_value",
    "n",               "node_feature_dim", "node_signal",       "out_degree_mean",
    "out_dir",         "patience",         "sample_mode",       "sample_size",
    "split_seed",      "standardize",      "time_window",       "train_seed",
    "tx_per_edge_mean","use_edge_features","use_node_features",
};

}  // namespace

RunConfig RunConfig::defaults() { return RunConfig{}; }

RunConfig RunConfig::parse(const std::map<std::string, std::string>& kv) {
    for (const auto& [k, v] : kv) {
        bool known = false;
        for (const char* kk : kKnownKeys)
            if (k == kk) {
                known = true;
                break;
            }
        if (!known) throw ConfigError("config: unknown key '" + k + "'");
    }
    KvReader r{kv};
    RunConfig c;
    // synth
    c.synth.num_nodes = r.integer("n", c.synth.num_nodes);
    c.synth.num_classes = r.integer("classes", c.synth.num_classes);
    if (kv.count("class_prior")) c.synth.class_prior = parse_prior(kv.at("class_prior"));
    c.synth.out_degree_mean = r.real("out_degree_mean", c.synth.out_degree_mean);
    c.synth.tx_per_edge_mean = r.real("tx_per_edge_mean", c.synth.tx_per_edge_mean);
    c.synth.node_signal = r.real("node_signal", c.synth.node_signal);
    c.synth.edge_log_mean_base = r.real("edge_log_mean_base", c.synth.edge_log_mean_base);
    c.synth.edge_log_mean_signal = r.real("edge_log_mean_signal", c.synth.edge_log_mean_signal);
    c.synth.edge_log_std = r.real("edge_log_std", c.synth.edge_log_std);
    c.synth.burstiness = r.real("burstiness", c.synth.burstiness);
    c.synth.time_window = r.real("time_window", c.synth.time_window);
    c.synth.node_feature_dim = r.integer("node_feature_dim", c.synth.node_feature_dim);
    c.synth.seed = r.integer("data_seed", c.synth.seed);
    // ingest
    c.ingest.min_count = r.integer("min_count", c.ingest.min_count);
    c.ingest.min_total_value = r.real("min_total_value", c.ingest.min_total_value);
    c.ingest.drop_isolated = r.flag("drop_isolated", c.ingest.drop_isolated);
    c.ingest.standardize = r.flag("standardize", c.ingest.standardize);
    c.ingest.augment = r.flag("augment", c.ingest.augment);
    // model
    c.train.model.layers = r.integer("layers", c.train.model.layers);
    c.train.model.embed_dim = r.integer("embed_dim", c.train.model.embed_dim);
    const std::string agg = r.str("aggregator", "mean");
    if (agg == "sum")
        c.train.model.aggregator = Aggregator::Sum;
    else if (agg == "mean")
        c.train.model.aggregator = Aggregator::Mean;
    else
        throw ConfigError("config: aggregator must be sum or mean");
    c.train.model.use_node_features = r.flag("use_node_features", true);
    c.train.model.use_edge_features = r.flag("use_edge_features", true);
    c.train.model.augmented = c.ingest.augment;
    c.train.model.cv_enabled = r.flag("cv", true);
    c.train.model.num_classes = c.synth.num_classes;
    // train
    c.train.lr = r.real("lr", c.train.lr);
    c.train.batch_size = r.integer("batch_size", c.train.batch_size);
    c.train.sample_size = r.integer("sample_size", c.train.sample_size);
    c.train.patience = r.integer("patience", c.train.patience);
    c.train.max_epochs = r.integer("max_epochs", c.train.max_epochs);
    c.train.eval_every = r.integer("eval_every", c.train.eval_every);
    c.train.seed = r.integer("train_seed", c.train.seed);
    c.train.split_seed = r.integer("split_seed", c.train.split_seed);
    const std::string mode = r.str("sample_mode", "uniform");
    if (mode == "full")
        c.train.sample_mode = SampleMode::Full;
    else if (mode == "uniform")
        c.train.sample_mode = SampleMode::Uniform;
    else
        throw ConfigError("config: sample_mode must be uniform or full");
    // paths
    c.data_dir = r.str("data_dir", c.data_dir);
    c.out_dir = r.str("out_dir", c.out_dir);

    if (c.train.batch_size < 1 || c.train.sample_size < 1 || c.train.patience < 1 ||
        c.train.eval_every < 1 || c.train.lr <= 0.0)
        throw ConfigError("config: train parameters must be positive");
    return c;
}

RunConfig RunConfig::load(const std::string& path,
                          const std::map<std::string, std::string>& overrides) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(f, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ":" + std::to_string(line_no) + ": expected key=value");
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    for (const auto& [k, v] : overrides) kv[k] = v;
    return parse(kv);
}

std::string RunConfig::canonical_text() const {
    std::map<std::string, std::string> kv;
    kv["aggregator"] = train.model.aggregator == Aggregator::Sum ? "sum" : "mean";
    kv["augment"] = ingest.augment ? "1" : "0";
    kv["batch_size"] = std::to_string(train.batch_size);
    kv["burstiness"] = fmt_double(synth.burstiness);
    kv["class_prior"] = fmt_prior(synth.class_prior);
    kv["classes"] = std::to_string(synth.num_classes);
    kv["cv"] = train.model.cv_enabled ? "1" : "0";
    kv["data_dir"] = data_dir;
    kv["data_seed"] = std::to_string(synth.seed);
    kv["drop_isolated"] = ingest.drop_isolated ? "1" : "0";
    kv["edge_log_mean_base"] = fmt_double(synth.edge_log_mean_base);
    kv["edge_log_mean_signal"] = fmt_double(synth.edge_log_mean_signal);
    kv["edge_log_std"] = fmt_double(synth.edge_log_std);
    kv["embed_dim"] = std::to_string(train.model.embed_dim);
    kv["eval_every"] = std::to_string(train.eval_every);
    kv["layers"] = std::to_string(train.model.layers);
    kv["lr"] = fmt_double(train.lr);
    kv["max_epochs"] = std::to_string(train.max_epochs);
    kv["min_count"] = std::to_string(ingest.min_count);
    kv["min_total_value"] = fmt_double(ingest.min_total_value);
    kv["n"] = std::to_string(synth.num_nodes);
    kv["node_feature_dim"] = std::to_string(synth.node_feature_dim);
    kv["node_signal"] = fmt_double(synth.node_signal);
    kv["out_degree_mean"] = fmt_double(synth.out_degree_mean);
    kv["out_dir"] = out_dir;
    kv["patience"] = std::to_string(train.patience);
    kv["sample_mode"] = train.sample_mode == SampleMode::Full ? "full" : "uniform";
    kv["sample_size"] = std::to_string(train.sample_size);
    kv["split_seed"] = std::to_string(train.split_seed);
    kv["standardize"] = ingest.standardize ? "1" : "0";
    kv["time_window"] = fmt_double(synth.time_window);
    kv["train_seed"] = std::to_string(train.seed);
    kv["tx_per_edge_mean"] = fmt_double(synth.tx_per_edge_mean);
    kv["use_edge_features"] = train.model.use_edge_features ? "1" : "0";
    kv["use_node_features"] = train.model.use_node_features ? "1" : "0";

    std::string out;
    for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
    return out;
}

std::uint64_t RunConfig::config_hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : canonical_text()) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace edgeprop
