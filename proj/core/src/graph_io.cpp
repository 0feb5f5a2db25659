#include "edgeprop/graph_io.hpp"

#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

#include "edgeprop/errors.hpp"

namespace edgeprop {

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

double parse_double(const std::string& s, const std::string& path, std::size_t line_no) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw DataError(path + ":" + std::to_string(line_no) + ": bad numeric field '" + s + "'");
    }
}

std::uint64_t parse_u64(const std::string& s, const std::string& path, std::size_t line_no) {
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size())
        throw DataError(path + ":" + std::to_string(line_no) + ": bad integer field '" + s + "'");
    return v;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw DataError("cannot open " + path);
    return f;
}

std::ofstream open_out(const std::string& path, std::ios_base::openmode mode = std::ios::out) {
    std::ofstream f(path, mode);
    if (!f) throw DataError("cannot open " + path + " for writing");
    return f;
}

void write_u64(std::ostream& os, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    os.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t read_u64(std::istream& is, const std::string& path) {
    unsigned char b[8];
    if (!is.read(reinterpret_cast<char*>(b), 8)) throw DataError(path + ": truncated file");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

void write_f64s(std::ostream& os, const std::vector<double>& xs) {
    for (double x : xs) {
        std::uint64_t bits;
        std::memcpy(&bits, &x, 8);
        write_u64(os, bits);
    }
}

void read_f64s(std::istream& is, std::vector<double>& xs, const std::string& path) {
    for (double& x : xs) {
        std::uint64_t bits = read_u64(is, path);
        std::memcpy(&x, &bits, 8);
    }
}

}  // namespace

NodeTable load_nodes_csv(const std::string& path) {
    auto f = open_in(path);
    std::string line;
    if (!std::getline(f, line)) throw DataError(path + ": empty file");
    auto header = split_line(line);
    if (header.size() < 2 || header[0] != "id" || header[1] != "label")
        throw DataError(path + ":1: expected header id,label,f1..fF");
    const std::size_t feat_dim = header.size() - 2;

    std::vector<std::pair<std::uint64_t, std::size_t>> order;  // (id, row-in-file)
    std::vector<std::vector<double>> feats;
    std::vector<std::int32_t> labels;
    std::size_t line_no = 1;
    while (std::getline(f, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto fields = split_line(line);
        if (fields.size() != header.size())
            throw DataError(path + ":" + std::to_string(line_no) + ": expected " +
                            std::to_string(header.size()) + " fields, got " +
                            std::to_string(fields.size()));
        order.emplace_back(parse_u64(fields[0], path, line_no), feats.size());
        labels.push_back(fields[1].empty()
                             ? kUnlabeled
                             : static_cast<std::int32_t>(parse_u64(fields[1], path, line_no)));
        std::vector<double> row(feat_dim);
        for (std::size_t j = 0; j < feat_dim; ++j)
            row[j] = parse_double(fields[j + 2], path, line_no);
        feats.push_back(std::move(row));
    }

    NodeTable nodes;
    nodes.count = feats.size();
    nodes.features = Matrix(nodes.count, feat_dim);
    nodes.labels.assign(nodes.count, kUnlabeled);
    for (auto [id, row] : order) {
        if (id >= nodes.count)
            throw DataError(path + ": node id " + std::to_string(id) +
                            " outside contiguous range 0.." + std::to_string(nodes.count - 1));
        std::copy(feats[row].begin(), feats[row].end(), nodes.features.row(id));
        nodes.labels[id] = labels[row];
        if (labels[row] != kUnlabeled)
            nodes.num_classes =
                std::max(nodes.num_classes, static_cast<std::size_t>(labels[row]) + 1);
    }
    return nodes;
}

void save_nodes_csv(const std::string& path, const NodeTable& nodes) {
    auto f = open_out(path);
    f << "id,label";
    for (std::size_t j = 0; j < nodes.feature_dim(); ++j) f << ",f" << (j + 1);
    f << "\n";
    f.precision(17);
    for (std::size_t i = 0; i < nodes.count; ++i) {
        f << i << ",";
        if (nodes.labels[i] != kUnlabeled) f << nodes.labels[i];
        for (std::size_t j = 0; j < nodes.feature_dim(); ++j) f << "," << nodes.features(i, j);
        f << "\n";
    }
}

std::vector<TransactionRecord> load_transactions_csv(const std::string& path) {
    auto f = open_in(path);
    std::string line;
    if (!std::getline(f, line)) throw DataError(path + ": empty file");
    if (split_line(line) != std::vector<std::string>{"src", "dst", "timestamp", "value"})
        throw DataError(path + ":1: expected header src,dst,timestamp,value");
    std::vector<TransactionRecord> out;
    std::size_t line_no = 1;
    while (std::getline(f, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto fields = split_line(line);
        if (fields.size() != 4)
            throw DataError(path + ":" + std::to_string(line_no) + ": expected 4 fields");
        out.push_back({static_cast<NodeId>(parse_u64(fields[0], path, line_no)),
                       static_cast<NodeId>(parse_u64(fields[1], path, line_no)),
                       parse_u64(fields[2], path, line_no),
                       parse_double(fields[3], path, line_no)});
        if (out.back().value < 0.0)
            throw DataError(path + ":" + std::to_string(line_no) + ": negative value");
    }
    return out;
}

void save_transactions_csv(const std::string& path,
                           const std::vector<TransactionRecord>& records) {
    auto f = open_out(path);
    f << "src,dst,timestamp,value\n";
    f.precision(17);
    for (const auto& r : records)
        f << r.src << "," << r.dst << "," << r.timestamp << "," << r.value << "\n";
}

EdgeTable load_edges_csv(const std::string& path) {
    auto f = open_in(path);
    std::string line;
    if (!std::getline(f, line)) throw DataError(path + ": empty file");
    auto header = split_line(line);
    if (header.size() < 3 || header[0] != "src" || header[1] != "dst")
        throw DataError(path + ":1: expected header src,dst,e1..eP");
    const std::size_t p = header.size() - 2;
    EdgeTable out;
    std::vector<double> rows;
    std::size_t line_no = 1;
    while (std::getline(f, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto fields = split_line(line);
        if (fields.size() != header.size())
            throw DataError(path + ":" + std::to_string(line_no) + ": bad field count");
        out.edges.emplace_back(static_cast<NodeId>(parse_u64(fields[0], path, line_no)),
                               static_cast<NodeId>(parse_u64(fields[1], path, line_no)));
        for (std::size_t j = 0; j < p; ++j)
            rows.push_back(parse_double(fields[j + 2], path, line_no));
    }
    out.features = Matrix(out.edges.size(), p);
    std::copy(rows.begin(), rows.end(), out.features.data().begin());
    return out;
}

void save_edges_csv(const std::string& path, const EdgeTable& edges) {
    auto f = open_out(path);
    f << "src,dst";
    for (std::size_t j = 0; j < edges.feature_dim(); ++j) f << ",e" << (j + 1);
    f << "\n";
    f.precision(17);
    for (std::size_t i = 0; i < edges.size(); ++i) {
        f << edges.edges[i].first << "," << edges.edges[i].second;
        for (std::size_t j = 0; j < edges.feature_dim(); ++j) f << "," << edges.features(i, j);
        f << "\n";
    }
}

static constexpr char kGraphMagic[8] = {'E', 'P', 'G', 'R', 'A', 'P', 'H', '1'};

void save_graph_cache(const std::string& path, const Graph& g) {
    auto f = open_out(path, std::ios::binary);
    f.write(kGraphMagic, 8);
    write_u64(f, g.num_nodes());
    write_u64(f, g.num_edges());
    write_u64(f, g.nodes().feature_dim());
    write_u64(f, g.edges().feature_dim());
    write_u64(f, g.nodes().num_classes);
    write_f64s(f, g.nodes().features.data());
    write_f64s(f, g.edges().features.data());
    for (std::int32_t l : g.nodes().labels)
        write_u64(f, static_cast<std::uint64_t>(static_cast<std::int64_t>(l)));
    for (auto [s, d] : g.edges().edges) {
        write_u64(f, s);
        write_u64(f, d);
    }
}

Graph load_graph_cache(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot open " + path);
    char magic[8];
    if (!f.read(magic, 8) || std::memcmp(magic, kGraphMagic, 8) != 0)
        throw DataError(path + ": bad magic, not an EPGRAPH1 cache");
    NodeTable nodes;
    EdgeTable edges;
    nodes.count = read_u64(f, path);
    const std::uint64_t m = read_u64(f, path);
    const std::uint64_t fdim = read_u64(f, path);
    const std::uint64_t pdim = read_u64(f, path);
    nodes.num_classes = read_u64(f, path);
    nodes.features = Matrix(nodes.count, fdim);
    read_f64s(f, nodes.features.data(), path);
    edges.features = Matrix(m, pdim);
    read_f64s(f, edges.features.data(), path);
    nodes.labels.resize(nodes.count);
    for (auto& l : nodes.labels)
        l = static_cast<std::int32_t>(static_cast<std::int64_t>(read_u64(f, path)));
    edges.edges.resize(m);
    for (auto& [s, d] : edges.edges) {
        s = static_cast<NodeId>(read_u64(f, path));
        d = static_cast<NodeId>(read_u64(f, path));
    }
    return build_graph(std::move(nodes), std::move(edges));
}

}  // namespace edgeprop
