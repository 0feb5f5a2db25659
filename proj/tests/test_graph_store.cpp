#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>

#include "edgeprop/graph.hpp"
#include "edgeprop/graph_io.hpp"
#include "edgeprop/rng.hpp"
#include "support.hpp"

using namespace edgeprop;
namespace fs = std::filesystem;

namespace {

NodeTable simple_nodes(std::size_t n, std::size_t f = 1, std::size_t classes = 2) {
    NodeTable nodes;
    nodes.count = n;
    nodes.num_classes = classes;
    nodes.features = Matrix(n, f);
    nodes.labels.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i)
        nodes.labels[i] = static_cast<std::int32_t>(i % classes);
    return nodes;
}

fs::path temp_dir() {
    auto dir = fs::temp_directory_path() / "edgeprop_graph_test";
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("collapse: two transactions on one pair") {
    std::vector<TransactionRecord> recs{{0, 1, 1, 2.0}, {0, 1, 3, 4.0}};
    EdgeTable et = collapse_multiedges(recs, 2, 0, 0.0);
    REQUIRE(et.size() == 1);
    CHECK(et.edges[0] == std::pair<NodeId, NodeId>{0, 1});
    const double expect[8] = {2, 6, 3, 1, 2, 4, 2, 0};
    for (std::size_t j = 0; j < 8; ++j) CHECK(et.features(0, j) == doctest::Approx(expect[j]));
}

TEST_CASE("collapse: count threshold removes sparse pairs") {
    std::vector<TransactionRecord> recs{{0, 1, 1, 2.0}};
    EdgeTable et = collapse_multiedges(recs, 2, 3, 0.0);
    CHECK(et.size() == 0);
}

TEST_CASE("collapse matches an independent per-pair streaming oracle") {
    auto rng = keyed_rng(7ull);
    std::uniform_int_distribution<NodeId> node(0, 4);  // 20 ordered pairs possible
    std::uniform_int_distribution<std::uint64_t> ts(0, 100000);
    std::uniform_real_distribution<double> val(0.0, 50.0);
    std::vector<TransactionRecord> recs;
    for (int i = 0; i < 500; ++i) {
        NodeId s = node(rng), d = node(rng);
        if (s == d) d = (d + 1) % 5;
        recs.push_back({s, d, ts(rng), val(rng)});
    }
    EdgeTable et = collapse_multiedges(recs, 5, 0, 0.0);

    std::map<std::pair<NodeId, NodeId>, std::vector<std::pair<std::uint64_t, double>>> groups;
    for (const auto& r : recs) groups[{r.src, r.dst}].emplace_back(r.timestamp, r.value);
    REQUIRE(et.size() == groups.size());
    for (std::size_t i = 0; i < et.size(); ++i) {
        auto& g = groups.at(et.edges[i]);
        std::vector<double> values;
        std::vector<std::uint64_t> times;
        for (auto [t, v] : g) {
            times.push_back(t);
            values.push_back(v);
        }
        std::sort(times.begin(), times.end());
        const double n = static_cast<double>(values.size());
        double total = 0.0, mn = values[0], mx = values[0];
        for (double v : values) {
            total += v;
            mn = std::min(mn, v);
            mx = std::max(mx, v);
        }
        const double mean = total / n;
        double var = 0.0;
        for (double v : values) var += (v - mean) * (v - mean);
        var /= n;
        double ia_mean = 0.0, ia_var = 0.0;
        if (times.size() > 1) {
            std::vector<double> gaps;
            for (std::size_t k = 1; k < times.size(); ++k)
                gaps.push_back(static_cast<double>(times[k] - times[k - 1]));
            for (double gp : gaps) ia_mean += gp;
            ia_mean /= static_cast<double>(gaps.size());
            for (double gp : gaps) ia_var += (gp - ia_mean) * (gp - ia_mean);
            ia_var /= static_cast<double>(gaps.size());
        }
        const double expect[8] = {n,  total, mean, std::sqrt(var),
                                  mn, mx,    ia_mean, std::sqrt(ia_var)};
        for (std::size_t j = 0; j < 8; ++j)
            CHECK(et.features(i, j) == doctest::Approx(expect[j]).epsilon(1e-9));
    }
}

TEST_CASE("collapse idempotence on single-transaction edges") {
    std::vector<TransactionRecord> recs{{0, 1, 5, 2.5}, {1, 2, 9, 3.5}, {2, 0, 1, 1.0}};
    EdgeTable et = collapse_multiedges(recs, 3, 0, 0.0);
    REQUIRE(et.size() == 3);
    for (std::size_t i = 0; i < et.size(); ++i) {
        CHECK(et.features(i, 0) == 1.0);                     // count
        CHECK(et.features(i, 2) == et.features(i, 1));      // mean == total
        CHECK(et.features(i, 3) == 0.0);                     // std
        CHECK(et.features(i, 6) == 0.0);                     // inter-arrival mean
        CHECK(et.features(i, 7) == 0.0);
    }
}

TEST_CASE("collapse rejections carry the record index") {
    std::vector<TransactionRecord> bad_value{{0, 1, 1, 1.0}, {0, 1, 2, -1.0}};
    CHECK_THROWS_WITH_AS(collapse_multiedges(bad_value, 2, 0, 0.0),
                         doctest::Contains("record 1"), DataError);
    std::vector<TransactionRecord> bad_node{{0, 5, 1, 1.0}};
    CHECK_THROWS_AS(collapse_multiedges(bad_node, 2, 0, 0.0), DataError);
    CHECK_THROWS_AS(collapse_multiedges({}, 2, 0, 0.0), DataError);
}

TEST_CASE("augment: one-directional edge gets a zero-padded mirror") {
    EdgeTable et;
    et.edges = {{0, 1}};
    et.features = Matrix(1, 2);
    et.features(0, 0) = 3.0;
    et.features(0, 1) = 4.0;
    EdgeTable aug = augment_edges(et);
    REQUIRE(aug.size() == 2);
    CHECK(aug.feature_dim() == 4);
    std::size_t fwd = aug.edges[0] == std::pair<NodeId, NodeId>{0, 1} ? 0 : 1;
    std::size_t rev = 1 - fwd;
    CHECK(aug.edges[rev] == std::pair<NodeId, NodeId>{1, 0});
    CHECK(aug.features(fwd, 0) == 3.0);
    CHECK(aug.features(fwd, 1) == 4.0);
    CHECK(aug.features(fwd, 2) == 0.0);
    CHECK(aug.features(fwd, 3) == 0.0);
    CHECK(aug.features(rev, 0) == 0.0);
    CHECK(aug.features(rev, 1) == 0.0);
    CHECK(aug.features(rev, 2) == 3.0);
    CHECK(aug.features(rev, 3) == 4.0);
}

TEST_CASE("augment: bidirectional pair concatenates both directions") {
    EdgeTable et;
    et.edges = {{0, 1}, {1, 0}};
    et.features = Matrix(2, 1);
    et.features(0, 0) = 7.0;   // e_AB
    et.features(1, 0) = -2.0;  // e_BA
    EdgeTable aug = augment_edges(et);
    REQUIRE(aug.size() == 2);
    for (std::size_t i = 0; i < 2; ++i) {
        if (aug.edges[i] == std::pair<NodeId, NodeId>{0, 1}) {
            CHECK(aug.features(i, 0) == 7.0);
            CHECK(aug.features(i, 1) == -2.0);
        } else {
            CHECK(aug.features(i, 0) == -2.0);
            CHECK(aug.features(i, 1) == 7.0);
        }
    }
}

TEST_CASE("augment properties on random inputs") {
    testsupport::RandomGraphSpec spec;
    spec.seed = 99;
    spec.max_nodes = 15;
    Graph base = testsupport::random_graph(spec);
    const EdgeTable& et = base.edges();
    EdgeTable aug = augment_edges(et);

    std::set<std::pair<NodeId, NodeId>> unordered;
    for (auto [s, d] : et.edges) unordered.insert({std::min(s, d), std::max(s, d)});
    CHECK(aug.size() == 2 * unordered.size());

    // involution consistency: first/last P columns recover the originals
    std::map<std::pair<NodeId, NodeId>, std::size_t> orig;
    for (std::size_t i = 0; i < et.size(); ++i) orig[et.edges[i]] = i;
    const std::size_t P = et.feature_dim();
    for (std::size_t i = 0; i < aug.size(); ++i) {
        auto [s, d] = aug.edges[i];
        auto it = orig.find({s, d});
        if (it != orig.end())
            for (std::size_t j = 0; j < P; ++j)
                CHECK(aug.features(i, j) == et.features(it->second, j));
        auto rit = orig.find({d, s});
        if (rit != orig.end())
            for (std::size_t j = 0; j < P; ++j)
                CHECK(aug.features(i, P + j) == et.features(rit->second, j));
    }

    // every node sees both directions afterwards
    Graph g = build_graph(simple_nodes(base.num_nodes()), aug);
    for (NodeId v = 0; v < g.num_nodes(); ++v) CHECK(g.in_degree(v) == g.out_degree(v));
}

TEST_CASE("build_graph: path adjacency") {
    EdgeTable et;
    et.edges = {{0, 1}, {1, 2}};
    et.features = Matrix(2, 1);
    Graph g = build_graph(simple_nodes(3), et);
    CHECK(g.in_neighbors(0).empty());
    REQUIRE(g.in_neighbors(1).size() == 1);
    CHECK(g.in_neighbors(1)[0].first == 0);
    REQUIRE(g.in_neighbors(2).size() == 1);
    CHECK(g.in_neighbors(2)[0].first == 1);
}

TEST_CASE("build_graph: empty edge list") {
    EdgeTable et;
    et.features = Matrix(0, 1);
    Graph g = build_graph(simple_nodes(4), et);
    std::size_t total = 0;
    for (NodeId v = 0; v < 4; ++v) total += g.in_degree(v);
    CHECK(total == 0);
}

TEST_CASE("build_graph: degree sums and adjacency round-trip") {
    testsupport::RandomGraphSpec spec;
    spec.seed = 3;
    spec.max_nodes = 20;
    Graph g = testsupport::random_graph(spec);
    std::size_t in_total = 0, out_total = 0;
    std::set<std::tuple<NodeId, NodeId, EdgeId>> seen;
    for (NodeId v = 0; v < g.num_nodes(); ++v) {
        in_total += g.in_degree(v);
        out_total += g.out_degree(v);
        NodeId prev = 0;
        bool first = true;
        for (auto [u, e] : g.in_neighbors(v)) {
            CHECK(g.edges().edges[e] == std::pair<NodeId, NodeId>{u, v});
            if (!first) CHECK(prev <= u);  // sorted neighbor lists
            prev = u;
            first = false;
            seen.insert({u, v, e});
        }
        // in/out indexes are inverses
        for (auto [w, e] : g.out_neighbors(v))
            CHECK(g.edges().edges[e] == std::pair<NodeId, NodeId>{v, w});
    }
    CHECK(in_total == g.num_edges());
    CHECK(out_total == g.num_edges());
    CHECK(seen.size() == g.num_edges());
}

TEST_CASE("build_graph: out-of-range endpoint names the edge row") {
    EdgeTable et;
    et.edges = {{0, 1}, {1, 9}};
    et.features = Matrix(2, 1);
    CHECK_THROWS_WITH_AS(build_graph(simple_nodes(3), et), doctest::Contains("row 1"),
                         DataError);
}

TEST_CASE("split_labels: balanced 100-node case") {
    NodeTable nodes = simple_nodes(100);
    DatasetSplit sp = split_labels(nodes, 42);
    CHECK(sp.train.size() == 70);
    CHECK(sp.validation.size() == 10);
    CHECK(sp.test.size() == 20);
    auto class_count = [&](const std::vector<NodeId>& ids, std::int32_t c) {
        std::size_t n = 0;
        for (NodeId v : ids) n += nodes.labels[v] == c;
        return n;
    };
    for (std::int32_t c : {0, 1}) {
        CHECK(class_count(sp.train, c) == 35);
        CHECK(class_count(sp.validation, c) == 5);
        CHECK(class_count(sp.test, c) == 10);
    }
}

TEST_CASE("split_labels: deterministic and seed-sensitive") {
    NodeTable nodes = simple_nodes(1000);
    DatasetSplit a = split_labels(nodes, 5);
    DatasetSplit b = split_labels(nodes, 5);
    CHECK(a.train == b.train);
    CHECK(a.validation == b.validation);
    CHECK(a.test == b.test);
    DatasetSplit c = split_labels(nodes, 6);
    CHECK(a.train != c.train);
}

TEST_CASE("split_labels: disjoint cover of the labeled set") {
    NodeTable nodes = simple_nodes(97, 1, 3);
    nodes.labels[0] = kUnlabeled;
    DatasetSplit sp = split_labels(nodes, 1);
    std::set<NodeId> all;
    for (const auto* part : {&sp.train, &sp.validation, &sp.test})
        for (NodeId v : *part) CHECK(all.insert(v).second);
    std::set<NodeId> labeled;
    for (NodeId v = 0; v < nodes.count; ++v)
        if (nodes.labels[v] != kUnlabeled) labeled.insert(v);
    CHECK(all == labeled);
}

TEST_CASE("split_labels: deficient class is reported") {
    NodeTable nodes = simple_nodes(12);
    for (std::size_t i = 0; i < 12; ++i) nodes.labels[i] = i < 11 ? 0 : 1;
    CHECK_THROWS_WITH_AS(split_labels(nodes, 0), doctest::Contains("class 1"), DataError);
}

TEST_CASE("csv round-trips") {
    auto dir = temp_dir();
    testsupport::RandomGraphSpec spec;
    spec.seed = 12;
    Graph g = testsupport::random_graph(spec);

    auto nodes_path = (dir / "nodes.csv").string();
    save_nodes_csv(nodes_path, g.nodes());
    NodeTable nodes = load_nodes_csv(nodes_path);
    CHECK(nodes.count == g.num_nodes());
    CHECK(nodes.labels == g.nodes().labels);
    CHECK(nodes.features.data() == g.nodes().features.data());

    auto edges_path = (dir / "edges.csv").string();
    save_edges_csv(edges_path, g.edges());
    EdgeTable edges = load_edges_csv(edges_path);
    CHECK(edges.edges == g.edges().edges);
    CHECK(edges.features.data() == g.edges().features.data());

    std::vector<TransactionRecord> recs{{0, 1, 10, 2.5}, {1, 2, 20, 0.25}};
    auto tx_path = (dir / "transactions.csv").string();
    save_transactions_csv(tx_path, recs);
    auto loaded = load_transactions_csv(tx_path);
    REQUIRE(loaded.size() == 2);
    CHECK(loaded[1].timestamp == 20);
    CHECK(loaded[1].value == 0.25);
}

TEST_CASE("corrupt csv reports the line number") {
    auto dir = temp_dir();
    auto path = (dir / "bad.csv").string();
    std::ofstream f(path);
    f << "src,dst,timestamp,value\n0,1,5,1.0\n0,oops,5,1.0\n";
    f.close();
    CHECK_THROWS_WITH_AS(load_transactions_csv(path), doctest::Contains(":3"), DataError);
}

TEST_CASE("binary graph cache round-trip and corruption detection") {
    auto dir = temp_dir();
    testsupport::RandomGraphSpec spec;
    spec.seed = 77;
    spec.augment = true;
    Graph g = testsupport::random_graph(spec);
    auto path = (dir / "graph.bin").string();
    save_graph_cache(path, g);
    Graph h = load_graph_cache(path);
    CHECK(h.num_nodes() == g.num_nodes());
    CHECK(h.edges().edges == g.edges().edges);
    CHECK(h.nodes().features.data() == g.nodes().features.data());
    CHECK(h.edges().features.data() == g.edges().features.data());
    CHECK(h.nodes().labels == g.nodes().labels);

    auto bad = (dir / "bad.bin").string();
    std::ofstream f(bad, std::ios::binary);
    f << "NOTMAGIC rest";
    f.close();
    CHECK_THROWS_AS(load_graph_cache(bad), DataError);

    // truncation
    std::ifstream in(path, std::ios::binary);
    std::string blob((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    in.close();
    std::ofstream tr((dir / "trunc.bin").string(), std::ios::binary);
    tr.write(blob.data(), static_cast<std::streamsize>(blob.size() / 2));
    tr.close();
    CHECK_THROWS_AS(load_graph_cache((dir / "trunc.bin").string()), DataError);
}
