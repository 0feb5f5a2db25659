// Microbenchmarks for the hot paths: frontier construction, the three forward
// variants, backward, and a full training epoch.

#include <benchmark/benchmark.h>

#include "edgeprop/pipeline.hpp"
#include "edgeprop/synth.hpp"
#include "edgeprop/trainer.hpp"

using namespace edgeprop;

namespace {

struct Fixture {
    PreparedData data;
    ModelConfig mcfg;
    ModelParams params;

    explicit Fixture(std::size_t nodes) {
        SynthConfig sc;
        sc.num_nodes = nodes;
        sc.seed = 42;
        SynthData sd = generate(sc);
        IngestOptions opt;
        data = prepare(std::move(sd.nodes), sd.records, opt, 42);
        mcfg.layers = 1;
        mcfg.embed_dim = 32;
        mcfg.num_classes = 2;
        params = init_params(mcfg, data.graph.nodes().feature_dim(),
                             data.graph.edges().feature_dim(), 42);
    }
};

Fixture& fixture(std::size_t nodes) {
    static std::map<std::size_t, Fixture> cache;
    auto it = cache.find(nodes);
    if (it == cache.end()) it = cache.emplace(nodes, Fixture(nodes)).first;
    return it->second;
}

std::vector<NodeId> first_batch(const Fixture& fx, std::size_t batch_size) {
    SamplerConfig scfg{.batch_size = batch_size, .sample_size = 10, .mode = SampleMode::Uniform,
                       .seed = 1};
    return batch_iterator(fx.data.split.train, scfg, 0).front();
}

void bm_frontier(benchmark::State& state) {
    Fixture& fx = fixture(static_cast<std::size_t>(state.range(0)));
    auto batch = first_batch(fx, 32);
    SamplerConfig scfg{.batch_size = 32, .sample_size = 10, .mode = SampleMode::Uniform, .seed = 1};
    std::uint64_t rep = 0;
    for (auto _ : state) {
        scfg.seed = ++rep;
        benchmark::DoNotOptimize(build_frontiers(fx.data.graph, batch, fx.mcfg.layers, scfg));
    }
}
BENCHMARK(bm_frontier)->Arg(1000)->Arg(10000);

void bm_forward_plain(benchmark::State& state) {
    Fixture& fx = fixture(static_cast<std::size_t>(state.range(0)));
    auto batch = first_batch(fx, 32);
    SamplerConfig scfg{.batch_size = 32, .sample_size = 10, .mode = SampleMode::Uniform, .seed = 1};
    Frontier fr = build_frontiers(fx.data.graph, batch, fx.mcfg.layers, scfg);
    for (auto _ : state)
        benchmark::DoNotOptimize(forward_plain(fx.data.graph, fr, fx.params, fx.mcfg));
}
BENCHMARK(bm_forward_plain)->Arg(1000)->Arg(10000);

void bm_forward_cv(benchmark::State& state) {
    Fixture& fx = fixture(static_cast<std::size_t>(state.range(0)));
    auto batch = first_batch(fx, 32);
    SamplerConfig scfg{.batch_size = 32, .sample_size = 10, .mode = SampleMode::Uniform, .seed = 1};
    Frontier fr = build_frontiers(fx.data.graph, batch, fx.mcfg.layers, scfg);
    HistoryCache hist;
    warm_history(fx.data.graph, fx.params, fx.mcfg, hist);
    for (auto _ : state)
        benchmark::DoNotOptimize(forward_cv(fx.data.graph, fr, fx.params, fx.mcfg, hist, false));
}
BENCHMARK(bm_forward_cv)->Arg(1000)->Arg(10000);

void bm_forward_exact_full(benchmark::State& state) {
    Fixture& fx = fixture(static_cast<std::size_t>(state.range(0)));
    std::vector<NodeId> all(fx.data.graph.num_nodes());
    std::iota(all.begin(), all.end(), 0u);
    SamplerConfig scfg{.batch_size = all.size(), .sample_size = 0, .mode = SampleMode::Full,
                       .seed = 0};
    Frontier fr = build_frontiers(fx.data.graph, all, fx.mcfg.layers, scfg);
    for (auto _ : state)
        benchmark::DoNotOptimize(forward_exact(fx.data.graph, fr, fx.params, fx.mcfg));
}
BENCHMARK(bm_forward_exact_full)->Arg(1000)->Arg(10000);

void bm_backward(benchmark::State& state) {
    Fixture& fx = fixture(static_cast<std::size_t>(state.range(0)));
    auto batch = first_batch(fx, 32);
    SamplerConfig scfg{.batch_size = 32, .sample_size = 10, .mode = SampleMode::Uniform, .seed = 1};
    Frontier fr = build_frontiers(fx.data.graph, batch, fx.mcfg.layers, scfg);
    auto fwd = forward_plain(fx.data.graph, fr, fx.params, fx.mcfg);
    std::vector<std::int32_t> labels;
    for (NodeId v : fr.layers[fx.mcfg.layers]) labels.push_back(fx.data.graph.nodes().labels[v]);
    auto bl = minibatch_loss(fwd.logits, labels);
    for (auto _ : state)
        benchmark::DoNotOptimize(
            backward(fx.data.graph, fr, fx.params, fx.mcfg, fwd, bl.dlogits));
}
BENCHMARK(bm_backward)->Arg(1000)->Arg(10000);

void bm_train_epoch(benchmark::State& state) {
    Fixture& fx = fixture(static_cast<std::size_t>(state.range(0)));
    TrainConfig cfg;
    cfg.lr = 1e-3;
    cfg.batch_size = 32;
    cfg.sample_size = 10;
    cfg.max_epochs = 1;
    cfg.model = fx.mcfg;
    for (auto _ : state) benchmark::DoNotOptimize(train(fx.data.graph, fx.data.split, cfg));
}
BENCHMARK(bm_train_epoch)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
