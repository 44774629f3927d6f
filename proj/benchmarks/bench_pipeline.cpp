#include <benchmark/benchmark.h>

#include <algorithm>
#include <filesystem>
#include <vector>

#include "pdwsim/dataset_io.hpp"
#include "pdwsim/eval.hpp"
#include "pdwsim/receiver.hpp"
#include "pdwsim/scenario.hpp"

using namespace pdwsim;

static std::vector<std::vector<TaggedPulse>> make_streams(std::size_t k, std::size_t per_stream) {
    Rng rng(Seed(1));
    std::vector<std::vector<TaggedPulse>> streams(k);
    for (std::size_t e = 0; e < k; ++e) {
        double t = rng.uniform(0, 100);
        for (std::size_t j = 0; j < per_stream; ++j) {
            t += rng.uniform(1, 200);
            TaggedPulse p;
            p.pdw = {t, 3000, 1, 0, -60};
            p.emitter_id = static_cast<EmitterId>(e);
            p.seq = j;
            streams[e].push_back(p);
        }
    }
    return streams;
}

static void BM_MergeStreams(benchmark::State& state) {
    const auto k = static_cast<std::size_t>(state.range(0));
    const auto streams = make_streams(k, 1'000'000 / k);
    for (auto _ : state) {
        auto train = merge_streams(streams);
        benchmark::DoNotOptimize(train.pulses.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(k * (1'000'000 / k)));
}
BENCHMARK(BM_MergeStreams)->Arg(2)->Arg(10)->Arg(100)->Unit(benchmark::kMillisecond);

static void BM_GenerateTrain(benchmark::State& state) {
    ScenarioConfig config;
    config.collection_us = 1e6;
    std::uint64_t seed = 0;
    std::int64_t pulses = 0;
    for (auto _ : state) {
        const auto train = generate_train(config, Split::train, seed++);
        pulses += static_cast<std::int64_t>(train.size());
    }
    state.SetItemsProcessed(pulses);
}
BENCHMARK(BM_GenerateTrain)->Unit(benchmark::kMillisecond);

static void BM_WriteTrain(benchmark::State& state) {
    ScenarioConfig config;
    const auto train = generate_train(config, Split::train, 5);
    const auto path = std::filesystem::temp_directory_path() / "pdwsim_bench_write.bin";
    for (auto _ : state) benchmark::DoNotOptimize(write_train(train, path));
    std::filesystem::remove(path);
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(train.size()));
    state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(kHeaderBytes + train.size() * record_bytes(true)));
}
BENCHMARK(BM_WriteTrain)->Unit(benchmark::kMillisecond);

static void BM_VMeasure(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    Rng rng(Seed(2));
    std::vector<std::uint32_t> truth(n), pred(n);
    for (std::size_t i = 0; i < n; ++i) {
        truth[i] = static_cast<std::uint32_t>(rng.uniform_index(100));
        pred[i] = rng.uniform() < 0.9 ? truth[i] : static_cast<std::uint32_t>(rng.uniform_index(120));
    }
    for (auto _ : state) benchmark::DoNotOptimize(v_measure(truth, pred).v);
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_VMeasure)->Arg(1000)->Arg(100000)->Arg(1000000);

static void BM_Baseline(benchmark::State& state) {
    ScenarioConfig config;
    config.collection_us = 1e6;
    const auto train = generate_train(config, Split::train, 9);
    for (auto _ : state) benchmark::DoNotOptimize(baseline_deinterleave(train.pulses).data());
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(train.size()));
}
BENCHMARK(BM_Baseline)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
