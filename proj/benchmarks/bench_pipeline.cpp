#include "geosynth/exporter.hpp"
#include "geosynth/realizer.hpp"

#include <benchmark/benchmark.h>

using namespace geosynth;

namespace {

GeneratorConfig config(std::uint64_t seed, int steps)
{
    auto c = GeneratorConfig::defaults();
    c.seed = seed;
    c.step_count = steps;
    return c;
}

void BM_Generate(benchmark::State& state)
{
    std::uint64_t seed = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(generate(config(seed++, static_cast<int>(state.range(0)))));
    }
}
BENCHMARK(BM_Generate)->DenseRange(1, 4);

void BM_Realize(benchmark::State& state)
{
    const auto seq = generate(config(42, 4));
    for (auto _ : state) {
        benchmark::DoNotOptimize(realize(seq));
    }
}
BENCHMARK(BM_Realize);

void BM_Render(benchmark::State& state)
{
    auto scene = realize(generate(config(42, 4)));
    const RenderSpec spec;
    scene.unit_length = fit_unit_length(scene, spec);
    for (auto _ : state) {
        benchmark::DoNotOptimize(render(scene, spec));
    }
}
BENCHMARK(BM_Render);

void BM_OfflineQa(benchmark::State& state)
{
    const auto seq = generate(config(42, 4));
    const auto scene = realize(seq);
    for (auto _ : state) {
        benchmark::DoNotOptimize(offline_qa(seq, scene));
    }
}
BENCHMARK(BM_OfflineQa);

void BM_DraftSample(benchmark::State& state)
{
    const PipelineConfig cfg;
    const auto bank = TemplateBank::builtin();
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(draft_sample(cfg, i++, bank));
    }
}
BENCHMARK(BM_DraftSample);

} // namespace

BENCHMARK_MAIN();
