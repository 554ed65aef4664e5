#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "georeg/georeg.hpp"

using namespace georeg;

namespace {

std::vector<DescriptorMatch> matches(std::size_t n) {
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> pos(-400.0, 400.0);
    const RigidTransform2D t = RigidTransform2D::from_angle(0.4, 10.0, -3.0);
    std::vector<DescriptorMatch> out;
    for (std::size_t i = 0; i < n; ++i) {
        const Point2 p{pos(gen), pos(gen)};
        const Point2 q = apply_transform(t, p);
        out.push_back({p.x, p.y, q.x, q.y});
    }
    return out;
}

ModeParams example() { return {100, 100, 0, 1, 1, 1, 25, 54, 1000}; }

void BM_EstimateTransform(benchmark::State& state) {
    const auto m = matches(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(estimate_transform(m));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_EstimateTransform)->RangeMultiplier(4)->Range(2, 4096);

void BM_ParallelVerdict(benchmark::State& state) {
    const ParallelCoeffs c{4e-4, 0.04, 1.0};
    for (auto _ : state) benchmark::DoNotOptimize(par_verdict(c, 1000.0));
}
BENCHMARK(BM_ParallelVerdict);

void BM_AreaQuadrature(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(comb_area_exact(20.0, 10.0, 1000.0));
}
BENCHMARK(BM_AreaQuadrature);

void BM_SequentialFlight(benchmark::State& state) {
    SimConfig cfg;
    cfg.params = example();
    cfg.params.v = 10.0;
    cfg.params.T0 = 3600.0;
    cfg.continue_after_failure = true;
    cfg.database.tile_a = cfg.database.tile_b = 100.0;
    std::uint64_t trial = 0;
    for (auto _ : state) benchmark::DoNotOptimize(run_sequential(cfg, trial++));
}
BENCHMARK(BM_SequentialFlight);

void BM_RunTrials(benchmark::State& state) {
    SimConfig cfg;
    cfg.params = example();
    cfg.database.tile_a = cfg.database.tile_b = 100.0;
    cfg.trials = 10000;
    for (auto _ : state) benchmark::DoNotOptimize(run_trials(cfg, static_cast<unsigned>(state.range(0))));
}
BENCHMARK(BM_RunTrials)->Arg(1)->Arg(4)->UseRealTime();

}  // namespace
BENCHMARK_MAIN();
