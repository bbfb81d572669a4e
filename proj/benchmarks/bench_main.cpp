#include <benchmark/benchmark.h>

#include <cmath>

#include "grushin/kernel.hpp"
#include "grushin/resolvent.hpp"
#include "grushin/sde.hpp"

using namespace grushin;

namespace {

void BM_PaperKernelEval(benchmark::State& state) {
    const KernelParams p(1, 0.5, 0);
    double x = -1, acc = 0;
    for (auto _ : state) {
        acc += eval_kernel(PaperClosedForm{}, p, x, 0.3).value;
        x = x > 1 ? -1 : x + 1e-3;
    }
    benchmark::DoNotOptimize(acc);
}
BENCHMARK(BM_PaperKernelEval);

void BM_BridgeKernelEval(benchmark::State& state) {
    const Kernel k(BridgeMC{static_cast<std::size_t>(state.range(0)), 64, 7});
    const KernelParams p(1, 0.5, 0);
    for (auto _ : state) benchmark::DoNotOptimize(k.eval(p, 0.2, 0.3));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BridgeKernelEval)->Arg(1000)->Arg(10000);

void BM_Simulate(benchmark::State& state) {
    SimConfig c;
    c.n_paths = static_cast<std::size_t>(state.range(0));
    c.n_steps = 64;
    for (auto _ : state) benchmark::DoNotOptimize(simulate_endpoints(c));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Simulate)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_Resolvent(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto g = Grid2D::centered(0, 0, 4, 4, n, n);
    const auto f = GridFunction::sample(g, [](double x, double y) { return std::exp(-x * x - y * y); });
    ResolventConfig cfg;
    cfg.lambda = 2;
    for (auto _ : state) benchmark::DoNotOptimize(apply_resolvent(f, cfg));
}
BENCHMARK(BM_Resolvent)->Arg(33)->Arg(65)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
