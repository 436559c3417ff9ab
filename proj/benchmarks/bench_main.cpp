#include <benchmark/benchmark.h>

#include <vector>

#include "kanopf/grid/power_flow.hpp"
#include "kanopf/kan/spline.hpp"
#include "kanopf/kan/train.hpp"
#include "kanopf/opf/opf.hpp"
#include "kanopf/random.hpp"

using namespace kanopf;

namespace {

std::vector<double> uniform(std::size_t n, double lo, double hi, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> v(n);
    for (double& x : v) x = rng.uniform(lo, hi);
    return v;
}

kan::KanNetwork bench_network() {
    kan::InitConfig c;
    c.noise_scale = 0.1;
    c.seed = 1;
    const std::vector<int> widths{5, 5, 5, 3};
    return kan::initialize_network(widths, c);
}

void BM_LocalBasis(benchmark::State& state) {
    const kan::SplineGrid g(-1.0, 1.0, static_cast<int>(state.range(0)), 3);
    const auto xs = uniform(1024, -1.0, 1.0, 2);
    std::vector<double> values(4);
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(kan::local_basis(g, xs[i++ & 1023], values));
    }
}
BENCHMARK(BM_LocalBasis)->Arg(5)->Arg(10)->Arg(50);

void BM_NetworkForward(benchmark::State& state) {
    const auto net = bench_network();
    const auto x = uniform(5, -1.0, 1.0, 3);
    for (auto _ : state) benchmark::DoNotOptimize(kan::network_forward(net, x));
}
BENCHMARK(BM_NetworkForward);

void BM_LossAndGradient(benchmark::State& state) {
    const auto net = bench_network();
    const auto rows = static_cast<std::size_t>(state.range(0));
    const auto x = uniform(rows * 5, -1.0, 1.0, 4);
    const auto y = uniform(rows * 3, -1.0, 1.0, 5);
    for (auto _ : state) benchmark::DoNotOptimize(kan::loss_and_gradient(net, x, y, rows, {}));
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * rows));
}
BENCHMARK(BM_LossAndGradient)->Arg(64)->Arg(4000);

void BM_PowerFlowCase5(benchmark::State& state) {
    const auto sys = grid::builtin_case5();
    const grid::PowerFlowSolver solver(sys);
    const auto d = grid::nominal_dispatch(sys);
    for (auto _ : state) benchmark::DoNotOptimize(solver.solve(d));
}
BENCHMARK(BM_PowerFlowCase5);

void BM_OpfCase5(benchmark::State& state) {
    const auto sys = grid::builtin_case5();
    for (auto _ : state) benchmark::DoNotOptimize(opf::solve_opf(sys));
}
BENCHMARK(BM_OpfCase5)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
