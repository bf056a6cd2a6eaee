#include <benchmark/benchmark.h>

#include <vector>

#include "hlgp/perm_solver.hpp"

using namespace hlgp;

namespace {

Instance bench_instance(int n) { return generate({DistKind::Uniform, 12345, n, 10 * n}); }

std::vector<int> first_nodes(int count) {
    std::vector<int> nodes(count);
    for (int i = 0; i < count; ++i) nodes[i] = i;
    return nodes;
}

}  // namespace

static void BM_exact_tour(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const Instance inst = bench_instance(n);
    const std::vector<int> nodes = first_nodes(n);
    PermSolverConfig cfg;
    cfg.exact_threshold = 24;
    for (auto _ : state) {
        auto tour = solve_tour(nodes, inst, cfg);
        benchmark::DoNotOptimize(tour);
    }
}
BENCHMARK(BM_exact_tour)->DenseRange(6, 14, 2);

static void BM_heuristic_tour(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const Instance inst = bench_instance(n);
    const std::vector<int> nodes = first_nodes(n);
    PermSolverConfig cfg;
    cfg.exact_threshold = 3;  // force the improvement loop even on small inputs
    for (auto _ : state) {
        auto tour = solve_tour(nodes, inst, cfg);
        benchmark::DoNotOptimize(tour);
    }
}
BENCHMARK(BM_heuristic_tour)->RangeMultiplier(2)->Range(16, 128);

BENCHMARK_MAIN();
