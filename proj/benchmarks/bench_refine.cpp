#include <benchmark/benchmark.h>

#include <random>

#include "hlgp/hierarchy.hpp"

using namespace hlgp;

namespace {

EdgeScorePolicy bench_policy(std::uint64_t seed) {
    EdgeScorePolicy policy = zero_policy();
    std::mt19937_64 rng(seed);
    for (double& t : policy.theta)
        t = (static_cast<double>(rng() >> 11) / 9007199254740992.0) - 0.5;
    return policy;
}

}  // namespace

static void BM_refine_level(benchmark::State& state) {
    const Instance inst =
        generate({DistKind::Uniform, 31, static_cast<int>(state.range(0)), 50});
    GCostCache cache(inst, PermSolverConfig{});
    DecodeOptions opts;
    opts.mode = DecodeMode::Greedy;
    const PartitionSolution base =
        order_by_polar(global_partition(inst, bench_policy(1), opts, false, &cache), inst);
    const EdgeScorePolicy local = bench_policy(2);
    for (auto _ : state) {
        auto result = refine_level(base, inst, 1, local, AcceptRule::IfBetter, opts, &cache);
        benchmark::DoNotOptimize(result);
    }
}
BENCHMARK(BM_refine_level)->RangeMultiplier(2)->Range(50, 400);

static void BM_full_solve(benchmark::State& state) {
    const Instance inst = generate({DistKind::Uniform, 47, 100, 50});
    SolveOptions opts;
    opts.K = static_cast<int>(state.range(0));
    opts.decode.mode = DecodeMode::Greedy;
    const EdgeScorePolicy global = bench_policy(3);
    const EdgeScorePolicy local = bench_policy(4);
    for (auto _ : state) {
        auto result = solve(inst, global, local, opts);
        benchmark::DoNotOptimize(result);
    }
}
BENCHMARK(BM_full_solve)->DenseRange(0, 5, 1);
