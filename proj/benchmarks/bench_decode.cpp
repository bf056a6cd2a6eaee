#include <benchmark/benchmark.h>

#include <random>

#include "hlgp/policy.hpp"

using namespace hlgp;

namespace {

EdgeScorePolicy bench_policy() {
    EdgeScorePolicy policy = zero_policy();
    std::mt19937_64 rng(7);
    for (double& t : policy.theta)
        t = (static_cast<double>(rng() >> 11) / 9007199254740992.0) - 0.5;
    return policy;
}

}  // namespace

static void BM_greedy_decode(benchmark::State& state) {
    const Instance inst =
        generate({DistKind::Uniform, 99, static_cast<int>(state.range(0)), 50});
    const DecodeContext ctx{&inst, as_subproblem(inst), 1};
    const EdgeScorePolicy policy = bench_policy();
    DecodeOptions opts;
    opts.mode = DecodeMode::Greedy;
    for (auto _ : state) {
        auto result = decode(policy, ctx, opts);
        benchmark::DoNotOptimize(result);
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_greedy_decode)->RangeMultiplier(2)->Range(25, 400)->Complexity();

static void BM_beam_decode(benchmark::State& state) {
    const Instance inst = generate({DistKind::Uniform, 99, 100, 50});
    const DecodeContext ctx{&inst, as_subproblem(inst), 1};
    const EdgeScorePolicy policy = bench_policy();
    GCostCache cache(inst, PermSolverConfig{});
    DecodeOptions opts;
    opts.mode = DecodeMode::Beam;
    opts.beam_width = static_cast<int>(state.range(0));
    for (auto _ : state) {
        auto result = decode(policy, ctx, opts, &cache);
        benchmark::DoNotOptimize(result);
    }
}
BENCHMARK(BM_beam_decode)->DenseRange(2, 16, 2);

static void BM_sample_decode(benchmark::State& state) {
    const Instance inst = generate({DistKind::GaussianCluster, 5, 100, 50});
    const DecodeContext ctx{&inst, as_subproblem(inst), 1};
    const EdgeScorePolicy policy = bench_policy();
    DecodeOptions opts;
    opts.mode = DecodeMode::Sample;
    std::uint64_t seed = 0;
    for (auto _ : state) {
        opts.seed = seed++;
        auto result = decode(policy, ctx, opts);
        benchmark::DoNotOptimize(result);
    }
}
BENCHMARK(BM_sample_decode);
