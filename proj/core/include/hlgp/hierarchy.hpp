#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <vector>

#include "hlgp/policy.hpp"

namespace hlgp {

// One pair-refinement record. `after` equals `before` (delta 0) when the
// repartition was rejected, so summed deltas always equal the level's
// f-cost change exactly.
struct LevelTrace {
    int level = 0;
    int pair_index = 0;
    std::array<std::vector<int>, 2> before;
    std::array<std::vector<int>, 2> after;
    double delta = 0.0;
};

// Subgraphs sorted by polar angle of their customer centroid around the
// depot, ascending in [0, 2*pi). A centroid exactly at the depot sorts
// first; ties keep the incoming order.
PartitionSolution order_by_polar(const PartitionSolution& partition, const Instance& inst);

// A cyclic-neighbor pair merged into one two-return subproblem (nodes sorted
// ascending), plus the positions it came from.
struct PairTask {
    Subproblem sub;
    int pos_a = 0;
    int pos_b = 0;
};

// Level k pairs positions ((m+k-1) mod N_c, (m+k) mod N_c) for m = 2j,
// j = 0..floor(N_c/2)-1: consecutive disjoint pairs, shifted one position
// per level so every boundary is eventually revisited. N_c < 2 yields
// nothing to refine.
std::vector<PairTask> build_subproblems(const PartitionSolution& partition, int k, int capacity);

enum class AcceptRule { Always, IfBetter };

std::string to_string(AcceptRule rule);
AcceptRule accept_rule_from_string(const std::string& name);

struct RefineResult {
    PartitionSolution partition;
    std::vector<LevelTrace> traces;
};

// Re-decodes every level-k pair with the local policy. A repartition that is
// not exactly two subgraphs (possible only when forced returns overrun the
// budget on adversarial demands) is rejected as-is. IfBetter keeps a
// repartition only when its pair g-sum strictly drops.
RefineResult refine_level(const PartitionSolution& prev, const Instance& inst, int k,
                          const EdgeScorePolicy& local_policy, AcceptRule accept,
                          const DecodeOptions& opts, GCostCache* cache = nullptr);

// Coarse partition of the whole instance. With use_subproblem_restart, after
// each completed subgraph the residual is re-decoded as a fresh subproblem
// (one fewer return allowed) and only the first subgraph of each decode is
// kept.
PartitionSolution global_partition(const Instance& inst, const EdgeScorePolicy& policy,
                                   const DecodeOptions& opts, bool use_subproblem_restart,
                                   GCostCache* cache = nullptr);

struct SolveOptions {
    int K = 5;
    DecodeOptions decode;
    AcceptRule accept = AcceptRule::IfBetter;
    bool restart = true;
    bool reorder_each_level = true;  // refresh polar neighborhoods after every level
};

struct SolveResult {
    RoutePlan plan;
    PartitionSolution partition;
    std::vector<LevelTrace> traces;
};

// Full pipeline: global partition, K local refinement levels, then one tour
// per final subgraph.
SolveResult solve(const Instance& inst, const EdgeScorePolicy& global_policy,
                  const EdgeScorePolicy& local_policy, const SolveOptions& opts);

// Partition cost under the subsolver: sum of per-subgraph g.
double f_cost(const PartitionSolution& partition, const Instance& inst,
              const PermSolverConfig& cfg);

// Trace dumps are one JSON object per line.
std::string trace_to_json(const LevelTrace& trace);
LevelTrace trace_from_json(const std::string& text);
void save_traces(std::span<const LevelTrace> traces, const std::filesystem::path& path);
std::vector<LevelTrace> load_traces(const std::filesystem::path& path);

}  // namespace hlgp
