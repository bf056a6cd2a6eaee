#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "hlgp/hierarchy.hpp"
#include "hlgp/policy.hpp"

namespace hlgp {

struct TrajectoryStep {
    int action = 0;
    double log_prob = 0.0;
    // State summary at the moment of the action.
    int remaining_count = 0;
    int remaining_capacity = 0;
    int returns_used = 0;
};

/**
 * One sampled decode plus everything needed to recompute its gradient by
 * replay: the subproblem it ran on, the action sequence, and the terminal
 * reward. sample_id/unit_id tag the baseline group (unit = pair index for
 * local rollouts, 0 for global ones).
 */
struct Trajectory {
    const Instance* inst = nullptr;
    Subproblem context;
    int min_subgraphs = 1;
    std::vector<TrajectoryStep> steps;
    double reward = 0.0;
    double entropy_sum = 0.0;
    PartitionSolution partition;
    int sample_id = 0;
    int unit_id = 0;
};

// n_samples decodes of `sub` with terminal reward -f(partition): each
// completed subgraph contributes -g on completion, everything else 0.
std::vector<Trajectory> rollout_global(const Instance& inst, const Subproblem& sub,
                                       const EdgeScorePolicy& policy, int n_samples,
                                       std::uint64_t seed, GCostCache& gc);

// n_samples decodes of every level-k pair of `prev`. Per-pair reward is the
// negated pair g-sum change (old minus new); summed over one sample's pairs
// it equals -(f(C_k) - f(C_{k-1})) for that sample's repartitions. Samples
// whose forced returns overran the two-return budget are dropped.
std::vector<Trajectory> rollout_local(const PartitionSolution& prev, const Instance& inst, int k,
                                      const EdgeScorePolicy& policy, int n_samples,
                                      std::uint64_t seed, GCostCache& gc);

struct GradReport {
    double grad_norm = 0.0;  // pre-clip L2 norm
    double mean_advantage = 0.0;
    double mean_reward = 0.0;
};

// One REINFORCE ascent step over a trajectory group sharing a baseline:
// advantage = reward - group mean; gradient averages
// advantage * grad log pi + lambda * grad step-entropy-sum over the group,
// is clipped to L2 norm 1, and is applied with the given learning rate.
GradReport reinforce_step(EdgeScorePolicy& policy, std::span<const Trajectory> group,
                          double lambda_entropy, double learning_rate);

struct RlConfig {
    DistributionSpec distribution;
    int iterations = 1000;
    int instances_per_iteration = 1;
    int n_samples = 20;
    double lambda_global = 0.1;
    double lambda_local = 0.005;
    double learning_rate = 0.05;
    int k_train = 3;
    // Treat every other residual subproblem as a fresh training instance for
    // the global policy; off trains on whole instances only.
    bool augment_subproblems = true;
    std::uint64_t seed = 0;
    PermSolverConfig perm_cfg;
    int eval_every = 100;    // held-out greedy evaluation cadence
    int eval_instances = 32;
    // Both policies are checkpointed into ckpt_dir as global_<iter>.json and
    // local_<iter>.json every ckpt_every iterations; 0 disables.
    int ckpt_every = 0;
    std::filesystem::path ckpt_dir;
};

struct RlLogRow {
    int iteration = 0;
    double mean_reward = 0.0;  // over this iteration's global update groups
    double grad_norm = 0.0;    // mean pre-clip norm of global updates
    double eval_cost = 0.0;    // latest held-out greedy-decode mean f
};

struct RlResult {
    EdgeScorePolicy global_policy;
    EdgeScorePolicy local_policy;
    std::vector<RlLogRow> log;
};

// Trains both policies from zero initialization. Deterministic in cfg.
// iterations == 0 returns the zero policies untouched.
RlResult train_rl(const RlConfig& cfg);

// Mean greedy global-decode partition cost over a set: the held-out metric
// the training log tracks.
double mean_greedy_cost(const std::vector<Instance>& instances, const EdgeScorePolicy& policy,
                        const PermSolverConfig& cfg);

}  // namespace hlgp
