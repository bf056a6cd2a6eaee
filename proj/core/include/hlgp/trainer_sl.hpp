#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "hlgp/hierarchy.hpp"
#include "hlgp/policy.hpp"

namespace hlgp {

/**
 * One supervised decision: after replaying `prefix` from a fresh decode of
 * `context`, the policy should pick `target`. Targets extracted from a valid
 * partition are always inside the feasibility mask.
 */
struct LabeledStep {
    const Instance* inst = nullptr;
    Subproblem context;
    int min_subgraphs = 1;
    std::vector<int> prefix;
    int target = 0;
};

struct LabelSteps {
    std::vector<LabeledStep> global_steps;
    std::vector<LabeledStep> local_steps;
};

// Expands an ordered partition into imitation targets. Global steps frame
// each subgraph as the first one kept from its residual (customers in
// cheapest-tour order, then the closing depot return; the last subgraph's
// forced return is skipped). Local steps frame every cyclic neighbor pair as
// a two-return decode, so they exist only when the partition has at least
// two subgraphs. The partition is polar-ordered first and must be valid.
LabelSteps steps_from_label(const Instance& inst, const PartitionSolution& partition,
                            const PermSolverConfig& cfg);

struct SlReport {
    double loss = 0.0;      // mean cross-entropy plus the L2 term
    double accuracy = 0.0;  // fraction of steps where greedy argmax hits the target
};

// Mean -log pi(target) over the steps plus lambda_l2 * |theta|^2 / 2.
double sl_loss(const EdgeScorePolicy& policy, std::span<const LabeledStep> steps,
               double lambda_l2);

// Exact gradient of sl_loss in theta, before any norm clipping.
std::vector<double> sl_loss_gradient(const EdgeScorePolicy& policy,
                                     std::span<const LabeledStep> steps, double lambda_l2);

// One SGD descent step on sl_loss with the gradient clipped to L2 norm 1.
// Empty step lists leave the policy untouched and report zero loss, full
// accuracy.
SlReport sl_step(EdgeScorePolicy& policy, std::span<const LabeledStep> steps, double lambda_l2,
                 double learning_rate);

struct SlConfig {
    DistributionSpec distribution;
    int rounds = 5;
    int instances_per_round = 100;
    int beam_width = 16;
    int k_label = 3;  // refinement levels inside label generation
    double lambda_l2 = 1e-6;
    double learning_rate = 0.05;
    // Warm-up gradient steps on angular-sweep labels before round 1; sweeps
    // that overflow the subgraph budget are skipped.
    int bootstrap_steps = 200;
    std::uint64_t seed = 0;
    PermSolverConfig perm_cfg;
    // When set, every generated label is appended as one JSON line
    // {"round", "instance_seed", "cost", "subgraphs"}.
    std::filesystem::path label_cache;
};

// Full-pipeline label: the better of a beam and a greedy solve (k_label
// levels, if_better acceptance, no restart) under the current policies.
SolveResult generate_label(const Instance& inst, const EdgeScorePolicy& global_policy,
                           const EdgeScorePolicy& local_policy, const SlConfig& cfg);

struct SlLogRow {
    int round = 0;
    double mean_label_cost = 0.0;
    double loss = 0.0;      // mean over the round's updates, both policies
    double accuracy = 0.0;
};

struct SlResult {
    EdgeScorePolicy global_policy;
    EdgeScorePolicy local_policy;
    std::vector<SlLogRow> log;
};

// Self-imitation: bootstrap from sweep labels, then each round regenerates
// labels with the current policies and fits both policies to them.
// rounds == 0 returns the bootstrap-only policies.
SlResult train_sl(const SlConfig& cfg);

}  // namespace hlgp
