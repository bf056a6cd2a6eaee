#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include "hlgp/instance.hpp"
#include "hlgp/perm_solver.hpp"
#include "hlgp/solution.hpp"

namespace hlgp {

// Action encoding: a customer index, or kDepotReturn to close the current
// subgraph and start a new one.
constexpr int kDepotReturn = -1;

/**
 * Incremental partition-construction state over one subproblem.
 *
 * Invariants: remaining_capacity >= 0; returns_used <= max_returns;
 * capacity - remaining_capacity equals the demand of current_subgraph.
 */
struct DecodeState {
    std::vector<int> remaining;                // unassigned nodes, ascending
    std::vector<int> current;                  // open subgraph, selection order
    std::vector<std::vector<int>> completed;   // closed subgraphs
    int remaining_capacity = 0;
    int returns_used = 0;
};

// What a decode runs against: the coordinate/demand context plus the node
// subset being partitioned. min_subgraphs > 1 forbids finishing with fewer
// subgraphs (pair refinement uses 2).
struct DecodeContext {
    const Instance* inst = nullptr;
    Subproblem sub;
    int min_subgraphs = 1;
};

DecodeState init_state(const DecodeContext& ctx);
bool finished(const DecodeState& state);

// Feasible actions in deterministic order: customers ascending, depot-return
// last. A customer must fit the open capacity and must not strand the
// min-subgraph requirement; depot-return needs a non-empty current subgraph,
// a spare return, and remaining demand that still packs into the returns
// left. When no customer fits, depot-return is forced regardless of the
// packing guard (the only forced action).
std::vector<int> feasible_actions(const DecodeState& state, const DecodeContext& ctx);

void apply_action(DecodeState& state, const DecodeContext& ctx, int action);

// Closes the open subgraph; only valid once finished(state).
PartitionSolution extract_partition(const DecodeState& state);

/**
 * Linear edge-score policy: per candidate action a feature vector phi is
 * scored as theta . phi / temperature and normalized by a masked softmax.
 */
struct EdgeScorePolicy {
    std::vector<double> theta;
    std::vector<std::string> feature_spec;
    double temperature = 1.0;
};

// The eight built-in candidate features, in scoring order.
const std::vector<std::string>& policy_feature_names();
EdgeScorePolicy zero_policy();

std::vector<double> compute_features(const DecodeState& state, const DecodeContext& ctx,
                                     int action);

// One scored step: candidates with probabilities, log-probabilities and the
// feature vectors they were scored from. Infeasible actions are absent, i.e.
// carry probability exactly zero.
struct StepScores {
    std::vector<int> actions;
    std::vector<double> probs;
    std::vector<double> log_probs;
    std::vector<std::vector<double>> features;
    double temperature = 1.0;
    bool forced = false;  // single candidate, probability 1, log-prob 0
};

StepScores score_step(const EdgeScorePolicy& policy, const DecodeState& state,
                      const DecodeContext& ctx);

// d/dtheta log pi(actions[picked] | state) = (phi_picked - E_pi[phi]) / T.
std::vector<double> grad_log_prob(const StepScores& scores, int picked);
double step_entropy(const StepScores& scores);
// d/dtheta H(pi(.|state)) = -Cov_pi(phi, log pi) / T.
std::vector<double> step_entropy_grad(const StepScores& scores);

enum class DecodeMode { Greedy, Sample, Beam };

std::string to_string(DecodeMode mode);
DecodeMode decode_mode_from_string(const std::string& name);

struct DecodeOptions {
    DecodeMode mode = DecodeMode::Greedy;
    std::uint64_t seed = 0;
    int beam_width = 16;
    PermSolverConfig perm_cfg;  // beam mode ranks finished sequences by plan cost
};

struct DecodeResult {
    PartitionSolution partition;
    double log_prob = 0.0;
    std::vector<int> actions;
    std::vector<double> step_log_probs;
};

// Memoizes g over node subsets of one instance; used wherever the same
// subgraph is costed repeatedly.
class GCostCache {
  public:
    GCostCache(const Instance& inst, PermSolverConfig cfg);
    double g(std::span<const int> subgraph);
    double f(const PartitionSolution& partition);
    const PermSolverConfig& cfg() const { return cfg_; }
    std::size_t size() const { return memo_.size(); }

  private:
    const Instance* inst_;
    PermSolverConfig cfg_;
    struct KeyHash {
        std::size_t operator()(const std::vector<int>& v) const;
    };
    std::unordered_map<std::vector<int>, double, KeyHash> memo_;
};

// Greedy takes the argmax each step (ties to the first candidate, i.e. the
// lowest customer index). Sample draws from the step distribution with the
// seeded generator. Beam keeps the beam_width highest log-probability
// partials per step; finished sequences (the greedy rollout always among
// them) are ranked by realized plan cost, ties by log-probability.
DecodeResult decode(const EdgeScorePolicy& policy, const DecodeContext& ctx,
                    const DecodeOptions& opts, GCostCache* cache = nullptr);

// Log-probability of an action sequence under the policy, by replay.
double sequence_log_prob(const EdgeScorePolicy& policy, const DecodeContext& ctx,
                         std::span<const int> actions);

// Angular baseline: customers sorted by polar angle around the depot, cut
// greedily at capacity. Ignores n_max; callers validate when it matters.
PartitionSolution sweep_decode(const Instance& inst);

std::string policy_to_json(const EdgeScorePolicy& policy);
EdgeScorePolicy policy_from_json(const std::string& text);
void save_policy(const EdgeScorePolicy& policy, const std::filesystem::path& path);
EdgeScorePolicy load_policy(const std::filesystem::path& path);

}  // namespace hlgp
