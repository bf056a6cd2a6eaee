#include "hlgp/trainer_rl.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "hlgp/error.hpp"

namespace hlgp {

namespace {

double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0);
}

int pick_sample(const StepScores& scores, std::mt19937_64& rng) {
    const double u = uniform01(rng);
    double acc = 0.0;
    for (std::size_t i = 0; i < scores.probs.size(); ++i) {
        acc += scores.probs[i];
        if (u < acc) return static_cast<int>(i);
    }
    return static_cast<int>(scores.probs.size()) - 1;
}

// Sampled decode that also records the per-step state summaries and the
// entropy sum the surrogate objective needs.
Trajectory sample_trajectory(const Instance& inst, const Subproblem& sub, int min_subgraphs,
                             const EdgeScorePolicy& policy, std::uint64_t seed) {
    DecodeContext ctx{&inst, sub, min_subgraphs};
    std::mt19937_64 rng(seed);
    DecodeState state = init_state(ctx);
    Trajectory traj;
    traj.inst = &inst;
    traj.context = sub;
    traj.min_subgraphs = min_subgraphs;
    while (!finished(state)) {
        const StepScores scores = score_step(policy, state, ctx);
        const int k = pick_sample(scores, rng);
        traj.steps.push_back({scores.actions[k], scores.log_probs[k],
                              static_cast<int>(state.remaining.size()),
                              state.remaining_capacity, state.returns_used});
        traj.entropy_sum += step_entropy(scores);
        apply_action(state, ctx, scores.actions[k]);
    }
    traj.partition = extract_partition(state);
    return traj;
}

}  // namespace

std::vector<Trajectory> rollout_global(const Instance& inst, const Subproblem& sub,
                                       const EdgeScorePolicy& policy, int n_samples,
                                       std::uint64_t seed, GCostCache& gc) {
    if (n_samples < 1) throw ValidationError("rollout_global: n_samples must be >= 1");
    std::vector<Trajectory> out;
    out.reserve(n_samples);
    for (int s = 0; s < n_samples; ++s) {
        Trajectory traj = sample_trajectory(inst, sub, 1, policy, seed + s);
        traj.reward = -gc.f(traj.partition);
        traj.sample_id = s;
        out.push_back(std::move(traj));
    }
    return out;
}

std::vector<Trajectory> rollout_local(const PartitionSolution& prev, const Instance& inst, int k,
                                      const EdgeScorePolicy& policy, int n_samples,
                                      std::uint64_t seed, GCostCache& gc) {
    if (n_samples < 1) throw ValidationError("rollout_local: n_samples must be >= 1");
    const auto tasks = build_subproblems(prev, k, inst.capacity);
    std::vector<Trajectory> out;
    out.reserve(static_cast<std::size_t>(n_samples) * tasks.size());
    for (std::size_t j = 0; j < tasks.size(); ++j) {
        const double h_before =
            gc.g(prev.subgraphs[tasks[j].pos_a]) + gc.g(prev.subgraphs[tasks[j].pos_b]);
        for (int s = 0; s < n_samples; ++s) {
            Trajectory traj = sample_trajectory(inst, tasks[j].sub, 2, policy,
                                                seed + s * 7919 + j);
            // Forced returns can overrun the two-return budget on adversarial demands;
            // such a sample has no slot-for-slot repartition, so it is dropped.
            if (traj.partition.subgraphs.size() != 2) continue;
            const double h_after =
                gc.g(traj.partition.subgraphs[0]) + gc.g(traj.partition.subgraphs[1]);
            traj.reward = h_before - h_after;
            traj.sample_id = s;
            traj.unit_id = static_cast<int>(j);
            out.push_back(std::move(traj));
        }
    }
    return out;
}

GradReport reinforce_step(EdgeScorePolicy& policy, std::span<const Trajectory> group,
                          double lambda_entropy, double learning_rate) {
    if (group.empty()) throw ValidationError("reinforce_step: empty trajectory group");
    const std::size_t dim = policy.theta.size();

    double baseline = 0.0;
    for (const auto& traj : group) baseline += traj.reward;
    baseline /= static_cast<double>(group.size());

    GradReport report;
    report.mean_reward = baseline;
    std::vector<double> grad(dim, 0.0);
    for (const auto& traj : group) {
        const double advantage = traj.reward - baseline;
        report.mean_advantage += advantage;
        DecodeContext ctx{traj.inst, traj.context, traj.min_subgraphs};
        DecodeState state = init_state(ctx);
        for (const auto& step : traj.steps) {
            const StepScores scores = score_step(policy, state, ctx);
            const auto it =
                std::find(scores.actions.begin(), scores.actions.end(), step.action);
            if (it == scores.actions.end())
                throw InternalError("reinforce_step: recorded action infeasible on replay");
            const int k = static_cast<int>(it - scores.actions.begin());
            const auto g_logp = grad_log_prob(scores, k);
            const auto g_ent = step_entropy_grad(scores);
            for (std::size_t f = 0; f < dim; ++f)
                grad[f] += advantage * g_logp[f] + lambda_entropy * g_ent[f];
            apply_action(state, ctx, step.action);
        }
    }
    report.mean_advantage /= static_cast<double>(group.size());

    double norm2 = 0.0;
    for (std::size_t f = 0; f < dim; ++f) {
        grad[f] /= static_cast<double>(group.size());
        norm2 += grad[f] * grad[f];
    }
    report.grad_norm = std::sqrt(norm2);
    const double scale = report.grad_norm > 1.0 ? 1.0 / report.grad_norm : 1.0;
    for (std::size_t f = 0; f < dim; ++f) policy.theta[f] += learning_rate * scale * grad[f];
    return report;
}

double mean_greedy_cost(const std::vector<Instance>& instances, const EdgeScorePolicy& policy,
                        const PermSolverConfig& cfg) {
    if (instances.empty()) throw ValidationError("mean_greedy_cost: empty instance set");
    double total = 0.0;
    for (const auto& inst : instances) {
        GCostCache gc(inst, cfg);
        DecodeOptions opts;
        opts.mode = DecodeMode::Greedy;
        opts.perm_cfg = cfg;
        const PartitionSolution c0 = global_partition(inst, policy, opts, false, &gc);
        total += gc.f(c0);
    }
    return total / static_cast<double>(instances.size());
}

RlResult train_rl(const RlConfig& cfg) {
    if (cfg.iterations < 0) throw ValidationError("train_rl: iterations must be >= 0");
    if (cfg.instances_per_iteration < 1)
        throw ValidationError("train_rl: instances_per_iteration must be >= 1");
    if (cfg.n_samples < 2) throw ValidationError("train_rl: n_samples must be >= 2");
    if (cfg.k_train < 0) throw ValidationError("train_rl: k_train must be >= 0");
    if (!(cfg.learning_rate >= 0.0)) throw ValidationError("train_rl: bad learning_rate");

    RlResult result;
    result.global_policy = zero_policy();
    result.local_policy = zero_policy();

    std::vector<Instance> held_out;
    held_out.reserve(cfg.eval_instances);
    {
        std::mt19937_64 eval_rng(cfg.seed ^ 0xb5ad4eceda1ce2a9ull);
        for (int i = 0; i < cfg.eval_instances; ++i) {
            DistributionSpec spec = cfg.distribution;
            spec.seed = eval_rng();
            held_out.push_back(generate(spec));
        }
    }

    std::mt19937_64 master(cfg.seed);
    double eval_cost = cfg.eval_instances > 0
                           ? mean_greedy_cost(held_out, result.global_policy, cfg.perm_cfg)
                           : 0.0;

    for (int iter = 0; iter < cfg.iterations; ++iter) {
        double iter_reward = 0.0;
        double iter_norm = 0.0;
        int iter_updates = 0;

        for (int i = 0; i < cfg.instances_per_iteration; ++i) {
            DistributionSpec spec = cfg.distribution;
            spec.seed = master();
            const Instance inst = generate(spec);
            GCostCache gc(inst, cfg.perm_cfg);

            // Global phase: walk the restart rounds; round 0 always trains,
            // every later residual is a fresh training instance when augmenting.
            PartitionSolution c0;
            Subproblem residual = as_subproblem(inst);
            int round = 0;
            while (!residual.nodes.empty()) {
                const bool train_here = round == 0 || cfg.augment_subproblems;
                PartitionSolution advance;
                if (train_here) {
                    const auto trajs = rollout_global(inst, residual, result.global_policy,
                                                      cfg.n_samples, master(), gc);
                    const GradReport rep = reinforce_step(result.global_policy, trajs,
                                                          cfg.lambda_global, cfg.learning_rate);
                    iter_reward += rep.mean_reward;
                    iter_norm += rep.grad_norm;
                    ++iter_updates;
                    advance = trajs.front().partition;
                } else {
                    advance = sample_trajectory(inst, residual, 1, result.global_policy,
                                                master())
                                  .partition;
                }
                const auto& first = advance.subgraphs.front();
                c0.subgraphs.push_back(first);
                std::vector<int> sorted_first = first;
                std::sort(sorted_first.begin(), sorted_first.end());
                std::vector<int> rest;
                rest.reserve(residual.nodes.size() - first.size());
                for (int node : residual.nodes)
                    if (!std::binary_search(sorted_first.begin(), sorted_first.end(), node))
                        rest.push_back(node);
                residual.nodes = std::move(rest);
                residual.max_returns = std::max(1, residual.max_returns - 1);
                ++round;
            }

            // Local phase: train on each pair, then step the hierarchy with
            // sample 0's repartitions (always accepted, exploration).
            c0 = order_by_polar(c0, inst);
            for (int k = 1; k <= cfg.k_train; ++k) {
                const auto tasks = build_subproblems(c0, k, inst.capacity);
                if (tasks.empty()) break;
                const auto trajs = rollout_local(c0, inst, k, result.local_policy,
                                                 cfg.n_samples, master(), gc);
                for (std::size_t j = 0; j < tasks.size(); ++j) {
                    std::vector<Trajectory> unit;
                    unit.reserve(cfg.n_samples);
                    for (const auto& traj : trajs)
                        if (traj.unit_id == static_cast<int>(j)) unit.push_back(traj);
                    // rollout_local drops over-budget samples; a drained unit leaves
                    // both the policy and the pair untouched.
                    if (unit.empty()) continue;
                    reinforce_step(result.local_policy, unit, cfg.lambda_local,
                                   cfg.learning_rate);
                    const auto& repart =
                        unit.front().partition;  // first kept sample leads the group
                    c0.subgraphs[tasks[j].pos_a] = repart.subgraphs[0];
                    c0.subgraphs[tasks[j].pos_b] = repart.subgraphs[1];
                }
                c0 = order_by_polar(c0, inst);
            }
        }

        if (cfg.eval_instances > 0 && cfg.eval_every > 0 && (iter + 1) % cfg.eval_every == 0)
            eval_cost = mean_greedy_cost(held_out, result.global_policy, cfg.perm_cfg);
        result.log.push_back({iter, iter_updates > 0 ? iter_reward / iter_updates : 0.0,
                              iter_updates > 0 ? iter_norm / iter_updates : 0.0, eval_cost});
        if (cfg.ckpt_every > 0 && !cfg.ckpt_dir.empty() && (iter + 1) % cfg.ckpt_every == 0) {
            const std::string tag = std::to_string(iter + 1);
            save_policy(result.global_policy, cfg.ckpt_dir / ("global_" + tag + ".json"));
            save_policy(result.local_policy, cfg.ckpt_dir / ("local_" + tag + ".json"));
        }
    }
    return result;
}

}  // namespace hlgp
