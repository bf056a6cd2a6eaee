#include "hlgp/trainer_sl.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include <json.hpp>

#include "hlgp/error.hpp"
#include "hlgp/perm_solver.hpp"
#include "hlgp/solution.hpp"

namespace hlgp {

namespace {

// Emits the steps of one subgraph decode: customers in tour order, then the
// closing return unless it would be the forced final action.
void emit_unit(std::vector<LabeledStep>& out, const Instance& inst, const Subproblem& context,
               int min_subgraphs, std::vector<int>& prefix, const std::vector<int>& tour,
               bool label_return) {
    for (int node : tour) {
        out.push_back({&inst, context, min_subgraphs, prefix, node});
        prefix.push_back(node);
    }
    if (label_return) {
        out.push_back({&inst, context, min_subgraphs, prefix, kDepotReturn});
        prefix.push_back(kDepotReturn);
    }
}

}  // namespace

LabelSteps steps_from_label(const Instance& inst, const PartitionSolution& partition,
                            const PermSolverConfig& cfg) {
    const auto report = validate_partition(partition, inst);
    if (!report.ok())
        throw ValidationError("steps_from_label: invalid label: " +
                              report.violations.front().message);

    const PartitionSolution ordered = order_by_polar(partition, inst);
    const int n_c = static_cast<int>(ordered.subgraphs.size());
    std::vector<std::vector<int>> tours(n_c);
    for (int i = 0; i < n_c; ++i) tours[i] = solve_tour(ordered.subgraphs[i], inst, cfg);

    LabelSteps steps;

    // Global framing: subgraph r is the first one decoded from the residual
    // left after stripping subgraphs 0..r-1. The budget must cover the label's
    // own subgraph count or its boundary returns would fail the packing guard.
    Subproblem residual = as_subproblem(inst);
    residual.max_returns = std::max(residual.max_returns, n_c);
    for (int r = 0; r < n_c; ++r) {
        std::vector<int> prefix;
        emit_unit(steps.global_steps, inst, residual, 1, prefix, tours[r], r + 1 < n_c);
        std::vector<int> stripped = ordered.subgraphs[r];
        std::sort(stripped.begin(), stripped.end());
        std::vector<int> rest;
        rest.reserve(residual.nodes.size() - stripped.size());
        for (int node : residual.nodes)
            if (!std::binary_search(stripped.begin(), stripped.end(), node))
                rest.push_back(node);
        residual.nodes = std::move(rest);
        residual.max_returns = std::max(1, residual.max_returns - 1);
    }

    if (n_c >= 2) {
        for (int i = 0; i < n_c; ++i) {
            const int a = i;
            const int b = (i + 1) % n_c;
            Subproblem pair;
            pair.capacity = inst.capacity;
            pair.max_returns = 2;
            pair.nodes = ordered.subgraphs[a];
            pair.nodes.insert(pair.nodes.end(), ordered.subgraphs[b].begin(),
                              ordered.subgraphs[b].end());
            std::sort(pair.nodes.begin(), pair.nodes.end());
            std::vector<int> prefix;
            emit_unit(steps.local_steps, inst, pair, 2, prefix, tours[a], true);
            emit_unit(steps.local_steps, inst, pair, 2, prefix, tours[b], false);
        }
    }
    return steps;
}

namespace {

// Replays one labeled step and returns the scores at the decision point.
StepScores replay_step(const EdgeScorePolicy& policy, const LabeledStep& step, int* target_idx) {
    DecodeContext ctx{step.inst, step.context, step.min_subgraphs};
    DecodeState state = init_state(ctx);
    for (int action : step.prefix) apply_action(state, ctx, action);
    const StepScores scores = score_step(policy, state, ctx);
    const auto it = std::find(scores.actions.begin(), scores.actions.end(), step.target);
    if (it == scores.actions.end())
        throw InternalError("sl replay: label target infeasible");
    *target_idx = static_cast<int>(it - scores.actions.begin());
    return scores;
}

}  // namespace

double sl_loss(const EdgeScorePolicy& policy, std::span<const LabeledStep> steps,
               double lambda_l2) {
    double loss = 0.0;
    for (const auto& step : steps) {
        int k = 0;
        const StepScores scores = replay_step(policy, step, &k);
        loss -= scores.log_probs[k];
    }
    if (!steps.empty()) loss /= static_cast<double>(steps.size());
    double reg = 0.0;
    for (double t : policy.theta) reg += t * t;
    return loss + 0.5 * lambda_l2 * reg;
}

std::vector<double> sl_loss_gradient(const EdgeScorePolicy& policy,
                                     std::span<const LabeledStep> steps, double lambda_l2) {
    const std::size_t dim = policy.theta.size();
    std::vector<double> grad(dim, 0.0);
    for (const auto& step : steps) {
        int k = 0;
        const StepScores scores = replay_step(policy, step, &k);
        const auto g = grad_log_prob(scores, k);
        for (std::size_t f = 0; f < dim; ++f) grad[f] -= g[f];
    }
    for (std::size_t f = 0; f < dim; ++f) {
        if (!steps.empty()) grad[f] /= static_cast<double>(steps.size());
        grad[f] += lambda_l2 * policy.theta[f];
    }
    return grad;
}

SlReport sl_step(EdgeScorePolicy& policy, std::span<const LabeledStep> steps, double lambda_l2,
                 double learning_rate) {
    if (steps.empty()) return {0.0, 1.0};
    const std::size_t dim = policy.theta.size();

    double loss = 0.0;
    int hits = 0;
    for (const auto& step : steps) {
        int k = 0;
        const StepScores scores = replay_step(policy, step, &k);
        loss -= scores.log_probs[k];
        const int argmax = static_cast<int>(
            std::max_element(scores.probs.begin(), scores.probs.end()) - scores.probs.begin());
        if (scores.actions[argmax] == step.target) ++hits;
    }
    loss /= static_cast<double>(steps.size());
    double reg = 0.0;
    for (double t : policy.theta) reg += t * t;
    loss += 0.5 * lambda_l2 * reg;

    std::vector<double> grad = sl_loss_gradient(policy, steps, lambda_l2);
    double norm2 = 0.0;
    for (double g : grad) norm2 += g * g;
    const double norm = std::sqrt(norm2);
    const double scale = norm > 1.0 ? 1.0 / norm : 1.0;
    for (std::size_t f = 0; f < dim; ++f) policy.theta[f] -= learning_rate * scale * grad[f];
    return {loss, static_cast<double>(hits) / static_cast<double>(steps.size())};
}

SolveResult generate_label(const Instance& inst, const EdgeScorePolicy& global_policy,
                           const EdgeScorePolicy& local_policy, const SlConfig& cfg) {
    SolveOptions opts;
    opts.K = cfg.k_label;
    opts.accept = AcceptRule::IfBetter;
    opts.restart = false;
    opts.decode.perm_cfg = cfg.perm_cfg;

    opts.decode.mode = DecodeMode::Beam;
    opts.decode.beam_width = cfg.beam_width;
    SolveResult beam = solve(inst, global_policy, local_policy, opts);

    opts.decode.mode = DecodeMode::Greedy;
    SolveResult greedy = solve(inst, global_policy, local_policy, opts);

    return plan_cost(greedy.plan, inst) < plan_cost(beam.plan, inst) ? std::move(greedy)
                                                                     : std::move(beam);
}

SlResult train_sl(const SlConfig& cfg) {
    if (cfg.rounds < 0) throw ValidationError("train_sl: rounds must be >= 0");
    if (cfg.instances_per_round < 1)
        throw ValidationError("train_sl: instances_per_round must be >= 1");
    if (cfg.beam_width < 1) throw ValidationError("train_sl: beam_width must be >= 1");
    if (cfg.k_label < 0) throw ValidationError("train_sl: k_label must be >= 0");
    if (cfg.bootstrap_steps < 0) throw ValidationError("train_sl: bootstrap_steps must be >= 0");

    SlResult result;
    result.global_policy = zero_policy();
    result.local_policy = zero_policy();

    std::mt19937_64 master(cfg.seed);

    // Sweep bootstrap. Each step fits one sweep-labeled instance; sweeps can
    // exceed the subgraph budget on tight instances and are then skipped.
    int done = 0;
    int attempts = 0;
    const int max_attempts = cfg.bootstrap_steps * 8 + 64;
    while (done < cfg.bootstrap_steps && attempts < max_attempts) {
        ++attempts;
        DistributionSpec spec = cfg.distribution;
        spec.seed = master();
        const Instance inst = generate(spec);
        const PartitionSolution sweep = sweep_decode(inst);
        if (!validate_partition(sweep, inst).ok()) continue;
        const LabelSteps steps = steps_from_label(inst, sweep, cfg.perm_cfg);
        sl_step(result.global_policy, steps.global_steps, cfg.lambda_l2, cfg.learning_rate);
        sl_step(result.local_policy, steps.local_steps, cfg.lambda_l2, cfg.learning_rate);
        ++done;
    }
    if (done < cfg.bootstrap_steps)
        throw ValidationError("train_sl: distribution rejects too many sweep labels");

    std::ofstream cache;
    if (!cfg.label_cache.empty()) {
        cache.open(cfg.label_cache);
        if (!cache) throw IoError("cannot write " + cfg.label_cache.string());
    }

    for (int round = 0; round < cfg.rounds; ++round) {
        double label_cost = 0.0;
        double loss = 0.0;
        double accuracy = 0.0;
        const EdgeScorePolicy label_global = result.global_policy;
        const EdgeScorePolicy label_local = result.local_policy;
        for (int i = 0; i < cfg.instances_per_round; ++i) {
            DistributionSpec spec = cfg.distribution;
            spec.seed = master();
            const Instance inst = generate(spec);
            const SolveResult label = generate_label(inst, label_global, label_local, cfg);
            const double cost = plan_cost(label.plan, inst);
            label_cost += cost;
            if (cache.is_open()) {
                nlohmann::ordered_json row;
                row["round"] = round;
                row["instance_seed"] = spec.seed;
                row["cost"] = cost;
                row["subgraphs"] = label.partition.subgraphs;
                cache << row.dump() << '\n';
            }
            const LabelSteps steps = steps_from_label(inst, label.partition, cfg.perm_cfg);
            const SlReport g =
                sl_step(result.global_policy, steps.global_steps, cfg.lambda_l2,
                        cfg.learning_rate);
            const SlReport l = sl_step(result.local_policy, steps.local_steps, cfg.lambda_l2,
                                       cfg.learning_rate);
            loss += 0.5 * (g.loss + l.loss);
            accuracy += 0.5 * (g.accuracy + l.accuracy);
        }
        const double inv = 1.0 / static_cast<double>(cfg.instances_per_round);
        result.log.push_back({round, label_cost * inv, loss * inv, accuracy * inv});
    }
    return result;
}

}  // namespace hlgp
