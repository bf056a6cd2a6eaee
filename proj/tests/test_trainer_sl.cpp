#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "hlgp/error.hpp"
#include "hlgp/trainer_sl.hpp"
#include "oracles.hpp"

using namespace hlgp;

namespace {

EdgeScorePolicy seeded_policy(std::uint64_t seed, double scale = 0.3) {
    EdgeScorePolicy policy = zero_policy();
    std::mt19937_64 rng(seed);
    for (double& t : policy.theta)
        t = scale * (2.0 * (static_cast<double>(rng() >> 11) / 9007199254740992.0) - 1.0);
    return policy;
}

// Replays a labeled step and returns the score distribution at the decision
// point plus the target's position in it.
StepScores replay(const EdgeScorePolicy& policy, const LabeledStep& step, int* target_idx) {
    const DecodeContext ctx{step.inst, step.context, step.min_subgraphs};
    DecodeState state = init_state(ctx);
    for (int action : step.prefix) apply_action(state, ctx, action);
    StepScores scores = score_step(policy, state, ctx);
    const auto it = std::find(scores.actions.begin(), scores.actions.end(), step.target);
    REQUIRE(it != scores.actions.end());
    *target_idx = static_cast<int>(it - scores.actions.begin());
    return scores;
}

}  // namespace

TEST_CASE("labels expand into per-residual global steps and cyclic pair steps") {
    const Instance inst = generate({DistKind::Uniform, 3, 12, 30});
    const PartitionSolution label = sweep_decode(inst);
    REQUIRE(validate_partition(label, inst).ok());
    const int n_c = static_cast<int>(label.subgraphs.size());
    REQUIRE(n_c >= 2);

    const LabelSteps steps = steps_from_label(inst, label, PermSolverConfig{});

    // Global: one customer step per node plus one return per non-final
    // subgraph boundary.
    CHECK(steps.global_steps.size() == inst.size() + static_cast<std::size_t>(n_c - 1));
    int returns = 0;
    for (const auto& step : steps.global_steps)
        if (step.target == kDepotReturn) ++returns;
    CHECK(returns == n_c - 1);

    // Local: every cyclic neighbor pair becomes a two-subgraph decode;
    // each pair contributes its full step sequence minus the forced final
    // return.
    for (const auto& step : steps.local_steps) {
        CHECK(step.min_subgraphs == 2);
        CHECK(step.context.max_returns == 2);
    }
    // Count distinct pair contexts by their node sets.
    std::set<std::vector<int>> contexts;
    for (const auto& step : steps.local_steps) contexts.insert(step.context.nodes);
    CHECK(static_cast<int>(contexts.size()) == n_c);
}

TEST_CASE("every labeled target is feasible at its decision point") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const Instance inst = generate({DistKind::GaussianCluster, seed, 15, 30});
        const PartitionSolution label = sweep_decode(inst);
        if (!validate_partition(label, inst).ok()) continue;
        const LabelSteps steps = steps_from_label(inst, label, PermSolverConfig{});
        const EdgeScorePolicy policy = seeded_policy(seed);
        for (const auto& list : {steps.global_steps, steps.local_steps}) {
            for (const auto& step : list) {
                int idx = -1;
                const StepScores scores = replay(policy, step, &idx);
                CHECK(idx >= 0);
                CHECK(scores.probs[idx] > 0.0);
            }
        }
    }
}

TEST_CASE("global steps replay to the label's own action sequence") {
    // Concatenating each residual frame's prefix-free actions recovers the
    // per-round framing: prefixes grow within a frame and reset across
    // frames.
    const Instance inst = generate({DistKind::Uniform, 11, 10, 30});
    const PartitionSolution label = sweep_decode(inst);
    REQUIRE(validate_partition(label, inst).ok());
    const LabelSteps steps = steps_from_label(inst, label, PermSolverConfig{});
    std::vector<int> covered;
    const EdgeScorePolicy uniform = zero_policy();
    for (const auto& step : steps.global_steps) {
        // Prefix plus target is always a feasible partial sequence.
        int idx = -1;
        const StepScores scores = replay(uniform, step, &idx);
        CHECK(scores.log_probs[idx] <= 0.0);
        if (step.target != kDepotReturn) covered.push_back(step.target);
    }
    std::sort(covered.begin(), covered.end());
    std::vector<int> all(inst.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
    CHECK(covered == all);
}

TEST_CASE("invalid labels are rejected") {
    const Instance inst = generate({DistKind::Uniform, 13, 8, 30});
    PartitionSolution bad = sweep_decode(inst);
    REQUIRE(!bad.subgraphs.empty());
    bad.subgraphs[0].clear();
    CHECK_THROWS_AS(steps_from_label(inst, bad, PermSolverConfig{}), ValidationError);
}

TEST_CASE("supervised loss gradient matches finite differences") {
    const Instance inst = generate({DistKind::Uniform, 17, 9, 30});
    const PartitionSolution label = sweep_decode(inst);
    REQUIRE(validate_partition(label, inst).ok());
    const LabelSteps steps = steps_from_label(inst, label, PermSolverConfig{});
    const EdgeScorePolicy policy = seeded_policy(17);
    const double lambda = 1e-3;

    for (const auto& list : {steps.global_steps, steps.local_steps}) {
        const auto analytic = sl_loss_gradient(policy, list, lambda);
        const auto fd = oracle::central_fd(
            [&](const std::vector<double>& theta) {
                EdgeScorePolicy p = policy;
                p.theta = theta;
                return sl_loss(p, list, lambda);
            },
            policy.theta, 1e-5);
        for (std::size_t f = 0; f < analytic.size(); ++f)
            CHECK(oracle::rel_err(analytic[f], fd[f]) < 1e-6);
    }
}

TEST_CASE("the L2 term penalizes parameter norm") {
    const EdgeScorePolicy policy = seeded_policy(23);
    double sq = 0.0;
    for (double t : policy.theta) sq += t * t;
    // Loss over an empty list is just the regularizer.
    CHECK(sl_loss(policy, {}, 0.5) == doctest::Approx(0.25 * sq).epsilon(1e-14));
    const auto grad = sl_loss_gradient(policy, {}, 0.5);
    for (std::size_t f = 0; f < grad.size(); ++f)
        CHECK(grad[f] == doctest::Approx(0.5 * policy.theta[f]).epsilon(1e-14));
}

TEST_CASE("gradient steps drive the loss down to imitation") {
    const Instance inst = generate({DistKind::Uniform, 29, 10, 30});
    const PartitionSolution label = sweep_decode(inst);
    REQUIRE(validate_partition(label, inst).ok());
    const LabelSteps steps = steps_from_label(inst, label, PermSolverConfig{});

    EdgeScorePolicy policy = zero_policy();
    SlReport first = sl_step(policy, steps.global_steps, 1e-6, 0.1);
    CHECK(first.accuracy >= 0.0);
    CHECK(first.accuracy <= 1.0);
    double prev = first.loss;
    double last_acc = first.accuracy;
    for (int i = 0; i < 200; ++i) {
        const SlReport rep = sl_step(policy, steps.global_steps, 1e-6, 0.1);
        prev = rep.loss;
        last_acc = rep.accuracy;
    }
    CHECK(prev < first.loss);
    CHECK(last_acc >= first.accuracy);
}

TEST_CASE("an empty step list is a no-op that reports clean numbers") {
    EdgeScorePolicy policy = seeded_policy(31);
    const EdgeScorePolicy before = policy;
    const SlReport rep = sl_step(policy, {}, 1e-6, 0.1);
    CHECK(rep.loss == 0.0);
    CHECK(rep.accuracy == 1.0);
    CHECK(policy.theta == before.theta);
}

TEST_CASE("labels come from the better of beam and greedy") {
    SlConfig cfg;
    cfg.distribution = {DistKind::Uniform, 0, 14, 30};
    cfg.beam_width = 8;
    cfg.k_label = 2;
    const PermSolverConfig pcfg;
    for (std::uint64_t seed = 40; seed < 44; ++seed) {
        const Instance inst = generate({DistKind::Uniform, seed, 14, 30});
        const EdgeScorePolicy gp = seeded_policy(seed);
        const EdgeScorePolicy lp = seeded_policy(seed + 1);
        const SolveResult label = generate_label(inst, gp, lp, cfg);
        CHECK(validate_partition(label.partition, inst).ok());
        const double cost = plan_cost(label.plan, inst);

        SolveOptions solve_opts;
        solve_opts.K = cfg.k_label;
        solve_opts.restart = false;
        solve_opts.decode.perm_cfg = pcfg;
        solve_opts.decode.mode = DecodeMode::Beam;
        solve_opts.decode.beam_width = cfg.beam_width;
        const double beam = plan_cost(solve(inst, gp, lp, solve_opts).plan, inst);
        solve_opts.decode.mode = DecodeMode::Greedy;
        const double greedy = plan_cost(solve(inst, gp, lp, solve_opts).plan, inst);
        CHECK(cost <= std::min(beam, greedy) + 1e-12);
    }
}

TEST_CASE("zero rounds return the bootstrap policies deterministically") {
    SlConfig cfg;
    cfg.distribution = {DistKind::Uniform, 2, 12, 30};
    cfg.rounds = 0;
    cfg.bootstrap_steps = 20;
    cfg.seed = 9;
    const SlResult a = train_sl(cfg);
    const SlResult b = train_sl(cfg);
    CHECK(a.global_policy.theta == b.global_policy.theta);
    CHECK(a.local_policy.theta == b.local_policy.theta);
    CHECK(a.log.empty());
    // Bootstrapping actually moved the parameters.
    double moved = 0.0;
    for (double t : a.global_policy.theta) moved += std::abs(t);
    CHECK(moved > 1e-9);
}

TEST_CASE("self-imitation rounds are reproducible and logged") {
    SlConfig cfg;
    cfg.distribution = {DistKind::Uniform, 5, 10, 30};
    cfg.rounds = 2;
    cfg.instances_per_round = 3;
    cfg.beam_width = 4;
    cfg.k_label = 1;
    cfg.bootstrap_steps = 10;
    cfg.seed = 21;
    const SlResult a = train_sl(cfg);
    const SlResult b = train_sl(cfg);
    CHECK(a.global_policy.theta == b.global_policy.theta);
    CHECK(a.local_policy.theta == b.local_policy.theta);
    REQUIRE(a.log.size() == 2);
    for (std::size_t r = 0; r < a.log.size(); ++r) {
        CHECK(a.log[r].round == static_cast<int>(r));
        CHECK(a.log[r].mean_label_cost == b.log[r].mean_label_cost);
        CHECK(a.log[r].loss == b.log[r].loss);
        CHECK(a.log[r].accuracy == b.log[r].accuracy);
        CHECK(a.log[r].mean_label_cost > 0.0);
        CHECK(a.log[r].accuracy >= 0.0);
        CHECK(a.log[r].accuracy <= 1.0);
    }
}

TEST_CASE("the label cache gets one JSON line per generated label") {
    const auto file = std::filesystem::temp_directory_path() / "hlgp_test_labels.jsonl";
    std::filesystem::remove(file);
    SlConfig cfg;
    cfg.distribution = {DistKind::Uniform, 7, 10, 30};
    cfg.rounds = 2;
    cfg.instances_per_round = 3;
    cfg.beam_width = 4;
    cfg.k_label = 1;
    cfg.bootstrap_steps = 5;
    cfg.label_cache = file;
    train_sl(cfg);
    std::ifstream in(file);
    REQUIRE(in.good());
    int lines = 0;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        ++lines;
        CHECK(line.find("\"round\"") != std::string::npos);
        CHECK(line.find("\"instance_seed\"") != std::string::npos);
        CHECK(line.find("\"cost\"") != std::string::npos);
        CHECK(line.find("\"subgraphs\"") != std::string::npos);
    }
    CHECK(lines == cfg.rounds * cfg.instances_per_round);
    std::filesystem::remove(file);
}

TEST_CASE("training validates its configuration") {
    SlConfig cfg;
    cfg.distribution = {DistKind::Uniform, 0, 10, 30};
    cfg.rounds = -1;
    CHECK_THROWS_AS(train_sl(cfg), ValidationError);
    cfg.rounds = 1;
    cfg.instances_per_round = 0;
    CHECK_THROWS_AS(train_sl(cfg), ValidationError);
    cfg.instances_per_round = 1;
    cfg.beam_width = 0;
    CHECK_THROWS_AS(train_sl(cfg), ValidationError);
}
