// Command-line front end: dataset generation, solving, training, evaluation,
// K sweeps, and SVG rendering. Exit codes: 0 success, 2 validation failure
// (bad arguments or malformed inputs), 1 I/O failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hlgp/bench.hpp"
#include "hlgp/error.hpp"
#include "hlgp/hierarchy.hpp"
#include "hlgp/instance.hpp"
#include "hlgp/policy.hpp"
#include "hlgp/solution.hpp"
#include "hlgp/trainer_rl.hpp"
#include "hlgp/trainer_sl.hpp"

namespace {

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), f, v);
    return buf;
}

hlgp::EdgeScorePolicy load_or_zero(const std::string& path) {
    return path.empty() ? hlgp::zero_policy() : hlgp::load_policy(path);
}

bool on_off(const std::string& value) { return value == "on"; }

struct DecodeFlags {
    std::string global_ckpt;
    std::string local_ckpt;
    int k = 5;
    std::string mode = "greedy";
    int beam = 16;
    std::string accept = "if_better";
    std::string restart = "on";
    std::uint64_t seed = 0;
};

void add_decode_flags(CLI::App* cmd, DecodeFlags& f) {
    cmd->add_option("--global-ckpt", f.global_ckpt,
                    "Coarse-partition policy checkpoint (default: zero policy)");
    cmd->add_option("--local-ckpt", f.local_ckpt,
                    "Pair-refinement policy checkpoint (default: zero policy)");
    cmd->add_option("--K", f.k, "Refinement levels")->capture_default_str();
    cmd->add_option("--mode", f.mode, "Decode mode")
        ->check(CLI::IsMember({"greedy", "sample", "beam"}))
        ->capture_default_str();
    cmd->add_option("--beam", f.beam, "Beam width for --mode beam")->capture_default_str();
    cmd->add_option("--accept", f.accept, "Repartition acceptance rule")
        ->check(CLI::IsMember({"always", "if_better"}))
        ->capture_default_str();
    cmd->add_option("--restart", f.restart, "Re-decode the residual after each coarse subgraph")
        ->check(CLI::IsMember({"on", "off"}))
        ->capture_default_str();
    cmd->add_option("--seed", f.seed, "Decode seed")->capture_default_str();
}

hlgp::SolveOptions to_solve_options(const DecodeFlags& f) {
    hlgp::SolveOptions opts;
    opts.K = f.k;
    opts.accept = hlgp::accept_rule_from_string(f.accept);
    opts.restart = on_off(f.restart);
    opts.decode.mode = hlgp::decode_mode_from_string(f.mode);
    opts.decode.beam_width = f.beam;
    opts.decode.seed = f.seed;
    return opts;
}

struct DistFlags {
    std::string dist = "uniform";
    int n = 100;
    int capacity = 50;
};

void add_dist_flags(CLI::App* cmd, DistFlags& f) {
    cmd->add_option("--dist", f.dist, "Customer distribution")
        ->check(CLI::IsMember({"uniform", "gaussian", "explosion", "rotation"}))
        ->capture_default_str();
    cmd->add_option("--n", f.n, "Customers per instance")->capture_default_str();
    cmd->add_option("--capacity", f.capacity, "Vehicle capacity")->capture_default_str();
}

hlgp::DistributionSpec to_spec(const DistFlags& f) {
    hlgp::DistributionSpec spec;
    spec.kind = hlgp::dist_kind_from_string(f.dist);
    spec.n = f.n;
    spec.capacity = f.capacity;
    return spec;
}

void write_rl_log(const std::vector<hlgp::RlLogRow>& log, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw hlgp::IoError("cannot write " + path);
    out << "iter,mean_reward,grad_norm,eval_cost\n";
    for (const auto& row : log)
        out << row.iteration << ',' << fmt("%.12g", row.mean_reward) << ','
            << fmt("%.12g", row.grad_norm) << ',' << fmt("%.12g", row.eval_cost) << '\n';
    if (!out) throw hlgp::IoError("failed writing " + path);
}

void write_sl_log(const std::vector<hlgp::SlLogRow>& log, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw hlgp::IoError("cannot write " + path);
    out << "round,mean_label_cost,loss,step_accuracy\n";
    for (const auto& row : log)
        out << row.round << ',' << fmt("%.12g", row.mean_label_cost) << ','
            << fmt("%.12g", row.loss) << ',' << fmt("%.12g", row.accuracy) << '\n';
    if (!out) throw hlgp::IoError("failed writing " + path);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hierarchical partition-and-route solver for capacitated routing"};
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "Generate a dataset (one instance JSON per line)");
    DistFlags gen_dist;
    int gen_count = 100;
    std::uint64_t gen_seed = 0;
    std::string gen_out;
    add_dist_flags(gen, gen_dist);
    gen->add_option("--count", gen_count, "Number of instances")->capture_default_str();
    gen->add_option("--seed", gen_seed, "Generator seed")->capture_default_str();
    gen->add_option("--out", gen_out, "Output dataset path")->required();
    gen->callback([&] {
        std::mt19937_64 master(gen_seed);
        if (gen_count < 1) throw hlgp::ValidationError("gen: --count must be >= 1");
        std::vector<hlgp::Instance> instances;
        instances.reserve(gen_count);
        for (int i = 0; i < gen_count; ++i) {
            hlgp::DistributionSpec spec = to_spec(gen_dist);
            spec.seed = master();
            instances.push_back(hlgp::generate(spec));
        }
        hlgp::save_dataset(instances, gen_out);
        std::cout << "wrote " << gen_count << " instances to " << gen_out << "\n";
    });

    // solve
    auto* solve_cmd = app.add_subcommand("solve", "Solve one instance end to end");
    DecodeFlags solve_flags;
    std::string solve_instance, solve_out, solve_partition, solve_trace;
    solve_cmd->add_option("--instance", solve_instance, "Instance JSON path")->required();
    add_decode_flags(solve_cmd, solve_flags);
    solve_cmd->add_option("--out", solve_out, "Solution JSON output path")->required();
    solve_cmd->add_option("--partition", solve_partition, "Also write the final partition JSON");
    solve_cmd->add_option("--trace", solve_trace, "Also write refinement traces (JSON lines)");
    solve_cmd->callback([&] {
        const hlgp::Instance inst = hlgp::load_instance(solve_instance);
        const hlgp::EdgeScorePolicy gp = load_or_zero(solve_flags.global_ckpt);
        const hlgp::EdgeScorePolicy lp = load_or_zero(solve_flags.local_ckpt);
        const hlgp::SolveResult result = hlgp::solve(inst, gp, lp, to_solve_options(solve_flags));
        hlgp::save_plan(result.plan, solve_out);
        if (!solve_partition.empty()) hlgp::save_partition(result.partition, solve_partition);
        if (!solve_trace.empty()) hlgp::save_traces(result.traces, solve_trace);
        std::cout << "cost " << fmt("%.6f", hlgp::plan_cost(result.plan, inst)) << " over "
                  << result.plan.tours.size() << " routes\n";
    });

    // train-rl
    auto* rl = app.add_subcommand("train-rl", "Train both policies with grouped REINFORCE");
    DistFlags rl_dist;
    hlgp::RlConfig rl_cfg;
    std::string rl_out_global, rl_out_local, rl_log, rl_ckpt_dir;
    std::string rl_augment = "on";
    add_dist_flags(rl, rl_dist);
    rl->add_option("--iterations", rl_cfg.iterations, "Training iterations")
        ->capture_default_str();
    rl->add_option("--instances-per-iter", rl_cfg.instances_per_iteration,
                   "Fresh instances per iteration")
        ->capture_default_str();
    rl->add_option("--samples", rl_cfg.n_samples, "Trajectory group size")
        ->capture_default_str();
    rl->add_option("--lr", rl_cfg.learning_rate, "Learning rate")->capture_default_str();
    rl->add_option("--lambda-global", rl_cfg.lambda_global,
                   "Entropy weight, coarse-partition policy")
        ->capture_default_str();
    rl->add_option("--lambda-local", rl_cfg.lambda_local, "Entropy weight, refinement policy")
        ->capture_default_str();
    rl->add_option("--k-train", rl_cfg.k_train, "Refinement levels trained per instance")
        ->capture_default_str();
    rl->add_option("--augment", rl_augment, "Treat residual subproblems as instances")
        ->check(CLI::IsMember({"on", "off"}))
        ->capture_default_str();
    rl->add_option("--eval-every", rl_cfg.eval_every, "Held-out evaluation cadence")
        ->capture_default_str();
    rl->add_option("--eval-instances", rl_cfg.eval_instances, "Held-out set size")
        ->capture_default_str();
    rl->add_option("--ckpt-every", rl_cfg.ckpt_every,
                   "Checkpoint cadence in iterations (0 disables)")
        ->capture_default_str();
    rl->add_option("--ckpt-dir", rl_ckpt_dir, "Checkpoint directory for --ckpt-every");
    rl->add_option("--seed", rl_cfg.seed, "Training seed")->capture_default_str();
    rl->add_option("--out-global", rl_out_global, "Final coarse-policy checkpoint path")
        ->required();
    rl->add_option("--out-local", rl_out_local, "Final refinement-policy checkpoint path")
        ->required();
    rl->add_option("--log", rl_log, "Training log CSV path");
    rl->callback([&] {
        rl_cfg.distribution = to_spec(rl_dist);
        rl_cfg.augment_subproblems = on_off(rl_augment);
        rl_cfg.ckpt_dir = rl_ckpt_dir;
        const hlgp::RlResult result = hlgp::train_rl(rl_cfg);
        hlgp::save_policy(result.global_policy, rl_out_global);
        hlgp::save_policy(result.local_policy, rl_out_local);
        if (!rl_log.empty()) write_rl_log(result.log, rl_log);
        if (!result.log.empty())
            std::cout << "final mean reward " << fmt("%.6f", result.log.back().mean_reward)
                      << ", held-out cost " << fmt("%.6f", result.log.back().eval_cost) << "\n";
        std::cout << "saved checkpoints to " << rl_out_global << " and " << rl_out_local
                  << "\n";
    });

    // train-sl
    auto* sl = app.add_subcommand("train-sl", "Train both policies by self-imitation");
    DistFlags sl_dist;
    hlgp::SlConfig sl_cfg;
    std::string sl_out_global, sl_out_local, sl_log, sl_cache;
    add_dist_flags(sl, sl_dist);
    sl->add_option("--rounds", sl_cfg.rounds, "Self-imitation rounds")->capture_default_str();
    sl->add_option("--instances-per-round", sl_cfg.instances_per_round,
                   "Labeled instances per round")
        ->capture_default_str();
    sl->add_option("--beam", sl_cfg.beam_width, "Label beam width")->capture_default_str();
    sl->add_option("--k-label", sl_cfg.k_label, "Refinement levels inside label generation")
        ->capture_default_str();
    sl->add_option("--lambda", sl_cfg.lambda_l2, "L2 regularization weight")
        ->capture_default_str();
    sl->add_option("--lr", sl_cfg.learning_rate, "Learning rate")->capture_default_str();
    sl->add_option("--bootstrap-steps", sl_cfg.bootstrap_steps,
                   "Warm-up steps on angular-sweep labels")
        ->capture_default_str();
    sl->add_option("--label-cache", sl_cache, "Append generated labels as JSON lines");
    sl->add_option("--seed", sl_cfg.seed, "Training seed")->capture_default_str();
    sl->add_option("--out-global", sl_out_global, "Final coarse-policy checkpoint path")
        ->required();
    sl->add_option("--out-local", sl_out_local, "Final refinement-policy checkpoint path")
        ->required();
    sl->add_option("--log", sl_log, "Training log CSV path");
    sl->callback([&] {
        sl_cfg.distribution = to_spec(sl_dist);
        sl_cfg.label_cache = sl_cache;
        const hlgp::SlResult result = hlgp::train_sl(sl_cfg);
        hlgp::save_policy(result.global_policy, sl_out_global);
        hlgp::save_policy(result.local_policy, sl_out_local);
        if (!sl_log.empty()) write_sl_log(result.log, sl_log);
        if (!result.log.empty())
            std::cout << "final label cost " << fmt("%.6f", result.log.back().mean_label_cost)
                      << ", step accuracy " << fmt("%.4f", result.log.back().accuracy) << "\n";
        std::cout << "saved checkpoints to " << sl_out_global << " and " << sl_out_local
                  << "\n";
    });

    // eval
    auto* ev = app.add_subcommand("eval", "Evaluate a dataset and write per-instance metrics");
    DecodeFlags ev_flags;
    std::string ev_dataset, ev_out;
    ev->add_option("--dataset", ev_dataset, "Dataset path (one instance JSON per line)")
        ->required();
    add_decode_flags(ev, ev_flags);
    ev->add_option("--out", ev_out, "Metrics CSV output path")->required();
    ev->callback([&] {
        const auto instances = hlgp::load_dataset(ev_dataset);
        const hlgp::EdgeScorePolicy gp = load_or_zero(ev_flags.global_ckpt);
        const hlgp::EdgeScorePolicy lp = load_or_zero(ev_flags.local_ckpt);
        const hlgp::EvalReport report =
            hlgp::evaluate(instances, gp, lp, to_solve_options(ev_flags), ev_flags.seed);
        hlgp::write_metrics_csv(report, ev_out);
        std::cout << "avg_cost " << fmt("%.6f", report.avg_cost) << " std_cost "
                  << fmt("%.6f", report.std_cost) << " avg_time_s "
                  << fmt("%.3f", report.avg_time_s) << "\n";
    });

    // k-sweep
    auto* ks = app.add_subcommand("k-sweep", "Evaluate the same dataset across several K");
    DecodeFlags ks_flags;
    std::string ks_dataset, ks_out;
    std::vector<int> ks_list = {0, 1, 2, 3, 4, 5};
    ks->add_option("--dataset", ks_dataset, "Dataset path")->required();
    add_decode_flags(ks, ks_flags);
    ks->add_option("--ks", ks_list, "Comma-separated refinement level counts")
        ->delimiter(',')
        ->capture_default_str();
    ks->add_option("--out", ks_out, "Sweep CSV output path")->required();
    ks->callback([&] {
        const auto instances = hlgp::load_dataset(ks_dataset);
        const hlgp::EdgeScorePolicy gp = load_or_zero(ks_flags.global_ckpt);
        const hlgp::EdgeScorePolicy lp = load_or_zero(ks_flags.local_ckpt);
        const auto reports = hlgp::k_sweep(instances, gp, lp, to_solve_options(ks_flags),
                                           ks_list, ks_flags.seed);
        hlgp::write_ksweep_csv(ks_list, reports, ks_out);
        for (std::size_t i = 0; i < reports.size(); ++i)
            std::cout << reports[i].label << " avg_cost " << fmt("%.6f", reports[i].avg_cost)
                      << " avg_time_s " << fmt("%.3f", reports[i].avg_time_s) << "\n";
    });

    // render
    auto* render = app.add_subcommand("render", "Render a solution as a standalone SVG");
    std::string render_instance, render_solution, render_out;
    render->add_option("--instance", render_instance, "Instance JSON path")->required();
    render->add_option("--solution", render_solution, "Solution JSON path")->required();
    render->add_option("--out", render_out, "SVG output path")->required();
    render->callback([&] {
        const hlgp::Instance inst = hlgp::load_instance(render_instance);
        const hlgp::RoutePlan plan = hlgp::load_plan(render_solution);
        const auto report = hlgp::validate_partition(hlgp::partition_of_plan(plan), inst);
        if (!report.ok())
            throw hlgp::ValidationError("render: infeasible plan: " +
                                        report.violations.front().message);
        std::ofstream out(render_out);
        if (!out) throw hlgp::IoError("cannot write " + render_out);
        out << hlgp::render_svg(inst, plan);
        if (!out) throw hlgp::IoError("failed writing " + render_out);
        std::cout << "wrote " << render_out << "\n";
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const hlgp::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const hlgp::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const hlgp::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
