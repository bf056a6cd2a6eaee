#include "hlgp/hierarchy.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "hlgp/error.hpp"

namespace hlgp {

using json = nlohmann::ordered_json;

PartitionSolution order_by_polar(const PartitionSolution& partition, const Instance& inst) {
    const std::size_t n = partition.subgraphs.size();
    std::vector<double> key(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& sub = partition.subgraphs[i];
        if (sub.empty()) throw ValidationError("order_by_polar: empty subgraph");
        Point centroid{0.0, 0.0};
        for (int j : sub) {
            centroid.x += inst.customers.at(j).x;
            centroid.y += inst.customers.at(j).y;
        }
        centroid.x /= static_cast<double>(sub.size());
        centroid.y /= static_cast<double>(sub.size());
        // Depot-coincident centroids have no angle; they sort before angle 0.
        key[i] = centroid == inst.depot ? -1.0 : polar_angle(inst.depot, centroid);
    }
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return key[a] < key[b]; });
    PartitionSolution out;
    out.subgraphs.reserve(n);
    for (int i : order) out.subgraphs.push_back(partition.subgraphs[i]);
    return out;
}

std::vector<PairTask> build_subproblems(const PartitionSolution& partition, int k, int capacity) {
    if (k < 1) throw ValidationError("build_subproblems: level k must be >= 1");
    if (capacity <= 0) throw ValidationError("build_subproblems: capacity must be positive");
    const int n_c = static_cast<int>(partition.subgraphs.size());
    std::vector<PairTask> tasks;
    if (n_c < 2) return tasks;
    tasks.reserve(n_c / 2);
    for (int j = 0; j < n_c / 2; ++j) {
        const int m = 2 * j;
        PairTask task;
        task.pos_a = (m + k - 1) % n_c;
        task.pos_b = (m + k) % n_c;
        const auto& a = partition.subgraphs[task.pos_a];
        const auto& b = partition.subgraphs[task.pos_b];
        task.sub.nodes.reserve(a.size() + b.size());
        task.sub.nodes.insert(task.sub.nodes.end(), a.begin(), a.end());
        task.sub.nodes.insert(task.sub.nodes.end(), b.begin(), b.end());
        std::sort(task.sub.nodes.begin(), task.sub.nodes.end());
        task.sub.capacity = capacity;
        task.sub.max_returns = 2;
        tasks.push_back(std::move(task));
    }
    return tasks;
}

std::string to_string(AcceptRule rule) {
    switch (rule) {
        case AcceptRule::Always: return "always";
        case AcceptRule::IfBetter: return "if_better";
    }
    throw InternalError("to_string: unknown AcceptRule");
}

AcceptRule accept_rule_from_string(const std::string& name) {
    if (name == "always") return AcceptRule::Always;
    if (name == "if_better") return AcceptRule::IfBetter;
    throw ValidationError("unknown accept rule '" + name + "' (expected always|if_better)");
}

RefineResult refine_level(const PartitionSolution& prev, const Instance& inst, int k,
                          const EdgeScorePolicy& local_policy, AcceptRule accept,
                          const DecodeOptions& opts, GCostCache* cache) {
    GCostCache local_cache(inst, opts.perm_cfg);
    GCostCache& gc = cache != nullptr ? *cache : local_cache;

    RefineResult result;
    result.partition = prev;
    const auto tasks = build_subproblems(prev, k, inst.capacity);
    for (std::size_t j = 0; j < tasks.size(); ++j) {
        const auto& task = tasks[j];
        DecodeContext ctx;
        ctx.inst = &inst;
        ctx.sub = task.sub;
        ctx.min_subgraphs = 2;
        DecodeOptions pair_opts = opts;
        pair_opts.seed = opts.seed + 1000003ull * static_cast<std::uint64_t>(k) + j;
        const DecodeResult decoded = decode(local_policy, ctx, pair_opts, &gc);

        LevelTrace trace;
        trace.level = k;
        trace.pair_index = static_cast<int>(j);
        trace.before = {prev.subgraphs[task.pos_a], prev.subgraphs[task.pos_b]};
        // Adversarial demand sets can force the decode past the two-return budget; such
        // a repartition cannot replace the pair slot-for-slot, so it is rejected outright.
        const bool two_way = decoded.partition.subgraphs.size() == 2;
        const double h_before = gc.g(trace.before[0]) + gc.g(trace.before[1]);
        const double h_after =
            two_way ? gc.g(decoded.partition.subgraphs[0]) + gc.g(decoded.partition.subgraphs[1])
                    : h_before;

        const bool take = two_way && (accept == AcceptRule::Always || h_after < h_before);
        if (take) {
            trace.after = {decoded.partition.subgraphs[0], decoded.partition.subgraphs[1]};
            trace.delta = h_after - h_before;
            result.partition.subgraphs[task.pos_a] = decoded.partition.subgraphs[0];
            result.partition.subgraphs[task.pos_b] = decoded.partition.subgraphs[1];
        } else {
            trace.after = trace.before;
            trace.delta = 0.0;
        }
        result.traces.push_back(std::move(trace));
    }
    return result;
}

PartitionSolution global_partition(const Instance& inst, const EdgeScorePolicy& policy,
                                   const DecodeOptions& opts, bool use_subproblem_restart,
                                   GCostCache* cache) {
    DecodeContext ctx;
    ctx.inst = &inst;
    ctx.sub = as_subproblem(inst);
    if (!use_subproblem_restart) return decode(policy, ctx, opts, cache).partition;

    PartitionSolution partition;
    std::uint64_t round = 0;
    while (!ctx.sub.nodes.empty()) {
        DecodeOptions round_opts = opts;
        round_opts.seed = opts.seed + round;
        const DecodeResult res = decode(policy, ctx, round_opts, cache);
        const auto& first = res.partition.subgraphs.front();
        partition.subgraphs.push_back(first);

        std::vector<int> rest;
        rest.reserve(ctx.sub.nodes.size() - first.size());
        std::vector<int> sorted_first = first;
        std::sort(sorted_first.begin(), sorted_first.end());
        for (int node : ctx.sub.nodes)
            if (!std::binary_search(sorted_first.begin(), sorted_first.end(), node))
                rest.push_back(node);
        ctx.sub.nodes = std::move(rest);
        ctx.sub.max_returns = std::max(1, ctx.sub.max_returns - 1);
        ++round;
    }
    return partition;
}

SolveResult solve(const Instance& inst, const EdgeScorePolicy& global_policy,
                  const EdgeScorePolicy& local_policy, const SolveOptions& opts) {
    if (opts.K < 0) throw ValidationError("solve: K must be >= 0");
    GCostCache cache(inst, opts.decode.perm_cfg);

    SolveResult result;
    result.partition = global_partition(inst, global_policy, opts.decode, opts.restart, &cache);
    result.partition = order_by_polar(result.partition, inst);
    for (int k = 1; k <= opts.K; ++k) {
        RefineResult refined =
            refine_level(result.partition, inst, k, local_policy, opts.accept, opts.decode, &cache);
        result.partition = std::move(refined.partition);
        result.traces.insert(result.traces.end(), refined.traces.begin(), refined.traces.end());
        if (opts.reorder_each_level) result.partition = order_by_polar(result.partition, inst);
    }

    result.plan.tours.reserve(result.partition.subgraphs.size());
    for (const auto& sub : result.partition.subgraphs)
        result.plan.tours.push_back(solve_tour(sub, inst, opts.decode.perm_cfg));
    return result;
}

double f_cost(const PartitionSolution& partition, const Instance& inst,
              const PermSolverConfig& cfg) {
    double total = 0.0;
    for (const auto& sub : partition.subgraphs) total += g_cost(sub, inst, cfg);
    return total;
}

std::string trace_to_json(const LevelTrace& trace) {
    json j;
    j["level"] = trace.level;
    j["pair"] = trace.pair_index;
    j["before"] = {trace.before[0], trace.before[1]};
    j["after"] = {trace.after[0], trace.after[1]};
    j["delta"] = trace.delta;
    return j.dump();
}

LevelTrace trace_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("trace: invalid JSON: ") + e.what());
    }
    for (const char* field : {"level", "pair", "before", "after", "delta"})
        if (!j.contains(field))
            throw ParseError(std::string("trace: missing field '") + field + "'");
    LevelTrace t;
    t.level = j["level"].get<int>();
    t.pair_index = j["pair"].get<int>();
    auto pair_of = [](const json& arr, const char* field) {
        if (!arr.is_array() || arr.size() != 2)
            throw ParseError(std::string("trace: field '") + field +
                             "' must hold exactly two subgraphs");
        return std::array<std::vector<int>, 2>{arr[0].get<std::vector<int>>(),
                                               arr[1].get<std::vector<int>>()};
    };
    t.before = pair_of(j["before"], "before");
    t.after = pair_of(j["after"], "after");
    t.delta = j["delta"].get<double>();
    return t;
}

void save_traces(std::span<const LevelTrace> traces, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    for (const auto& t : traces) out << trace_to_json(t) << "\n";
    if (!out) throw IoError("write failed: " + path.string());
}

std::vector<LevelTrace> load_traces(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open for reading: " + path.string());
    std::vector<LevelTrace> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            out.push_back(trace_from_json(line));
        } catch (const std::exception& e) {
            throw ParseError("trace line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

}  // namespace hlgp
