#include "hlgp/policy.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

#include "hlgp/error.hpp"

namespace hlgp {

using json = nlohmann::ordered_json;

DecodeState init_state(const DecodeContext& ctx) {
    if (ctx.inst == nullptr) throw ValidationError("decode: null instance");
    if (ctx.sub.nodes.empty()) throw ValidationError("decode: empty subproblem");
    if (ctx.sub.capacity <= 0) throw ValidationError("decode: non-positive capacity");
    if (ctx.sub.max_returns < 1) throw ValidationError("decode: max_returns must be >= 1");
    if (ctx.min_subgraphs > ctx.sub.max_returns)
        throw ValidationError("decode: min_subgraphs exceeds max_returns");
    if (ctx.min_subgraphs > static_cast<int>(ctx.sub.nodes.size()))
        throw ValidationError("decode: min_subgraphs exceeds node count");
    DecodeState state;
    state.remaining = ctx.sub.nodes;
    std::sort(state.remaining.begin(), state.remaining.end());
    for (int idx : state.remaining) {
        if (idx < 0 || idx >= ctx.inst->size())
            throw ValidationError("decode: node index " + std::to_string(idx) + " out of range");
        if (ctx.inst->demands[idx] > ctx.sub.capacity)
            throw ValidationError("decode: demand of node " + std::to_string(idx) +
                                  " exceeds capacity");
    }
    if (std::adjacent_find(state.remaining.begin(), state.remaining.end()) !=
        state.remaining.end())
        throw ValidationError("decode: duplicate node in subproblem");
    state.remaining_capacity = ctx.sub.capacity;
    return state;
}

bool finished(const DecodeState& state) { return state.remaining.empty(); }

std::vector<int> feasible_actions(const DecodeState& state, const DecodeContext& ctx) {
    if (finished(state)) return {};
    const Instance& inst = *ctx.inst;
    std::vector<int> actions;
    actions.reserve(state.remaining.size() + 1);

    long long rest = 0;
    // Two smallest demands among the remaining pool, for the one-step lookahead below.
    int min1 = std::numeric_limits<int>::max();
    int min2 = std::numeric_limits<int>::max();
    int min1_count = 0;
    for (int j : state.remaining) {
        const int d = inst.demands[j];
        rest += d;
        if (d < min1) {
            min2 = min1;
            min1 = d;
            min1_count = 1;
        } else if (d == min1) {
            min1_count += 1;
        } else if (d < min2) {
            min2 = d;
        }
    }
    const long long return_room =
        static_cast<long long>(ctx.sub.max_returns - state.returns_used - 1) *
        ctx.sub.capacity;
    const bool budget_left = state.returns_used < ctx.sub.max_returns;

    // Subgraphs the decode must still open after the current one closes.
    const int future_needed = std::max(0, ctx.min_subgraphs - state.returns_used - 1);
    std::vector<int> dead_end;
    for (int j : state.remaining) {
        const int d = inst.demands[j];
        if (d > state.remaining_capacity) continue;
        if (static_cast<int>(state.remaining.size()) - 1 < future_needed) continue;
        if (state.remaining.size() > 1) {
            // One-step lookahead: after taking j some customer must still fit or a
            // guard-legal return must exist, else the decode would be forced into an
            // over-budget return.
            const int next_min = (d == min1 && min1_count == 1) ? min2 : min1;
            const bool customer_alive = next_min <= state.remaining_capacity - d;
            const bool return_alive = budget_left && rest - d <= return_room;
            if (!customer_alive && !return_alive) {
                dead_end.push_back(j);
                continue;
            }
        }
        actions.push_back(j);
    }

    const bool return_ok =
        !state.current.empty() && budget_left && rest <= return_room;
    if (return_ok) actions.push_back(kDepotReturn);

    // Every fitting customer sits one step from a dead end: allow them anyway and let
    // the forced return below absorb the overflow rather than stalling the decode.
    if (actions.empty() && !dead_end.empty()) actions = std::move(dead_end);

    // No customer fits: the return happens regardless of the packing guard.
    if (actions.empty()) {
        if (state.current.empty())
            throw InternalError("feasible_actions: no action from an empty subgraph");
        actions.push_back(kDepotReturn);
    }
    return actions;
}

void apply_action(DecodeState& state, const DecodeContext& ctx, int action) {
    if (action == kDepotReturn) {
        if (state.current.empty())
            throw InternalError("apply_action: depot-return with empty subgraph");
        state.completed.push_back(std::move(state.current));
        state.current.clear();
        state.remaining_capacity = ctx.sub.capacity;
        state.returns_used += 1;
        return;
    }
    const auto it = std::lower_bound(state.remaining.begin(), state.remaining.end(), action);
    if (it == state.remaining.end() || *it != action)
        throw InternalError("apply_action: node " + std::to_string(action) + " not remaining");
    state.remaining.erase(it);
    state.current.push_back(action);
    state.remaining_capacity -= ctx.inst->demands[action];
    if (state.remaining_capacity < 0)
        throw InternalError("apply_action: capacity underflow");
}

PartitionSolution extract_partition(const DecodeState& state) {
    if (!finished(state)) throw InternalError("extract_partition: decode not finished");
    PartitionSolution p;
    p.subgraphs = state.completed;
    if (!state.current.empty()) p.subgraphs.push_back(state.current);
    return p;
}

const std::vector<std::string>& policy_feature_names() {
    static const std::vector<std::string> names = {
        "dist_last",      "dist_depot", "demand_ratio",  "capacity_ratio",
        "remaining_frac", "angle_gap",  "is_return",     "mean_dist_5nn",
        "savings",        "dist_centroid", "slack_after", "nn1_dist",
    };
    return names;
}

EdgeScorePolicy zero_policy() {
    EdgeScorePolicy p;
    p.feature_spec = policy_feature_names();
    p.theta.assign(p.feature_spec.size(), 0.0);
    p.temperature = 1.0;
    return p;
}

std::vector<double> compute_features(const DecodeState& state, const DecodeContext& ctx,
                                     int action) {
    const Instance& inst = *ctx.inst;
    const bool is_return = action == kDepotReturn;
    const Point node = is_return ? inst.depot : inst.customers.at(action);
    const Point last =
        state.current.empty() ? inst.depot : inst.customers[state.current.back()];
    const double cap = ctx.sub.capacity;

    Point centroid = inst.depot;  // empty subgraph: the depot stands in
    if (!state.current.empty()) {
        centroid = {0.0, 0.0};
        for (int j : state.current) {
            centroid.x += inst.customers[j].x;
            centroid.y += inst.customers[j].y;
        }
        centroid.x /= static_cast<double>(state.current.size());
        centroid.y /= static_cast<double>(state.current.size());
    }

    std::vector<double> phi(12, 0.0);
    phi[0] = dist(last, node);
    phi[1] = dist(inst.depot, node);
    phi[2] = is_return ? 0.0 : inst.demands[action] / cap;
    phi[3] = state.remaining_capacity / cap;
    phi[4] = static_cast<double>(state.remaining.size()) /
             static_cast<double>(ctx.sub.nodes.size());
    if (!is_return && !state.current.empty())
        phi[5] = angle_gap(polar_angle(inst.depot, node), polar_angle(inst.depot, centroid));
    phi[6] = is_return ? 1.0 : 0.0;

    // Mean distance to the five nearest still-unassigned customers (excluding
    // the candidate itself), and the distance to the single nearest one.
    std::vector<double> dists;
    dists.reserve(state.remaining.size());
    for (int j : state.remaining) {
        if (!is_return && j == action) continue;
        dists.push_back(dist(node, inst.customers[j]));
    }
    if (!dists.empty()) {
        const std::size_t k = std::min<std::size_t>(5, dists.size());
        std::nth_element(dists.begin(), dists.begin() + (k - 1), dists.end());
        double sum = 0.0;
        for (std::size_t i = 0; i < k; ++i) sum += dists[i];
        phi[7] = sum / static_cast<double>(k);
        phi[11] = *std::min_element(dists.begin(), dists.begin() + k);
    }

    // Detour of serving the candidate from the current tour end vs returning
    // now: dist(last, j) + dist(j, depot) - dist(last, depot).
    phi[8] = is_return ? 0.0 : phi[0] + phi[1] - dist(last, inst.depot);
    phi[9] = dist(node, centroid);
    // Capacity left after taking the action; for a return this is the load
    // the closing subgraph wastes.
    phi[10] = is_return ? state.remaining_capacity / cap
                        : (state.remaining_capacity - inst.demands[action]) / cap;
    return phi;
}

StepScores score_step(const EdgeScorePolicy& policy, const DecodeState& state,
                      const DecodeContext& ctx) {
    if (policy.theta.size() != policy_feature_names().size())
        throw ValidationError("policy: theta size " + std::to_string(policy.theta.size()) +
                              " does not match feature count");
    if (!(policy.temperature > 0.0))
        throw ValidationError("policy: temperature must be positive");

    StepScores scores;
    scores.actions = feasible_actions(state, ctx);
    scores.temperature = policy.temperature;
    scores.forced = scores.actions.size() == 1;
    const std::size_t n = scores.actions.size();
    scores.features.reserve(n);

    std::vector<double> logits(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto phi = compute_features(state, ctx, scores.actions[i]);
        double z = 0.0;
        for (std::size_t f = 0; f < phi.size(); ++f) {
            if (!std::isfinite(phi[f]))
                throw ValidationError("policy: non-finite feature '" +
                                      policy_feature_names()[f] + "'");
            z += policy.theta[f] * phi[f];
        }
        logits[i] = z / policy.temperature;
        scores.features.push_back(std::move(phi));
    }

    const double zmax = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double z : logits) sum += std::exp(z - zmax);
    const double log_sum = std::log(sum);
    scores.probs.resize(n);
    scores.log_probs.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        scores.log_probs[i] = logits[i] - zmax - log_sum;
        scores.probs[i] = std::exp(scores.log_probs[i]);
    }
    return scores;
}

std::vector<double> grad_log_prob(const StepScores& scores, int picked) {
    const std::size_t dim = scores.features.at(picked).size();
    std::vector<double> mean(dim, 0.0);
    for (std::size_t i = 0; i < scores.actions.size(); ++i)
        for (std::size_t f = 0; f < dim; ++f) mean[f] += scores.probs[i] * scores.features[i][f];
    std::vector<double> grad(dim);
    for (std::size_t f = 0; f < dim; ++f)
        grad[f] = (scores.features[picked][f] - mean[f]) / scores.temperature;
    return grad;
}

double step_entropy(const StepScores& scores) {
    double h = 0.0;
    for (std::size_t i = 0; i < scores.actions.size(); ++i)
        h -= scores.probs[i] * scores.log_probs[i];
    return h;
}

std::vector<double> step_entropy_grad(const StepScores& scores) {
    const std::size_t dim = scores.features.empty() ? 0 : scores.features[0].size();
    std::vector<double> mean_phi(dim, 0.0);
    double mean_logp = 0.0;
    for (std::size_t i = 0; i < scores.actions.size(); ++i) {
        mean_logp += scores.probs[i] * scores.log_probs[i];
        for (std::size_t f = 0; f < dim; ++f)
            mean_phi[f] += scores.probs[i] * scores.features[i][f];
    }
    std::vector<double> grad(dim, 0.0);
    for (std::size_t i = 0; i < scores.actions.size(); ++i) {
        const double w = scores.probs[i] * (scores.log_probs[i] - mean_logp);
        for (std::size_t f = 0; f < dim; ++f) grad[f] += w * scores.features[i][f];
    }
    for (std::size_t f = 0; f < dim; ++f) grad[f] = -grad[f] / scores.temperature;
    return grad;
}

std::string to_string(DecodeMode mode) {
    switch (mode) {
        case DecodeMode::Greedy: return "greedy";
        case DecodeMode::Sample: return "sample";
        case DecodeMode::Beam: return "beam";
    }
    throw InternalError("to_string: unknown DecodeMode");
}

DecodeMode decode_mode_from_string(const std::string& name) {
    if (name == "greedy") return DecodeMode::Greedy;
    if (name == "sample") return DecodeMode::Sample;
    if (name == "beam") return DecodeMode::Beam;
    throw ValidationError("unknown decode mode '" + name + "' (expected greedy|sample|beam)");
}

std::size_t GCostCache::KeyHash::operator()(const std::vector<int>& v) const {
    std::size_t h = 1469598103934665603ull;
    for (int x : v) {
        h ^= static_cast<std::size_t>(x) + 0x9e3779b97f4a7c15ull;
        h *= 1099511628211ull;
    }
    return h;
}

GCostCache::GCostCache(const Instance& inst, PermSolverConfig cfg)
    : inst_(&inst), cfg_(std::move(cfg)) {}

double GCostCache::g(std::span<const int> subgraph) {
    std::vector<int> key(subgraph.begin(), subgraph.end());
    std::sort(key.begin(), key.end());
    const auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
    const double cost = g_cost(key, *inst_, cfg_);
    memo_.emplace(std::move(key), cost);
    return cost;
}

double GCostCache::f(const PartitionSolution& partition) {
    double total = 0.0;
    for (const auto& sub : partition.subgraphs) total += g(sub);
    return total;
}

namespace {

double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0);
}

int pick_greedy(const StepScores& scores) {
    int best = 0;
    for (std::size_t i = 1; i < scores.probs.size(); ++i)
        if (scores.probs[i] > scores.probs[best]) best = static_cast<int>(i);
    return best;
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

DecodeResult decode_single(const EdgeScorePolicy& policy, const DecodeContext& ctx,
                           DecodeMode mode, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    DecodeState state = init_state(ctx);
    DecodeResult result;
    while (!finished(state)) {
        const StepScores scores = score_step(policy, state, ctx);
        const int k = mode == DecodeMode::Sample ? pick_sample(scores, rng) : pick_greedy(scores);
        result.actions.push_back(scores.actions[k]);
        result.step_log_probs.push_back(scores.log_probs[k]);
        result.log_prob += scores.log_probs[k];
        apply_action(state, ctx, scores.actions[k]);
    }
    result.partition = extract_partition(state);
    return result;
}

struct BeamItem {
    DecodeState state;
    double log_prob = 0.0;
    std::vector<int> actions;
    std::vector<double> step_log_probs;
};

DecodeResult decode_beam(const EdgeScorePolicy& policy, const DecodeContext& ctx,
                         const DecodeOptions& opts, GCostCache* cache) {
    // Finished sequences keep their beam slots and compete on log-probability
    // like any other partial; the search ends once no unfinished sequence
    // survives the cut, and the surviving finished beams are ranked by plan
    // cost (ties fall back to log-probability).
    std::vector<BeamItem> beam;
    beam.push_back({init_state(ctx), 0.0, {}, {}});

    for (;;) {
        bool any_active = false;
        std::vector<BeamItem> expanded;
        for (auto& item : beam) {
            if (finished(item.state)) {
                expanded.push_back(std::move(item));
                continue;
            }
            any_active = true;
            const StepScores scores = score_step(policy, item.state, ctx);
            for (std::size_t k = 0; k < scores.actions.size(); ++k) {
                BeamItem next;
                next.state = item.state;
                apply_action(next.state, ctx, scores.actions[k]);
                next.log_prob = item.log_prob + scores.log_probs[k];
                next.actions = item.actions;
                next.actions.push_back(scores.actions[k]);
                next.step_log_probs = item.step_log_probs;
                next.step_log_probs.push_back(scores.log_probs[k]);
                expanded.push_back(std::move(next));
            }
        }
        if (!any_active) {
            beam = std::move(expanded);
            break;
        }
        std::stable_sort(expanded.begin(), expanded.end(),
                         [](const BeamItem& a, const BeamItem& b) {
                             return a.log_prob > b.log_prob;
                         });
        if (static_cast<int>(expanded.size()) > opts.beam_width)
            expanded.resize(opts.beam_width);
        beam = std::move(expanded);
    }

    GCostCache local_cache(*ctx.inst, opts.perm_cfg);
    GCostCache& gc = cache != nullptr ? *cache : local_cache;
    int best = -1;
    double best_cost = std::numeric_limits<double>::infinity();
    std::vector<PartitionSolution> partitions(beam.size());
    for (std::size_t i = 0; i < beam.size(); ++i) {
        partitions[i] = extract_partition(beam[i].state);
        const double cost = gc.f(partitions[i]);
        const bool better =
            cost < best_cost ||
            (cost == best_cost && best >= 0 && beam[i].log_prob > beam[best].log_prob);
        if (best < 0 || better) {
            best = static_cast<int>(i);
            best_cost = cost;
        }
    }

    DecodeResult result;
    result.partition = std::move(partitions[best]);
    result.log_prob = beam[best].log_prob;
    result.actions = std::move(beam[best].actions);
    result.step_log_probs = std::move(beam[best].step_log_probs);
    return result;
}

}  // namespace

DecodeResult decode(const EdgeScorePolicy& policy, const DecodeContext& ctx,
                    const DecodeOptions& opts, GCostCache* cache) {
    if (opts.mode == DecodeMode::Beam) {
        if (opts.beam_width < 1) throw ValidationError("decode: beam_width must be >= 1");
        return decode_beam(policy, ctx, opts, cache);
    }
    return decode_single(policy, ctx, opts.mode, opts.seed);
}

double sequence_log_prob(const EdgeScorePolicy& policy, const DecodeContext& ctx,
                         std::span<const int> actions) {
    DecodeState state = init_state(ctx);
    double total = 0.0;
    for (int action : actions) {
        const StepScores scores = score_step(policy, state, ctx);
        const auto it = std::find(scores.actions.begin(), scores.actions.end(), action);
        if (it == scores.actions.end())
            throw ValidationError("sequence_log_prob: action " + std::to_string(action) +
                                  " infeasible at its step");
        total += scores.log_probs[it - scores.actions.begin()];
        apply_action(state, ctx, action);
    }
    if (!finished(state))
        throw ValidationError("sequence_log_prob: sequence does not cover the subproblem");
    return total;
}

PartitionSolution sweep_decode(const Instance& inst) {
    std::vector<int> order(inst.customers.size());
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> angle(inst.customers.size());
    for (std::size_t i = 0; i < angle.size(); ++i)
        angle[i] = polar_angle(inst.depot, inst.customers[i]);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return angle[a] < angle[b]; });

    PartitionSolution p;
    std::vector<int> current;
    int load = 0;
    for (int j : order) {
        if (load + inst.demands[j] > inst.capacity) {
            p.subgraphs.push_back(current);
            current.clear();
            load = 0;
        }
        current.push_back(j);
        load += inst.demands[j];
    }
    if (!current.empty()) p.subgraphs.push_back(current);
    return p;
}

std::string policy_to_json(const EdgeScorePolicy& policy) {
    json j;
    j["theta"] = policy.theta;
    j["feature_spec"] = policy.feature_spec;
    j["temperature"] = policy.temperature;
    return j.dump();
}

EdgeScorePolicy policy_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("policy: invalid JSON: ") + e.what());
    }
    for (const char* field : {"theta", "feature_spec", "temperature"})
        if (!j.contains(field))
            throw ParseError(std::string("policy: missing field '") + field + "'");
    EdgeScorePolicy p;
    if (!j["theta"].is_array()) throw ParseError("policy: field 'theta' must be an array");
    p.theta = j["theta"].get<std::vector<double>>();
    if (!j["feature_spec"].is_array())
        throw ParseError("policy: field 'feature_spec' must be an array");
    p.feature_spec = j["feature_spec"].get<std::vector<std::string>>();
    if (!j["temperature"].is_number())
        throw ParseError("policy: field 'temperature' must be a number");
    p.temperature = j["temperature"].get<double>();

    if (p.feature_spec != policy_feature_names()) {
        std::string expected;
        for (const auto& n : policy_feature_names()) expected += n + " ";
        throw ValidationError("policy: feature_spec does not match the built-in features (" +
                              expected + ")");
    }
    if (p.theta.size() != p.feature_spec.size())
        throw ValidationError("policy: theta size " + std::to_string(p.theta.size()) +
                              " does not match feature_spec size " +
                              std::to_string(p.feature_spec.size()));
    if (!(p.temperature > 0.0)) throw ValidationError("policy: temperature must be positive");
    return p;
}

void save_policy(const EdgeScorePolicy& policy, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out << policy_to_json(policy) << "\n";
    if (!out) throw IoError("write failed: " + path.string());
}

EdgeScorePolicy load_policy(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open for reading: " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return policy_from_json(buf.str());
}

}  // namespace hlgp
