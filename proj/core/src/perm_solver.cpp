#include "hlgp/perm_solver.hpp"

#include <algorithm>
#include <limits>

#include "hlgp/error.hpp"
#include "hlgp/solution.hpp"

namespace hlgp {

namespace {

constexpr double kMinGain = 1e-12;

// Held-Karp over subsets: dp[mask][j] = cheapest depot-anchored path visiting
// exactly `mask` and ending at local node j.
std::vector<int> solve_exact(const std::vector<int>& nodes, const Instance& inst) {
    const int m = static_cast<int>(nodes.size());
    std::vector<double> d_depot(m);
    std::vector<double> d(m * m);
    for (int i = 0; i < m; ++i) {
        d_depot[i] = dist(inst.depot, inst.customers.at(nodes[i]));
        for (int j = 0; j < m; ++j)
            d[i * m + j] = dist(inst.customers.at(nodes[i]), inst.customers.at(nodes[j]));
    }

    const std::size_t n_masks = std::size_t{1} << m;
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dp(n_masks * m, inf);
    std::vector<int> parent(n_masks * m, -1);
    for (int j = 0; j < m; ++j) dp[(std::size_t{1} << j) * m + j] = d_depot[j];

    for (std::size_t mask = 1; mask < n_masks; ++mask) {
        for (int j = 0; j < m; ++j) {
            if (!(mask & (std::size_t{1} << j))) continue;
            const double base = dp[mask * m + j];
            if (base == inf) continue;
            for (int k = 0; k < m; ++k) {
                if (mask & (std::size_t{1} << k)) continue;
                const std::size_t next = mask | (std::size_t{1} << k);
                const double cand = base + d[j * m + k];
                if (cand < dp[next * m + k]) {
                    dp[next * m + k] = cand;
                    parent[next * m + k] = j;
                }
            }
        }
    }

    const std::size_t full = n_masks - 1;
    int best_end = 0;
    double best = inf;
    for (int j = 0; j < m; ++j) {
        const double total = dp[full * m + j] + d_depot[j];
        if (total < best) {
            best = total;
            best_end = j;
        }
    }

    std::vector<int> order(m);
    std::size_t mask = full;
    int j = best_end;
    for (int pos = m - 1; pos >= 0; --pos) {
        order[pos] = nodes[j];
        const int prev = parent[mask * m + j];
        mask &= ~(std::size_t{1} << j);
        j = prev;
    }
    return order;
}

std::vector<int> nearest_neighbor(const std::vector<int>& nodes, const Instance& inst) {
    std::vector<int> order;
    order.reserve(nodes.size());
    std::vector<char> used(nodes.size(), 0);
    Point at = inst.depot;
    for (std::size_t step = 0; step < nodes.size(); ++step) {
        int best = -1;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            if (used[i]) continue;
            const double di = dist(at, inst.customers.at(nodes[i]));
            if (di < best_d) {
                best_d = di;
                best = static_cast<int>(i);
            }
        }
        used[best] = 1;
        order.push_back(nodes[best]);
        at = inst.customers[nodes[best]];
    }
    return order;
}

// Point at tour position i, with depot sentinels at -1 and size().
Point at_pos(const std::vector<int>& tour, int i, const Instance& inst) {
    if (i < 0 || i >= static_cast<int>(tour.size())) return inst.depot;
    return inst.customers[tour[i]];
}

bool two_opt_pass(std::vector<int>& tour, const Instance& inst) {
    const int m = static_cast<int>(tour.size());
    bool improved = false;
    for (int i = 0; i < m - 1; ++i) {
        for (int j = i + 1; j < m; ++j) {
            const Point a = at_pos(tour, i - 1, inst);
            const Point b = at_pos(tour, i, inst);
            const Point c = at_pos(tour, j, inst);
            const Point e = at_pos(tour, j + 1, inst);
            const double delta = dist(a, c) + dist(b, e) - dist(a, b) - dist(c, e);
            if (delta < -kMinGain) {
                std::reverse(tour.begin() + i, tour.begin() + j + 1);
                improved = true;
            }
        }
    }
    return improved;
}

bool or_opt_pass(std::vector<int>& tour, const Instance& inst, std::span<const int> lengths) {
    bool improved = false;
    for (int len : lengths) {
        if (len <= 0 || len >= static_cast<int>(tour.size())) continue;
        const int m = static_cast<int>(tour.size());
        for (int s = 0; s + len <= m; ++s) {
            const Point before = at_pos(tour, s - 1, inst);
            const Point front = at_pos(tour, s, inst);
            const Point back = at_pos(tour, s + len - 1, inst);
            const Point after = at_pos(tour, s + len, inst);
            const double removal = dist(before, after) - dist(before, front) - dist(back, after);
            // Reinsert between original positions p and p+1; slots touching the
            // segment reproduce the input and are skipped.
            for (int p = -1; p < m; ++p) {
                if (p >= s - 1 && p < s + len) continue;
                const Point u = at_pos(tour, p, inst);
                const Point v = at_pos(tour, p + 1, inst);
                const double insertion = dist(u, front) + dist(back, v) - dist(u, v);
                if (removal + insertion < -kMinGain) {
                    std::vector<int> seg(tour.begin() + s, tour.begin() + s + len);
                    tour.erase(tour.begin() + s, tour.begin() + s + len);
                    const int dest = p < s ? p + 1 : p + 1 - len;
                    tour.insert(tour.begin() + dest, seg.begin(), seg.end());
                    improved = true;
                    break;
                }
            }
        }
    }
    return improved;
}

std::vector<int> solve_heuristic(const std::vector<int>& nodes, const Instance& inst,
                                 const PermSolverConfig& cfg) {
    std::vector<int> tour = nearest_neighbor(nodes, inst);
    for (int pass = 0; pass < cfg.two_opt_max_passes; ++pass) {
        bool improved = two_opt_pass(tour, inst);
        improved |= or_opt_pass(tour, inst, cfg.or_opt_segment_lengths);
        if (!improved) break;
    }
    return tour;
}

}  // namespace

std::vector<int> solve_tour(std::span<const int> subgraph, const Instance& inst,
                            const PermSolverConfig& cfg) {
    if (cfg.exact_threshold < 0 || cfg.exact_threshold > 24)
        throw ValidationError("perm solver: exact_threshold must be in [0, 24]");
    if (cfg.two_opt_max_passes < 1)
        throw ValidationError("perm solver: two_opt_max_passes must be >= 1");
    std::vector<int> nodes(subgraph.begin(), subgraph.end());
    std::sort(nodes.begin(), nodes.end());
    for (int idx : nodes)
        if (idx < 0 || idx >= inst.size())
            throw ValidationError("perm solver: customer index " + std::to_string(idx) +
                                  " out of range");
    if (std::adjacent_find(nodes.begin(), nodes.end()) != nodes.end())
        throw ValidationError("perm solver: duplicate customer in subgraph");
    if (nodes.empty()) return {};
    if (nodes.size() == 1) return nodes;
    if (static_cast<int>(nodes.size()) <= cfg.exact_threshold) return solve_exact(nodes, inst);
    return solve_heuristic(nodes, inst, cfg);
}

double g_cost(std::span<const int> subgraph, const Instance& inst, const PermSolverConfig& cfg) {
    const auto tour = solve_tour(subgraph, inst, cfg);
    return tour_cost(tour, inst);
}

}  // namespace hlgp
