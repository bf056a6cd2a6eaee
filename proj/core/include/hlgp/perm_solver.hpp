#pragma once

#include <span>
#include <vector>

#include "hlgp/instance.hpp"

namespace hlgp {

struct PermSolverConfig {
    // Subgraphs up to this size are routed exactly by subset DP; larger ones
    // by nearest-neighbor construction plus 2-opt and Or-opt. 12 keeps a
    // single exact call in the sub-millisecond range.
    int exact_threshold = 12;
    int two_opt_max_passes = 25;
    std::vector<int> or_opt_segment_lengths = {1, 2, 3};
};

// Visit order over the given customer set (depot endpoints implied).
// Treats `subgraph` as a set: permutations of the input yield the same tour.
// Deterministic; ties break toward lower customer indices.
std::vector<int> solve_tour(std::span<const int> subgraph, const Instance& inst,
                            const PermSolverConfig& cfg);

// Routing cost of the subgraph under this solver: tour_cost(solve_tour(...)).
double g_cost(std::span<const int> subgraph, const Instance& inst, const PermSolverConfig& cfg);

}  // namespace hlgp
