#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "hlgp/instance.hpp"

namespace hlgp {

// An ordered list of disjoint customer index sets covering the instance.
// Iteration order inside a subgraph carries no meaning; positions in
// `subgraphs` do (they define cyclic neighborhoods for refinement).
struct PartitionSolution {
    std::vector<std::vector<int>> subgraphs;
};

// Closed tours; each tour lists customer indices visited between two
// depot touches, in visit order.
struct RoutePlan {
    std::vector<std::vector<int>> tours;
};

bool operator==(const PartitionSolution& a, const PartitionSolution& b);
bool operator==(const RoutePlan& a, const RoutePlan& b);

// Cost of depot -> tour[0] -> ... -> tour.back() -> depot. Empty tour costs 0.
double tour_cost(std::span<const int> tour, const Instance& inst);
double plan_cost(const RoutePlan& plan, const Instance& inst);

enum class ViolationKind {
    Coverage,       // some customer appears in no subgraph
    Disjointness,   // some customer appears in more than one subgraph
    Demand,         // some subgraph demand exceeds capacity
    Count,          // more subgraphs than n_max
    Index,          // index out of [0, n)
    EmptySubgraph,  // empty subgraphs are forbidden
};

std::string to_string(ViolationKind kind);

struct Violation {
    ViolationKind kind;
    std::string message;
};

struct ValidationReport {
    std::vector<Violation> violations;
    bool ok() const { return violations.empty(); }
};

// Reports every violated invariant, not just the first.
ValidationReport validate_partition(const PartitionSolution& partition, const Instance& inst);

// Forgets the visit order inside each tour.
PartitionSolution partition_of_plan(const RoutePlan& plan);

std::string partition_to_json(const PartitionSolution& partition);
PartitionSolution partition_from_json(const std::string& text);
std::string plan_to_json(const RoutePlan& plan);
RoutePlan plan_from_json(const std::string& text);

void save_partition(const PartitionSolution& partition, const std::filesystem::path& path);
PartitionSolution load_partition(const std::filesystem::path& path);
void save_plan(const RoutePlan& plan, const std::filesystem::path& path);
RoutePlan load_plan(const std::filesystem::path& path);

}  // namespace hlgp
