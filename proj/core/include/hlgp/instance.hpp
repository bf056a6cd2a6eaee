#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "hlgp/geometry.hpp"

namespace hlgp {

/**
 * A capacitated routing instance on the unit square.
 *
 * Customer i is identified by its index into `customers`/`demands`.
 * `n_max` is the fleet bound ceil(total demand / capacity) + 1; it is always
 * derived from demands and capacity, never read from a file.
 */
struct Instance {
    Point depot;
    std::vector<Point> customers;
    std::vector<int> demands;
    int capacity = 0;
    int n_max = 0;

    int size() const { return static_cast<int>(customers.size()); }
    long long total_demand() const;
};

bool operator==(const Instance& a, const Instance& b);

// ceil(sum(demands)/capacity) + 1.
// Throws ValidationError if demands is empty, any demand is non-positive,
// or capacity < max(demands).
int compute_nmax(const std::vector<int>& demands, int capacity);

// Validates fields, computes n_max.
Instance make_instance(Point depot, std::vector<Point> customers,
                       std::vector<int> demands, int capacity);

enum class DistKind { Uniform, GaussianCluster, Explosion, Rotation };

std::string to_string(DistKind kind);
DistKind dist_kind_from_string(const std::string& name);

struct DistributionSpec {
    DistKind kind = DistKind::Uniform;
    std::uint64_t seed = 0;
    int n = 0;
    int capacity = 0;
};

// Deterministic in the spec: equal specs yield equal instances.
// Coordinates land in [0,1]^2, demands are uniform on {1,...,9}.
Instance generate(const DistributionSpec& spec);

// Single-object JSON: {"depot":[x,y],"customers":[[x,y],...],"demands":[...],"capacity":D}.
std::string instance_to_json(const Instance& inst);
Instance instance_from_json(const std::string& text);

void save_instance(const Instance& inst, const std::filesystem::path& path);
Instance load_instance(const std::filesystem::path& path);

// Datasets are one instance JSON object per line.
void save_dataset(const std::vector<Instance>& instances, const std::filesystem::path& path);
std::vector<Instance> load_dataset(const std::filesystem::path& path);

/**
 * A node subset treated as an instance in its own right: the nodes must be
 * routed with vehicles of the given capacity using at most `max_returns`
 * depot returns (equivalently, subgraphs).
 */
struct Subproblem {
    std::vector<int> nodes;
    int capacity = 0;
    int max_returns = 0;
};

// The whole instance viewed as a subproblem (all customers, n_max - 1 returns;
// the spare subgraph under the instance bound absorbs a forced overrun).
Subproblem as_subproblem(const Instance& inst);

}  // namespace hlgp
