#include "hlgp/solution.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hlgp/error.hpp"

namespace hlgp {

using json = nlohmann::ordered_json;

bool operator==(const PartitionSolution& a, const PartitionSolution& b) {
    return a.subgraphs == b.subgraphs;
}

bool operator==(const RoutePlan& a, const RoutePlan& b) { return a.tours == b.tours; }

double tour_cost(std::span<const int> tour, const Instance& inst) {
    if (tour.empty()) return 0.0;
    double cost = dist(inst.depot, inst.customers.at(tour.front()));
    for (std::size_t i = 0; i + 1 < tour.size(); ++i)
        cost += dist(inst.customers.at(tour[i]), inst.customers.at(tour[i + 1]));
    cost += dist(inst.customers.at(tour.back()), inst.depot);
    return cost;
}

double plan_cost(const RoutePlan& plan, const Instance& inst) {
    double total = 0.0;
    for (const auto& tour : plan.tours) total += tour_cost(tour, inst);
    return total;
}

std::string to_string(ViolationKind kind) {
    switch (kind) {
        case ViolationKind::Coverage: return "coverage";
        case ViolationKind::Disjointness: return "disjointness";
        case ViolationKind::Demand: return "demand";
        case ViolationKind::Count: return "count";
        case ViolationKind::Index: return "index";
        case ViolationKind::EmptySubgraph: return "empty-subgraph";
    }
    throw InternalError("to_string: unknown ViolationKind");
}

ValidationReport validate_partition(const PartitionSolution& partition, const Instance& inst) {
    ValidationReport report;
    const int n = inst.size();
    std::vector<int> seen(n, 0);

    if (static_cast<int>(partition.subgraphs.size()) > inst.n_max)
        report.violations.push_back(
            {ViolationKind::Count, "partition has " + std::to_string(partition.subgraphs.size()) +
                                       " subgraphs, bound is " + std::to_string(inst.n_max)});

    for (std::size_t s = 0; s < partition.subgraphs.size(); ++s) {
        const auto& sub = partition.subgraphs[s];
        if (sub.empty())
            report.violations.push_back(
                {ViolationKind::EmptySubgraph, "subgraph " + std::to_string(s) + " is empty"});
        long long demand = 0;
        for (int idx : sub) {
            if (idx < 0 || idx >= n) {
                report.violations.push_back(
                    {ViolationKind::Index, "subgraph " + std::to_string(s) + " holds index " +
                                               std::to_string(idx) + ", valid range is [0, " +
                                               std::to_string(n) + ")"});
                continue;
            }
            seen[idx] += 1;
            demand += inst.demands[idx];
        }
        if (demand > inst.capacity)
            report.violations.push_back(
                {ViolationKind::Demand, "subgraph " + std::to_string(s) + " carries demand " +
                                            std::to_string(demand) + " > capacity " +
                                            std::to_string(inst.capacity)});
    }

    for (int i = 0; i < n; ++i) {
        if (seen[i] == 0)
            report.violations.push_back(
                {ViolationKind::Coverage, "customer " + std::to_string(i) + " is unassigned"});
        else if (seen[i] > 1)
            report.violations.push_back(
                {ViolationKind::Disjointness, "customer " + std::to_string(i) + " appears " +
                                                  std::to_string(seen[i]) + " times"});
    }
    return report;
}

PartitionSolution partition_of_plan(const RoutePlan& plan) {
    PartitionSolution p;
    p.subgraphs = plan.tours;
    return p;
}

namespace {

std::vector<std::vector<int>> index_lists_from_json(const json& j, const char* field) {
    if (!j.contains(field))
        throw ParseError(std::string("missing field '") + field + "'");
    if (!j[field].is_array())
        throw ParseError(std::string("field '") + field + "' must be an array of arrays");
    std::vector<std::vector<int>> out;
    for (const auto& jl : j[field]) {
        if (!jl.is_array())
            throw ParseError(std::string("field '") + field + "' must be an array of arrays");
        std::vector<int> lst;
        lst.reserve(jl.size());
        for (const auto& ji : jl) {
            if (!ji.is_number_integer())
                throw ParseError(std::string("field '") + field + "' must hold integers");
            lst.push_back(ji.get<int>());
        }
        out.push_back(std::move(lst));
    }
    return out;
}

json parse_text(const std::string& text, const char* what) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string(what) + ": invalid JSON: " + e.what());
    }
}

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open for reading: " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void spit(const std::string& text, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out << text << "\n";
    if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace

std::string partition_to_json(const PartitionSolution& partition) {
    json j;
    j["subgraphs"] = partition.subgraphs;
    return j.dump();
}

PartitionSolution partition_from_json(const std::string& text) {
    PartitionSolution p;
    p.subgraphs = index_lists_from_json(parse_text(text, "partition"), "subgraphs");
    return p;
}

std::string plan_to_json(const RoutePlan& plan) {
    json j;
    j["tours"] = plan.tours;
    return j.dump();
}

RoutePlan plan_from_json(const std::string& text) {
    RoutePlan p;
    p.tours = index_lists_from_json(parse_text(text, "plan"), "tours");
    return p;
}

void save_partition(const PartitionSolution& partition, const std::filesystem::path& path) {
    spit(partition_to_json(partition), path);
}

PartitionSolution load_partition(const std::filesystem::path& path) {
    return partition_from_json(slurp(path));
}

void save_plan(const RoutePlan& plan, const std::filesystem::path& path) {
    spit(plan_to_json(plan), path);
}

RoutePlan load_plan(const std::filesystem::path& path) { return plan_from_json(slurp(path)); }

}  // namespace hlgp
