#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "hlgp/hierarchy.hpp"

namespace hlgp {

struct EvalRow {
    int instance_id = 0;
    double cost = 0.0;
    double time_s = 0.0;  // wall time of solve() only
    int n_routes = 0;
};

struct EvalReport {
    std::string label;
    double avg_cost = 0.0;
    double std_cost = 0.0;  // population standard deviation
    double avg_time_s = 0.0;
    std::vector<EvalRow> rows;
};

// Runs the full pipeline on every instance sequentially. Instance i decodes
// with seed base_seed + i so reruns are reproducible row by row.
EvalReport evaluate(const std::vector<Instance>& instances,
                    const EdgeScorePolicy& global_policy, const EdgeScorePolicy& local_policy,
                    const SolveOptions& opts, std::uint64_t base_seed);

// Same instances evaluated once per requested K; labels are "K=<k>".
std::vector<EvalReport> k_sweep(const std::vector<Instance>& instances,
                                const EdgeScorePolicy& global_policy,
                                const EdgeScorePolicy& local_policy, const SolveOptions& opts,
                                std::span<const int> ks, std::uint64_t base_seed);

// instance_id,cost,time_s,n_routes; cost keeps full precision, time is
// rounded to hundredths (the only non-reproducible column).
void write_metrics_csv(const EvalReport& report, const std::filesystem::path& path);

// K,avg_cost,std_cost,avg_time_s with one row per report.
void write_ksweep_csv(std::span<const int> ks, std::span<const EvalReport> reports,
                      const std::filesystem::path& path);

// Self-contained SVG: one colored polyline per tour, square depot marker,
// customer dots scaled by demand, and a cost/route-count caption.
std::string render_svg(const Instance& inst, const RoutePlan& plan);

}  // namespace hlgp
