#include "hlgp/bench.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "hlgp/error.hpp"
#include "hlgp/solution.hpp"

namespace hlgp {

namespace {

void finalize_stats(EvalReport& report) {
    const double inv = 1.0 / static_cast<double>(report.rows.size());
    for (const auto& row : report.rows) {
        report.avg_cost += row.cost;
        report.avg_time_s += row.time_s;
    }
    report.avg_cost *= inv;
    report.avg_time_s *= inv;
    double var = 0.0;
    for (const auto& row : report.rows) {
        const double d = row.cost - report.avg_cost;
        var += d * d;
    }
    report.std_cost = std::sqrt(var * inv);
}

std::string format_double(const char* fmt, double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), fmt, value);
    return buf;
}

}  // namespace

EvalReport evaluate(const std::vector<Instance>& instances,
                    const EdgeScorePolicy& global_policy, const EdgeScorePolicy& local_policy,
                    const SolveOptions& opts, std::uint64_t base_seed) {
    if (instances.empty()) throw ValidationError("evaluate: empty instance set");
    EvalReport report;
    report.rows.reserve(instances.size());
    for (std::size_t i = 0; i < instances.size(); ++i) {
        SolveOptions per = opts;
        per.decode.seed = base_seed + i;
        const auto t0 = std::chrono::steady_clock::now();
        const SolveResult result = solve(instances[i], global_policy, local_policy, per);
        const auto t1 = std::chrono::steady_clock::now();
        report.rows.push_back({static_cast<int>(i), plan_cost(result.plan, instances[i]),
                               std::chrono::duration<double>(t1 - t0).count(),
                               static_cast<int>(result.plan.tours.size())});
    }
    finalize_stats(report);
    return report;
}

std::vector<EvalReport> k_sweep(const std::vector<Instance>& instances,
                                const EdgeScorePolicy& global_policy,
                                const EdgeScorePolicy& local_policy, const SolveOptions& opts,
                                std::span<const int> ks, std::uint64_t base_seed) {
    std::vector<EvalReport> reports;
    reports.reserve(ks.size());
    for (int k : ks) {
        if (k < 0) throw ValidationError("k_sweep: K must be >= 0");
        SolveOptions per = opts;
        per.K = k;
        EvalReport report = evaluate(instances, global_policy, local_policy, per, base_seed);
        report.label = "K=" + std::to_string(k);
        reports.push_back(std::move(report));
    }
    return reports;
}

void write_metrics_csv(const EvalReport& report, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << "instance_id,cost,time_s,n_routes\n";
    for (const auto& row : report.rows)
        out << row.instance_id << ',' << format_double("%.12g", row.cost) << ','
            << format_double("%.2f", row.time_s) << ',' << row.n_routes << '\n';
    if (!out) throw IoError("failed writing " + path.string());
}

void write_ksweep_csv(std::span<const int> ks, std::span<const EvalReport> reports,
                      const std::filesystem::path& path) {
    if (ks.size() != reports.size())
        throw ValidationError("write_ksweep_csv: ks and reports must align");
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << "K,avg_cost,std_cost,avg_time_s\n";
    for (std::size_t i = 0; i < ks.size(); ++i)
        out << ks[i] << ',' << format_double("%.12g", reports[i].avg_cost) << ','
            << format_double("%.12g", reports[i].std_cost) << ','
            << format_double("%.6f", reports[i].avg_time_s) << '\n';
    if (!out) throw IoError("failed writing " + path.string());
}

std::string render_svg(const Instance& inst, const RoutePlan& plan) {
    static const char* kPalette[] = {"#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f",
                                     "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac"};
    constexpr int kPaletteSize = 10;
    constexpr double kSize = 640.0;
    constexpr double kMargin = 24.0;
    constexpr double kCaption = 40.0;
    const auto sx = [&](double v) { return kMargin + v * (kSize - 2.0 * kMargin); };
    const auto sy = [&](double v) { return kMargin + (1.0 - v) * (kSize - 2.0 * kMargin); };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"680\" "
           "viewBox=\"0 0 640 680\">\n";
    svg += "<rect width=\"640\" height=\"680\" fill=\"#ffffff\"/>\n";
    svg += "<rect x=\"" + format_double("%.1f", kMargin) + "\" y=\"" +
           format_double("%.1f", kMargin) + "\" width=\"" +
           format_double("%.1f", kSize - 2.0 * kMargin) + "\" height=\"" +
           format_double("%.1f", kSize - 2.0 * kMargin) +
           "\" fill=\"none\" stroke=\"#d0d0d0\"/>\n";

    for (std::size_t t = 0; t < plan.tours.size(); ++t) {
        std::string points = format_double("%.2f", sx(inst.depot.x)) + "," +
                             format_double("%.2f", sy(inst.depot.y));
        for (int node : plan.tours[t])
            points += " " + format_double("%.2f", sx(inst.customers[node].x)) + "," +
                      format_double("%.2f", sy(inst.customers[node].y));
        points += " " + format_double("%.2f", sx(inst.depot.x)) + "," +
                  format_double("%.2f", sy(inst.depot.y));
        svg += "<polyline fill=\"none\" stroke=\"";
        svg += kPalette[t % kPaletteSize];
        svg += "\" stroke-width=\"1.5\" points=\"" + points + "\"/>\n";
    }

    for (std::size_t i = 0; i < inst.customers.size(); ++i) {
        const double r = 2.0 + 0.3 * inst.demands[i];
        svg += "<circle cx=\"" + format_double("%.2f", sx(inst.customers[i].x)) + "\" cy=\"" +
               format_double("%.2f", sy(inst.customers[i].y)) + "\" r=\"" +
               format_double("%.1f", r) + "\" fill=\"#333333\"/>\n";
    }
    svg += "<rect x=\"" + format_double("%.2f", sx(inst.depot.x) - 5.0) + "\" y=\"" +
           format_double("%.2f", sy(inst.depot.y) - 5.0) +
           "\" width=\"10\" height=\"10\" fill=\"#c0392b\"/>\n";

    svg += "<text x=\"" + format_double("%.1f", kMargin) + "\" y=\"" +
           format_double("%.1f", kSize + kCaption * 0.5) +
           "\" font-family=\"sans-serif\" font-size=\"16\" fill=\"#222222\">cost " +
           format_double("%.4f", plan_cost(plan, inst)) + ", " +
           std::to_string(plan.tours.size()) + " routes, " +
           std::to_string(inst.size()) + " customers, capacity " +
           std::to_string(inst.capacity) + "</text>\n";
    svg += "</svg>\n";
    return svg;
}

}  // namespace hlgp
