#include "hlgp/instance.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "hlgp/error.hpp"

namespace hlgp {

using json = nlohmann::ordered_json;

long long Instance::total_demand() const {
    long long s = 0;
    for (int d : demands) s += d;
    return s;
}

bool operator==(const Instance& a, const Instance& b) {
    return a.depot == b.depot && a.customers == b.customers && a.demands == b.demands &&
           a.capacity == b.capacity && a.n_max == b.n_max;
}

int compute_nmax(const std::vector<int>& demands, int capacity) {
    if (demands.empty()) throw ValidationError("compute_nmax: demands must be non-empty");
    if (capacity <= 0) throw ValidationError("compute_nmax: capacity must be positive");
    long long sum = 0;
    for (int d : demands) {
        if (d <= 0) throw ValidationError("compute_nmax: demands must be positive");
        if (d > capacity)
            throw ValidationError("compute_nmax: capacity " + std::to_string(capacity) +
                                  " is smaller than demand " + std::to_string(d));
        sum += d;
    }
    const long long trips = (sum + capacity - 1) / capacity;
    return static_cast<int>(trips) + 1;
}

Instance make_instance(Point depot, std::vector<Point> customers, std::vector<int> demands,
                       int capacity) {
    if (customers.size() != demands.size())
        throw ValidationError("instance: demands length " + std::to_string(demands.size()) +
                              " does not match customer count " + std::to_string(customers.size()));
    Instance inst;
    inst.depot = depot;
    inst.customers = std::move(customers);
    inst.demands = std::move(demands);
    inst.capacity = capacity;
    inst.n_max = compute_nmax(inst.demands, capacity);
    return inst;
}

std::string to_string(DistKind kind) {
    switch (kind) {
        case DistKind::Uniform: return "uniform";
        case DistKind::GaussianCluster: return "gaussian";
        case DistKind::Explosion: return "explosion";
        case DistKind::Rotation: return "rotation";
    }
    throw InternalError("to_string: unknown DistKind");
}

DistKind dist_kind_from_string(const std::string& name) {
    if (name == "uniform") return DistKind::Uniform;
    if (name == "gaussian") return DistKind::GaussianCluster;
    if (name == "explosion") return DistKind::Explosion;
    if (name == "rotation") return DistKind::Rotation;
    throw ValidationError("unknown distribution kind '" + name +
                          "' (expected uniform|gaussian|explosion|rotation)");
}

namespace {

double clip01(double v) { return std::min(1.0, std::max(0.0, v)); }

double uniform01(std::mt19937_64& rng) {
    // 53-bit mantissa draw; avoids distribution-object state.
    return static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0);
}

std::vector<Point> uniform_points(int n, std::mt19937_64& rng) {
    std::vector<Point> pts(n);
    for (auto& p : pts) {
        p.x = uniform01(rng);
        p.y = uniform01(rng);
    }
    return pts;
}

}  // namespace

Instance generate(const DistributionSpec& spec) {
    if (spec.n < 1) throw ValidationError("generate: n must be >= 1");
    if (spec.capacity < 9)
        throw ValidationError("generate: capacity must be >= 9 to cover every demand");

    std::mt19937_64 rng(spec.seed);
    Point depot{uniform01(rng), uniform01(rng)};
    std::vector<Point> customers;

    switch (spec.kind) {
        case DistKind::Uniform: {
            customers = uniform_points(spec.n, rng);
            break;
        }
        case DistKind::GaussianCluster: {
            const int n_clusters = (spec.n + 99) / 100;
            std::vector<Point> centers(n_clusters);
            for (auto& c : centers) {
                c.x = 0.2 + 0.6 * uniform01(rng);
                c.y = 0.2 + 0.6 * uniform01(rng);
            }
            std::normal_distribution<double> gauss(0.0, 0.07);
            customers.resize(spec.n);
            for (auto& p : customers) {
                const auto c = centers[static_cast<std::size_t>(rng() % n_clusters)];
                p.x = clip01(c.x + gauss(rng));
                p.y = clip01(c.y + gauss(rng));
            }
            break;
        }
        case DistKind::Explosion: {
            customers = uniform_points(spec.n, rng);
            const Point epi{uniform01(rng), uniform01(rng)};
            const double radius = 0.3;
            for (auto& p : customers) {
                const double r = dist(p, epi);
                if (r >= radius) continue;
                double ux, uy;
                if (r == 0.0) {
                    const double a = 2.0 * M_PI * uniform01(rng);
                    ux = std::cos(a);
                    uy = std::sin(a);
                } else {
                    ux = (p.x - epi.x) / r;
                    uy = (p.y - epi.y) / r;
                }
                p.x = clip01(epi.x + radius * ux);
                p.y = clip01(epi.y + radius * uy);
            }
            break;
        }
        case DistKind::Rotation: {
            customers = uniform_points(spec.n, rng);
            // Monotone angular distortion about the square center: keeps radii,
            // remaps angles by theta + a*sin(theta + phi0) with |a| < 1.
            const double a = 0.3 + 0.6 * uniform01(rng);
            const double phi0 = 2.0 * M_PI * uniform01(rng);
            const Point center{0.5, 0.5};
            for (auto& p : customers) {
                const double r = dist(p, center);
                if (r == 0.0) continue;
                const double theta = std::atan2(p.y - center.y, p.x - center.x);
                const double theta2 = theta + a * std::sin(theta + phi0);
                p.x = clip01(center.x + r * std::cos(theta2));
                p.y = clip01(center.y + r * std::sin(theta2));
            }
            break;
        }
    }

    std::vector<int> demands(spec.n);
    for (auto& d : demands) d = 1 + static_cast<int>(rng() % 9);

    return make_instance(depot, std::move(customers), std::move(demands), spec.capacity);
}

namespace {

json instance_to_json_obj(const Instance& inst) {
    json j;
    j["depot"] = {inst.depot.x, inst.depot.y};
    json customers = json::array();
    for (const auto& p : inst.customers) customers.push_back({p.x, p.y});
    j["customers"] = std::move(customers);
    j["demands"] = inst.demands;
    j["capacity"] = inst.capacity;
    return j;
}

Point point_from_json(const json& j, const char* field) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw ParseError(std::string("instance: field '") + field + "' must be a [x, y] pair");
    return Point{j[0].get<double>(), j[1].get<double>()};
}

Instance instance_from_json_obj(const json& j) {
    if (!j.is_object()) throw ParseError("instance: expected a JSON object");
    for (const char* field : {"depot", "customers", "demands", "capacity"})
        if (!j.contains(field))
            throw ParseError(std::string("instance: missing field '") + field + "'");
    const Point depot = point_from_json(j["depot"], "depot");
    if (!j["customers"].is_array()) throw ParseError("instance: field 'customers' must be an array");
    std::vector<Point> customers;
    customers.reserve(j["customers"].size());
    for (const auto& jp : j["customers"]) customers.push_back(point_from_json(jp, "customers"));
    if (!j["demands"].is_array()) throw ParseError("instance: field 'demands' must be an array");
    std::vector<int> demands;
    demands.reserve(j["demands"].size());
    for (const auto& jd : j["demands"]) {
        if (!jd.is_number_integer())
            throw ParseError("instance: field 'demands' must hold integers");
        demands.push_back(jd.get<int>());
    }
    if (!j["capacity"].is_number_integer())
        throw ParseError("instance: field 'capacity' must be an integer");
    return make_instance(depot, std::move(customers), std::move(demands), j["capacity"].get<int>());
}

}  // namespace

std::string instance_to_json(const Instance& inst) { return instance_to_json_obj(inst).dump(); }

Instance instance_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("instance: invalid JSON: ") + e.what());
    }
    return instance_from_json_obj(j);
}

void save_instance(const Instance& inst, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out << instance_to_json(inst) << "\n";
    if (!out) throw IoError("write failed: " + path.string());
}

Instance load_instance(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open for reading: " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return instance_from_json(buf.str());
}

void save_dataset(const std::vector<Instance>& instances, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    for (const auto& inst : instances) out << instance_to_json(inst) << "\n";
    if (!out) throw IoError("write failed: " + path.string());
}

std::vector<Instance> load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open for reading: " + path.string());
    std::vector<Instance> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            out.push_back(instance_from_json(line));
        } catch (const std::exception& e) {
            throw ParseError("dataset line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

Subproblem as_subproblem(const Instance& inst) {
    Subproblem sub;
    sub.nodes.resize(inst.customers.size());
    for (std::size_t i = 0; i < sub.nodes.size(); ++i) sub.nodes[i] = static_cast<int>(i);
    sub.capacity = inst.capacity;
    // Budget one subgraph below the instance bound: the spare absorbs a forced
    // return when a packed tail stops fitting, keeping the partition valid.
    sub.max_returns = std::max(1, inst.n_max - 1);
    return sub;
}

}  // namespace hlgp
