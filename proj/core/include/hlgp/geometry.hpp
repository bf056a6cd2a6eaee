#pragma once

#include <cmath>

namespace hlgp {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

inline bool operator==(const Point& a, const Point& b) { return a.x == b.x && a.y == b.y; }
inline bool operator!=(const Point& a, const Point& b) { return !(a == b); }

inline double dist(const Point& a, const Point& b) {
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    return std::sqrt(dx * dx + dy * dy);
}

// Angle of p as seen from origin, normalized to [0, 2*pi). Returns 0 for p == origin.
inline double polar_angle(const Point& origin, const Point& p) {
    if (p == origin) return 0.0;
    double a = std::atan2(p.y - origin.y, p.x - origin.x);
    if (a < 0.0) a += 2.0 * M_PI;
    return a;
}

// Smallest absolute difference between two angles on the circle, in [0, pi].
inline double angle_gap(double a, double b) {
    double d = std::fabs(a - b);
    d = std::fmod(d, 2.0 * M_PI);
    if (d > M_PI) d = 2.0 * M_PI - d;
    return d;
}

}  // namespace hlgp
