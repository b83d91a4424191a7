#pragma once

// Independent reference computations used to freeze expected test values.
// Everything here stays off the library's own evaluation paths: brute-force
// sampling, central differences, 1D radial quadrature.

#include "ddlab/geometry.hpp"
#include "ddlab/phasefield.hpp"

#include <cmath>
#include <numbers>
#include <vector>

namespace ddlab::testing {

/// Distance to the rectangle boundary by dense sampling of its four edges,
/// signed by a containment test.
inline double brute_force_rectangle_distance(const Rectangle& r, Point2 p, int samples = 20000) {
    double best = 1e300;
    const Point2 corners[4] = {r.min, {r.max.x, r.min.y}, r.max, {r.min.x, r.max.y}};
    for (int e = 0; e < 4; ++e) {
        const Point2 a = corners[e];
        const Point2 b = corners[(e + 1) % 4];
        for (int k = 0; k <= samples; ++k) {
            const double s = static_cast<double>(k) / samples;
            const Point2 q = a + s * (b - a);
            best = std::min(best, norm(p - q));
        }
    }
    const bool inside = p.x > r.min.x && p.x < r.max.x && p.y > r.min.y && p.y < r.max.y;
    return inside ? -best : best;
}

/// Central finite difference of the oriented distance.
inline Point2 fd_distance_gradient(const SharpDomain& dom, Point2 p, double step = 1e-6) {
    return {(signed_distance(dom, {p.x + step, p.y}) - signed_distance(dom, {p.x - step, p.y})) /
                (2.0 * step),
            (signed_distance(dom, {p.x, p.y + step}) - signed_distance(dom, {p.x, p.y - step})) /
                (2.0 * step)};
}

/// 1D Simpson integral.
template <class Fn>
double simpson(Fn&& f, double a, double b, int intervals = 2000) {
    if (intervals % 2)
        ++intervals;
    const double h = (b - a) / intervals;
    double acc = f(a) + f(b);
    for (int k = 1; k < intervals; ++k)
        acc += f(a + k * h) * (k % 2 ? 4.0 : 2.0);
    return acc * h / 3.0;
}

/// Profile moment  m = integral of t S(t) over (-1, 1): the closed-form
/// diffuse area defect of a disk is  pi eps^2 (1 - m).
inline double profile_moment(const SProfile& s) {
    return simpson([&](double t) { return t * s.value(t); }, -1.0, 1.0, 4000);
}

/// Radial oracle for the diffuse weight integral over the plane around a
/// disk of radius R:  integral omega dx = 2 pi * int_0^inf omega(r) r dr.
inline double radial_diffuse_area(const SProfile& s, double R, double eps) {
    const double inner = 0.5 * (R - eps) * (R - eps); // omega = 1 there
    auto band = [&](double r) { return 0.5 * (1.0 - s.value((r - R) / eps)) * r; };
    return 2.0 * std::numbers::pi * (inner + simpson(band, R - eps, R + eps, 4000));
}

/// Radial oracle for the diffuse perimeter of a disk.
inline double radial_diffuse_perimeter(const SProfile& s, double R, double eps) {
    auto band = [&](double r) {
        return s.derivative((r - R) / eps) / (2.0 * eps) * r;
    };
    return 2.0 * std::numbers::pi * simpson(band, R - eps, R + eps, 4000);
}

/// Deterministic low-discrepancy points in a box (additive lattice).
inline std::vector<Point2> lattice_points(const ComputationalBox& box, int count,
                                          unsigned seed = 0) {
    std::vector<Point2> pts;
    pts.reserve(static_cast<std::size_t>(count));
    double u = 0.5 + 0.01 * seed;
    double v = 0.25 + 0.003 * seed;
    for (int k = 0; k < count; ++k) {
        u += 0.7548776662466927; // plastic-number lattice increments
        v += 0.5698402909980532;
        u -= std::floor(u);
        v -= std::floor(v);
        pts.push_back({box.min.x + u * box.width(), box.min.y + v * box.height()});
    }
    return pts;
}

} // namespace ddlab::testing
