#include "ddlab/geometry.hpp"

#include "ddlab/errors.hpp"

#include <algorithm>
#include <numbers>

namespace ddlab {

namespace {

constexpr double kSingularTol = 1e-12;

double sgn(double v) { return v < 0.0 ? -1.0 : 1.0; }

/// Gauss-Legendre nodes/weights on [-1,1] via Newton iteration on the
/// Legendre recurrence.
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    nodes.resize(n);
    weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15)
                break;
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        double w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
}

struct BoxFrame {
    Point2 center;
    double hx, hy; // half extents
};

BoxFrame frame(const Rectangle& r) {
    return {{0.5 * (r.min.x + r.max.x), 0.5 * (r.min.y + r.max.y)},
            0.5 * (r.max.x - r.min.x),
            0.5 * (r.max.y - r.min.y)};
}

} // namespace

SharpDomain SharpDomain::disk(Point2 center, double radius) {
    if (!(radius > 0.0))
        throw ConfigError("disk radius must be positive");
    SharpDomain d;
    d.shape_ = Disk{center, radius};
    return d;
}

SharpDomain SharpDomain::rectangle(Point2 min, Point2 max) {
    if (!(min.x < max.x && min.y < max.y))
        throw ConfigError("rectangle requires min < max componentwise");
    SharpDomain d;
    d.shape_ = Rectangle{min, max};
    return d;
}

Rectangle SharpDomain::bounding_box() const {
    if (is_disk()) {
        const Disk& d = as_disk();
        return {{d.center.x - d.radius, d.center.y - d.radius},
                {d.center.x + d.radius, d.center.y + d.radius}};
    }
    return as_rectangle();
}

double SharpDomain::max_admissible_eps() const {
    if (is_disk()) {
        // The inward projection stays single-valued up to eps = R; keep a
        // safety factor below the focal distance.
        return 0.75 * as_disk().radius;
    }
    const Rectangle& r = as_rectangle();
    return 0.5 * std::min(r.max.x - r.min.x, r.max.y - r.min.y);
}

ComputationalBox ComputationalBox::around(const SharpDomain& domain, double margin) {
    Rectangle bb = domain.bounding_box();
    return {{bb.min.x - margin, bb.min.y - margin}, {bb.max.x + margin, bb.max.y + margin}};
}

void require_domain_inside(const SharpDomain& domain, const ComputationalBox& box,
                           double eps_max) {
    Rectangle bb = domain.bounding_box();
    const double tol = 1e-12 * std::max(box.width(), box.height());
    const double m = std::min(std::min(bb.min.x - box.min.x, box.max.x - bb.max.x),
                              std::min(bb.min.y - box.min.y, box.max.y - bb.max.y));
    if (m + tol < eps_max)
        throw ConfigError("domain must lie inside the computational box with margin >= eps_max"
                          " (margin " + std::to_string(m) + ", eps_max " + std::to_string(eps_max) + ")");
}

double signed_distance(const SharpDomain& domain, Point2 p) {
    if (domain.is_disk()) {
        const Disk& d = domain.as_disk();
        return norm(p - d.center) - d.radius;
    }
    const BoxFrame f = frame(domain.as_rectangle());
    const double qx = std::abs(p.x - f.center.x) - f.hx;
    const double qy = std::abs(p.y - f.center.y) - f.hy;
    const double ox = std::max(qx, 0.0);
    const double oy = std::max(qy, 0.0);
    return std::hypot(ox, oy) + std::min(std::max(qx, qy), 0.0);
}

Point2 distance_gradient(const SharpDomain& domain, Point2 p) {
    if (domain.is_disk()) {
        const Disk& d = domain.as_disk();
        Point2 r = p - d.center;
        double n = norm(r);
        if (n < kSingularTol)
            throw SingularPoint("distance gradient undefined at disk center");
        return {r.x / n, r.y / n};
    }
    const BoxFrame f = frame(domain.as_rectangle());
    const double rx = p.x - f.center.x;
    const double ry = p.y - f.center.y;
    const double qx = std::abs(rx) - f.hx;
    const double qy = std::abs(ry) - f.hy;
    if (qx > 0.0 || qy > 0.0) {
        Point2 v{std::max(qx, 0.0) * sgn(rx), std::max(qy, 0.0) * sgn(ry)};
        double n = norm(v);
        if (n < kSingularTol)
            throw SingularPoint("distance gradient undefined at rectangle corner");
        return {v.x / n, v.y / n};
    }
    // Interior: the gradient points towards the nearest edge. Ambiguous on
    // the medial axis (corner diagonals and the centered tie segments).
    if (std::abs(qx - qy) < kSingularTol)
        throw SingularPoint("distance gradient undefined on rectangle ridge");
    if (qx > qy) {
        if (std::abs(rx) < kSingularTol)
            throw SingularPoint("distance gradient undefined on rectangle ridge");
        return {sgn(rx), 0.0};
    }
    if (std::abs(ry) < kSingularTol)
        throw SingularPoint("distance gradient undefined on rectangle ridge");
    return {0.0, sgn(ry)};
}

BandPosition band_classify(const SharpDomain& domain, Point2 p, double eps) {
    if (!(eps > 0.0))
        throw ConfigError("band_classify requires eps > 0");
    const double d = signed_distance(domain, p);
    if (d <= -eps)
        return BandPosition::Inside;
    if (d >= eps)
        return BandPosition::Outside;
    return BandPosition::Band;
}

BoundaryPoint boundary_projection(const SharpDomain& domain, Point2 p) {
    if (domain.is_disk()) {
        const Disk& d = domain.as_disk();
        Point2 r = p - d.center;
        double n = norm(r);
        if (n < kSingularTol)
            throw SingularPoint("boundary projection undefined at disk center");
        Point2 nr{r.x / n, r.y / n};
        return {d.center + d.radius * nr, nr};
    }
    const Rectangle& r = domain.as_rectangle();
    const double cx = std::clamp(p.x, r.min.x, r.max.x);
    const double cy = std::clamp(p.y, r.min.y, r.max.y);
    if (cx != p.x || cy != p.y) {
        Point2 q{cx, cy};
        Point2 v = p - q;
        double n = norm(v);
        return {q, {v.x / n, v.y / n}};
    }
    // Interior point: project onto the nearest edge.
    const double dl = p.x - r.min.x;
    const double dr = r.max.x - p.x;
    const double db = p.y - r.min.y;
    const double dt = r.max.y - p.y;
    const double m = std::min(std::min(dl, dr), std::min(db, dt));
    if (m == dl)
        return {{r.min.x, p.y}, {-1.0, 0.0}};
    if (m == dr)
        return {{r.max.x, p.y}, {1.0, 0.0}};
    if (m == db)
        return {{p.x, r.min.y}, {0.0, -1.0}};
    return {{p.x, r.max.y}, {0.0, 1.0}};
}

std::vector<BoundaryNode> boundary_quadrature(const SharpDomain& domain, int order) {
    if (order < 1)
        throw ConfigError("boundary_quadrature requires order >= 1");
    std::vector<BoundaryNode> nodes;
    if (domain.is_disk()) {
        const Disk& d = domain.as_disk();
        const int n = std::max(16, 64 * order);
        const double w = 2.0 * std::numbers::pi * d.radius / n;
        nodes.reserve(n);
        for (int k = 0; k < n; ++k) {
            const double th = 2.0 * std::numbers::pi * (k + 0.5) / n;
            nodes.push_back({{d.center.x + d.radius * std::cos(th),
                              d.center.y + d.radius * std::sin(th)},
                             w});
        }
        return nodes;
    }
    const Rectangle& r = domain.as_rectangle();
    std::vector<double> gx, gw;
    gauss_legendre(12, gx, gw);
    const Point2 corners[4] = {r.min, {r.max.x, r.min.y}, r.max, {r.min.x, r.max.y}};
    for (int e = 0; e < 4; ++e) {
        const Point2 a = corners[e];
        const Point2 b = corners[(e + 1) % 4];
        const Point2 t = b - a;
        const double len = norm(t);
        const int panels = order;
        for (int pnl = 0; pnl < panels; ++pnl) {
            const double s0 = static_cast<double>(pnl) / panels;
            const double s1 = static_cast<double>(pnl + 1) / panels;
            for (std::size_t k = 0; k < gx.size(); ++k) {
                const double s = 0.5 * (s0 + s1) + 0.5 * (s1 - s0) * gx[k];
                nodes.push_back({a + s * t, 0.5 * (s1 - s0) * len * gw[k]});
            }
        }
    }
    return nodes;
}

double boundary_length(const SharpDomain& domain) {
    if (domain.is_disk())
        return 2.0 * std::numbers::pi * domain.as_disk().radius;
    const Rectangle& r = domain.as_rectangle();
    return 2.0 * ((r.max.x - r.min.x) + (r.max.y - r.min.y));
}

} // namespace ddlab
