#pragma once

#include <cmath>
#include <variant>
#include <vector>

namespace ddlab {

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

inline Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
inline Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
inline Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Point2 a) { return std::hypot(a.x, a.y); }

struct Disk {
    Point2 center;
    double radius = 0.0;
};

struct Rectangle {
    Point2 min;
    Point2 max;
};

/// Sharp domain D: the region the boundary value problem lives on. Both
/// supported shapes have a closed-form oriented distance function.
class SharpDomain {
public:
    static SharpDomain disk(Point2 center, double radius);
    static SharpDomain rectangle(Point2 min, Point2 max);

    bool is_disk() const { return std::holds_alternative<Disk>(shape_); }
    const Disk& as_disk() const { return std::get<Disk>(shape_); }
    const Rectangle& as_rectangle() const { return std::get<Rectangle>(shape_); }

    /// Axis-aligned bounding box of D.
    Rectangle bounding_box() const;

    /// Largest interface half-width the band machinery supports: the inward
    /// normal projection onto the boundary must stay single-valued.
    double max_admissible_eps() const;

private:
    std::variant<Disk, Rectangle> shape_;
};

/// Simple bounding box Omega the relaxed problem is posed on.
struct ComputationalBox {
    Point2 min;
    Point2 max;

    double width() const { return max.x - min.x; }
    double height() const { return max.y - min.y; }

    /// Box containing D with the given margin on every side.
    static ComputationalBox around(const SharpDomain& domain, double margin);
};

/// Throws ConfigError unless the closure of D sits inside the box with
/// margin >= eps_max on every side.
void require_domain_inside(const SharpDomain& domain, const ComputationalBox& box,
                           double eps_max);

/// Oriented distance d_D(p): negative inside D, zero on the boundary,
/// positive outside. Exact for both shapes.
double signed_distance(const SharpDomain& domain, Point2 p);

/// Unit gradient of the oriented distance. Throws SingularPoint within 1e-12
/// of the singular set (disk center; rectangle ridge set and corners).
Point2 distance_gradient(const SharpDomain& domain, Point2 p);

enum class BandPosition { Inside, Band, Outside };

/// Inside iff d <= -eps, Band iff |d| < eps, Outside iff d >= eps.
BandPosition band_classify(const SharpDomain& domain, Point2 p, double eps);

struct BoundaryPoint {
    Point2 point;   // nearest point on the boundary of D
    Point2 normal;  // outward unit normal there
};

/// Nearest-point projection onto the boundary together with the outward
/// normal. For points in the band this is the unique normal projection.
BoundaryPoint boundary_projection(const SharpDomain& domain, Point2 p);

struct BoundaryNode {
    Point2 point;
    double weight = 0.0;
};

/// Quadrature for the sharp boundary integral over the boundary of D.
/// Disk: uniform angular nodes (spectrally accurate for smooth integrands);
/// rectangle: composite Gauss panels per edge.
std::vector<BoundaryNode> boundary_quadrature(const SharpDomain& domain, int order);

/// Perimeter of the boundary of D (closed form).
double boundary_length(const SharpDomain& domain);

} // namespace ddlab
