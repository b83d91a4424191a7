#pragma once

#include "ddlab/geometry.hpp"
#include "ddlab/phasefield.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <vector>

namespace ddlab {

/// Structured triangulation of the computational box: a regular grid of
/// squares, each split along its SW-NE diagonal into two CCW triangles.
struct TriMesh {
    std::vector<Point2> vertices;
    std::vector<std::array<std::int32_t, 3>> triangles;
    double h = 0.0; // target edge length (actual cell size <= h)

    // Grid metadata; valid for structured meshes (all meshes built here).
    ComputationalBox box;
    int nx = 0, ny = 0;
    double dx = 0.0, dy = 0.0;

    std::int64_t vertex_count() const { return static_cast<std::int64_t>(vertices.size()); }
    std::int64_t triangle_count() const { return static_cast<std::int64_t>(triangles.size()); }

    Point2 vertex(std::int32_t i) const { return vertices[static_cast<std::size_t>(i)]; }
    double triangle_area(std::int64_t t) const;
    /// Longest edge of triangle t.
    double triangle_diameter(std::int64_t t) const;

    /// Index of the triangle containing p (O(1) grid lookup); -1 outside.
    std::int64_t locate(Point2 p) const;
};

inline constexpr std::int64_t kDefaultVertexCap = std::int64_t(1) << 23;

/// Builds the structured mesh with cells of side <= h. Throws ResourceLimit
/// if the vertex count would exceed the cap.
TriMesh build_structured_mesh(const ComputationalBox& box, double h,
                              std::int64_t vertex_cap = kDefaultVertexCap);

/// Plain-text dump: one `v x y` line per vertex, one `t i j k` per triangle.
void dump_mesh(const TriMesh& mesh, std::ostream& out);

/// Symmetric triangle quadrature rule of fixed polynomial degree, plus the
/// uniform subdivision depth applied to elements crossing the band.
struct ElementQuadrature {
    int degree = 4;             // 4 -> six-point rule
    int band_subdivision_depth = 2;

    /// Barycentric coordinates and reference weights (summing to the
    /// reference area 1/2).
    struct RefRule {
        std::vector<std::array<double, 3>> bary;
        std::vector<double> weights;
    };
    const RefRule& reference_rule() const;
};

struct QuadPoint {
    Point2 x;
    double w = 0.0;
};

/// Quadrature points for one element. Elements intersecting the band (any
/// vertex within eps + h of the boundary) are uniformly subdivided
/// band_subdivision_depth times; children straddling the band edges, where
/// the weight profile may kink, are refined two levels further. Weights sum
/// to the triangle area exactly. Pass pf = nullptr for the plain base rule.
void element_quadrature(const TriMesh& mesh, std::int64_t t, const ElementQuadrature& quad,
                        const PhaseField* pf, std::vector<QuadPoint>& out);

/// Per-triangle P1 basis data: constant shape gradients and the barycentric
/// evaluation map. Throws DegenerateElement for collapsed triangles.
struct P1Element {
    Point2 v0, v1, v2;
    double area = 0.0;
    std::array<Point2, 3> grad; // gradients of the three hat functions

    /// Shape values (barycentric coordinates) of p.
    std::array<double, 3> shape_values(Point2 p) const;
};

P1Element p1_element(const TriMesh& mesh, std::int64_t t);
P1Element p1_element(Point2 a, Point2 b, Point2 c);

} // namespace ddlab
