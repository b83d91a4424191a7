#include "ddlab/meshing.hpp"

#include "ddlab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace ddlab {

namespace {

double tri_area(Point2 a, Point2 b, Point2 c) {
    return 0.5 * ((b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x));
}

double tri_diam(Point2 a, Point2 b, Point2 c) {
    return std::max({norm(b - a), norm(c - b), norm(a - c)});
}

} // namespace

double TriMesh::triangle_area(std::int64_t t) const {
    const auto& tr = triangles[static_cast<std::size_t>(t)];
    return tri_area(vertex(tr[0]), vertex(tr[1]), vertex(tr[2]));
}

double TriMesh::triangle_diameter(std::int64_t t) const {
    const auto& tr = triangles[static_cast<std::size_t>(t)];
    return tri_diam(vertex(tr[0]), vertex(tr[1]), vertex(tr[2]));
}

std::int64_t TriMesh::locate(Point2 p) const {
    if (p.x < box.min.x || p.x > box.max.x || p.y < box.min.y || p.y > box.max.y)
        return -1;
    int i = static_cast<int>((p.x - box.min.x) / dx);
    int j = static_cast<int>((p.y - box.min.y) / dy);
    i = std::clamp(i, 0, nx - 1);
    j = std::clamp(j, 0, ny - 1);
    // Cell (i,j) holds triangles 2*(j*nx+i) (lower, below SW-NE diagonal)
    // and +1 (upper).
    const double lx = (p.x - box.min.x) / dx - i;
    const double ly = (p.y - box.min.y) / dy - j;
    const std::int64_t base = 2 * (static_cast<std::int64_t>(j) * nx + i);
    return ly <= lx ? base : base + 1;
}

TriMesh build_structured_mesh(const ComputationalBox& box, double h,
                              std::int64_t vertex_cap) {
    if (!(h > 0.0))
        throw ConfigError("mesh size h must be positive");
    if (h > 0.5 * std::min(box.width(), box.height()))
        throw ConfigError("mesh size h must not exceed half the box extent");

    const int nx = static_cast<int>(std::ceil(box.width() / h - 1e-12));
    const int ny = static_cast<int>(std::ceil(box.height() / h - 1e-12));
    const std::int64_t nverts = static_cast<std::int64_t>(nx + 1) * (ny + 1);
    if (nverts > vertex_cap)
        throw ResourceLimit("mesh would need " + std::to_string(nverts) +
                            " vertices, cap is " + std::to_string(vertex_cap));

    TriMesh mesh;
    mesh.box = box;
    mesh.h = h;
    mesh.nx = nx;
    mesh.ny = ny;
    mesh.dx = box.width() / nx;
    mesh.dy = box.height() / ny;
    mesh.vertices.resize(static_cast<std::size_t>(nverts));
    for (int j = 0; j <= ny; ++j) {
        const double y = (j == ny) ? box.max.y : box.min.y + j * mesh.dy;
        for (int i = 0; i <= nx; ++i) {
            const double x = (i == nx) ? box.max.x : box.min.x + i * mesh.dx;
            mesh.vertices[static_cast<std::size_t>(j) * (nx + 1) + i] = {x, y};
        }
    }
    mesh.triangles.resize(static_cast<std::size_t>(2) * nx * ny);
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const std::int32_t v00 = static_cast<std::int32_t>(j * (nx + 1) + i);
            const std::int32_t v10 = v00 + 1;
            const std::int32_t v01 = v00 + (nx + 1);
            const std::int32_t v11 = v01 + 1;
            const std::size_t base = 2 * (static_cast<std::size_t>(j) * nx + i);
            mesh.triangles[base] = {v00, v10, v11};
            mesh.triangles[base + 1] = {v00, v11, v01};
        }
    }
    return mesh;
}

void dump_mesh(const TriMesh& mesh, std::ostream& out) {
    for (const Point2& v : mesh.vertices)
        out << "v " << v.x << ' ' << v.y << '\n';
    for (const auto& t : mesh.triangles)
        out << "t " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

const ElementQuadrature::RefRule& ElementQuadrature::reference_rule() const {
    // Six-point symmetric rule, exact for degree 4. Weights sum to the
    // reference area 1/2.
    static const RefRule rule = [] {
        RefRule r;
        const double a1 = 0.445948490915965;
        const double w1 = 0.223381589678011 * 0.5;
        const double a2 = 0.091576213509771;
        const double w2 = 0.109951743655322 * 0.5;
        r.bary = {{{1 - 2 * a1, a1, a1}},
                  {{a1, 1 - 2 * a1, a1}},
                  {{a1, a1, 1 - 2 * a1}},
                  {{1 - 2 * a2, a2, a2}},
                  {{a2, 1 - 2 * a2, a2}},
                  {{a2, a2, 1 - 2 * a2}}};
        r.weights = {w1, w1, w1, w2, w2, w2};
        return r;
    }();
    if (degree > 4)
        throw ConfigError("only the degree-4 triangle rule is built in");
    return rule;
}

namespace {

void emit_rule(const ElementQuadrature::RefRule& rule, Point2 a, Point2 b, Point2 c,
               std::vector<QuadPoint>& out) {
    const double scale = tri_area(a, b, c) / 0.5;
    for (std::size_t k = 0; k < rule.weights.size(); ++k) {
        const auto& l = rule.bary[k];
        out.push_back({{l[0] * a.x + l[1] * b.x + l[2] * c.x,
                        l[0] * a.y + l[1] * b.y + l[2] * c.y},
                       rule.weights[k] * scale});
    }
}

/// True when the band-edge surfaces |d| = eps may cross the triangle, i.e.
/// where the weight profile can kink between quadrature points.
bool straddles_band_edge(const SharpDomain& dom, Point2 a, Point2 b, Point2 c, double eps) {
    const double diam = tri_diam(a, b, c);
    const double s0 = std::abs(signed_distance(dom, a)) - eps;
    const double s1 = std::abs(signed_distance(dom, b)) - eps;
    const double s2 = std::abs(signed_distance(dom, c)) - eps;
    const double lo = std::min({s0, s1, s2});
    const double hi = std::max({s0, s1, s2});
    return lo <= 0.0 ? hi >= -diam : lo <= diam;
}

void subdivide_emit(const ElementQuadrature::RefRule& rule, const SharpDomain& dom,
                    double eps, Point2 a, Point2 b, Point2 c, int depth, int edge_boost,
                    std::vector<QuadPoint>& out) {
    if (depth == 0) {
        if (edge_boost > 0 && straddles_band_edge(dom, a, b, c, eps)) {
            subdivide_emit(rule, dom, eps, a, b, c, edge_boost, 0, out);
            return;
        }
        emit_rule(rule, a, b, c, out);
        return;
    }
    const Point2 ab = 0.5 * (a + b);
    const Point2 bc = 0.5 * (b + c);
    const Point2 ca = 0.5 * (c + a);
    subdivide_emit(rule, dom, eps, a, ab, ca, depth - 1, edge_boost, out);
    subdivide_emit(rule, dom, eps, ab, b, bc, depth - 1, edge_boost, out);
    subdivide_emit(rule, dom, eps, ca, bc, c, depth - 1, edge_boost, out);
    subdivide_emit(rule, dom, eps, ab, bc, ca, depth - 1, edge_boost, out);
}

} // namespace

void element_quadrature(const TriMesh& mesh, std::int64_t t, const ElementQuadrature& quad,
                        const PhaseField* pf, std::vector<QuadPoint>& out) {
    const auto& rule = quad.reference_rule();
    const auto& tr = mesh.triangles[static_cast<std::size_t>(t)];
    const Point2 a = mesh.vertex(tr[0]);
    const Point2 b = mesh.vertex(tr[1]);
    const Point2 c = mesh.vertex(tr[2]);
    if (pf == nullptr) {
        emit_rule(rule, a, b, c, out);
        return;
    }
    const double eps = pf->eps();
    const double margin = eps + mesh.h;
    const SharpDomain& dom = pf->domain();
    const bool band = std::abs(signed_distance(dom, a)) < margin ||
                      std::abs(signed_distance(dom, b)) < margin ||
                      std::abs(signed_distance(dom, c)) < margin;
    if (!band) {
        emit_rule(rule, a, b, c, out);
        return;
    }
    subdivide_emit(rule, dom, eps, a, b, c, quad.band_subdivision_depth, 2, out);
}

P1Element p1_element(Point2 a, Point2 b, Point2 c) {
    P1Element e;
    e.v0 = a;
    e.v1 = b;
    e.v2 = c;
    e.area = tri_area(a, b, c);
    const double diam = tri_diam(a, b, c);
    if (!(e.area > 1e-14 * diam * diam))
        throw DegenerateElement("triangle area too small relative to its diameter");
    const double inv2a = 1.0 / (2.0 * e.area);
    e.grad[0] = {(b.y - c.y) * inv2a, (c.x - b.x) * inv2a};
    e.grad[1] = {(c.y - a.y) * inv2a, (a.x - c.x) * inv2a};
    e.grad[2] = {(a.y - b.y) * inv2a, (b.x - a.x) * inv2a};
    return e;
}

P1Element p1_element(const TriMesh& mesh, std::int64_t t) {
    const auto& tr = mesh.triangles[static_cast<std::size_t>(t)];
    return p1_element(mesh.vertex(tr[0]), mesh.vertex(tr[1]), mesh.vertex(tr[2]));
}

std::array<double, 3> P1Element::shape_values(Point2 p) const {
    const double inv2a = 1.0 / (2.0 * area);
    const double l1 = tri_area(p, v2, v0) * 2.0 * inv2a;
    const double l2 = tri_area(p, v0, v1) * 2.0 * inv2a;
    return {1.0 - l1 - l2, l1, l2};
}

} // namespace ddlab
