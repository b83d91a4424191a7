#include "ddlab/integrals.hpp"

#include "ddlab/errors.hpp"
#include "ddlab/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace ddlab {

ScalarField ScalarField::singular_lp(double mu, Point2 pole) {
    ScalarField f;
    f.tag = Smoothness::SingularLp;
    f.mu = mu;
    f.pole = pole;
    f.evaluator = [mu, pole](Point2 p) { return std::pow(norm(p - pole), -mu); };
    return f;
}

TriMesh mesh_for_eps(const ComputationalBox& box, double eps, const MeshPolicy& policy) {
    if (!(policy.gamma > 0.0 && policy.gamma <= 1.0))
        throw ConfigError("mesh policy gamma must lie in (0, 1]");
    const double guard = eps * eps;
    double h = policy.gamma * guard;
    auto vertex_count = [&](double hh) {
        const std::int64_t nx = static_cast<std::int64_t>(std::ceil(box.width() / hh - 1e-12));
        const std::int64_t ny = static_cast<std::int64_t>(std::ceil(box.height() / hh - 1e-12));
        return (nx + 1) * (ny + 1);
    };
    while (vertex_count(h) > policy.vertex_cap) {
        h *= 1.02;
        if (h >= guard)
            throw ResourceLimit("vertex cap " + std::to_string(policy.vertex_cap) +
                                " cannot be met while keeping h below eps^2 at eps = " +
                                std::to_string(eps));
    }
    return build_structured_mesh(box, h, policy.vertex_cap);
}

ComputationalBox default_study_box(const SharpDomain& domain, double eps_max) {
    const double margin = std::max(1.05 * eps_max, 0.25);
    return ComputationalBox::around(domain, margin);
}

namespace {

double checked_eval(const ScalarField& h, Point2 p) {
    const double v = h.evaluator(p);
    if (!std::isfinite(v))
        throw NonFiniteSample("field evaluation is not finite at (" + std::to_string(p.x) +
                              ", " + std::to_string(p.y) + ")");
    return v;
}

template <class Weight>
double accumulate_weighted(const ScalarField& h, const PhaseField& pf, const TriMesh& mesh,
                           const ElementQuadrature& quad, Weight&& weight) {
    return par::sum_chunks(mesh.triangle_count(), [&](std::int64_t t) {
        thread_local std::vector<QuadPoint> pts;
        pts.clear();
        element_quadrature(mesh, t, quad, &pf, pts);
        double acc = 0.0;
        for (const QuadPoint& q : pts) {
            const double w = weight(q.x);
            if (w != 0.0)
                acc += q.w * w * checked_eval(h, q.x);
        }
        return acc;
    });
}

} // namespace

double diffuse_volume_integral(const ScalarField& h, const PhaseField& pf, const TriMesh& mesh,
                               const ElementQuadrature& quad) {
    return accumulate_weighted(h, pf, mesh, quad, [&](Point2 p) { return pf.omega(p); });
}

double diffuse_surface_integral(const ScalarField& h, const PhaseField& pf, const TriMesh& mesh,
                                const ElementQuadrature& quad) {
    return accumulate_weighted(h, pf, mesh, quad,
                               [&](Point2 p) { return pf.grad_omega_magnitude(p); });
}

namespace {

struct SharpCtx {
    const SharpDomain* domain;
    const ElementQuadrature::RefRule* rule;
    int max_depth;
};

void rule_points(const SharpCtx& ctx, Point2 a, Point2 b, Point2 c, std::vector<QuadPoint>& out) {
    const double area2 = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
    for (std::size_t k = 0; k < ctx.rule->weights.size(); ++k) {
        const auto& l = ctx.rule->bary[k];
        out.push_back({{l[0] * a.x + l[1] * b.x + l[2] * c.x,
                        l[0] * a.y + l[1] * b.y + l[2] * c.y},
                       ctx.rule->weights[k] * area2}); // reference weights sum to 1/2
    }
}

/// Points covering the d <= 0 part of a leaf triangle, clipped against the
/// linear interpolant of the vertex distances.
void clipped_points(const SharpCtx& ctx, const Point2 p[3], const double d[3],
                    std::vector<QuadPoint>& out) {
    Point2 poly[4];
    int n = 0;
    for (int i = 0; i < 3; ++i) {
        const int j = (i + 1) % 3;
        if (d[i] <= 0.0)
            poly[n++] = p[i];
        if ((d[i] < 0.0) != (d[j] < 0.0) && d[i] != d[j]) {
            const double s = d[i] / (d[i] - d[j]);
            if (s > 0.0 && s < 1.0)
                poly[n++] = p[i] + s * (p[j] - p[i]);
        }
    }
    for (int k = 2; k < n; ++k)
        rule_points(ctx, poly[0], poly[k - 1], poly[k], out);
}

void sharp_recurse(const SharpCtx& ctx, Point2 a, Point2 b, Point2 c, int depth,
                   std::vector<QuadPoint>& out) {
    const double d[3] = {signed_distance(*ctx.domain, a), signed_distance(*ctx.domain, b),
                         signed_distance(*ctx.domain, c)};
    const double diam = std::max({norm(b - a), norm(c - b), norm(a - c)});
    const double dmin = std::min({d[0], d[1], d[2]});
    const double dmax = std::max({d[0], d[1], d[2]});
    if (dmin - diam >= 0.0)
        return; // entirely outside D
    if (dmax + diam <= 0.0) {
        rule_points(ctx, a, b, c, out); // entirely inside D
        return;
    }
    if (depth >= ctx.max_depth) {
        const Point2 p[3] = {a, b, c};
        clipped_points(ctx, p, d, out);
        return;
    }
    const Point2 ab = 0.5 * (a + b);
    const Point2 bc = 0.5 * (b + c);
    const Point2 ca = 0.5 * (c + a);
    sharp_recurse(ctx, a, ab, ca, depth + 1, out);
    sharp_recurse(ctx, ab, b, bc, depth + 1, out);
    sharp_recurse(ctx, ca, bc, c, depth + 1, out);
    sharp_recurse(ctx, ab, bc, ca, depth + 1, out);
}

} // namespace

void sharp_domain_points(const SharpDomain& domain, const TriMesh& mesh, std::int64_t t,
                         const ElementQuadrature& quad, int interface_depth,
                         std::vector<QuadPoint>& out) {
    SharpCtx ctx{&domain, &quad.reference_rule(), interface_depth};
    const auto& tr = mesh.triangles[static_cast<std::size_t>(t)];
    sharp_recurse(ctx, mesh.vertex(tr[0]), mesh.vertex(tr[1]), mesh.vertex(tr[2]), 0, out);
}

double sharp_volume_integral(const ScalarField& h, const SharpDomain& domain, const TriMesh& mesh,
                             const ElementQuadrature& quad, int interface_depth) {
    return par::sum_chunks(mesh.triangle_count(), [&](std::int64_t t) {
        thread_local std::vector<QuadPoint> pts;
        pts.clear();
        sharp_domain_points(domain, mesh, t, quad, interface_depth, pts);
        double acc = 0.0;
        for (const QuadPoint& q : pts)
            acc += q.w * checked_eval(h, q.x);
        return acc;
    });
}

double sharp_boundary_integral(const ScalarField& h, const SharpDomain& domain, int order) {
    double acc = 0.0;
    for (const BoundaryNode& node : boundary_quadrature(domain, order))
        acc += node.weight * checked_eval(h, node.point);
    return acc;
}

std::vector<double> eoc(const std::vector<double>& errors) {
    for (double e : errors)
        if (!(e > 0.0))
            throw NonPositiveError("eoc requires strictly positive errors");
    std::vector<double> out;
    for (std::size_t k = 0; k + 1 < errors.size(); ++k)
        out.push_back(std::log2(errors[k] / errors[k + 1]));
    return out;
}

namespace {

void require_decreasing(const std::vector<double>& eps_list) {
    if (eps_list.size() < 3)
        throw ConfigError("eps_list must contain at least 3 values");
    for (std::size_t k = 0; k + 1 < eps_list.size(); ++k)
        if (!(eps_list[k] > eps_list[k + 1]))
            throw ConfigError("eps_list must be strictly decreasing");
    if (!(eps_list.back() > 0.0))
        throw ConfigError("eps_list entries must be positive");
}

IntegralStudy run_integral_study(const ScalarField& field, const SProfile& profile,
                                 const SharpDomain& domain, const std::vector<double>& eps_list,
                                 const MeshPolicy& policy, bool surface) {
    require_decreasing(eps_list);
    const double eps_max = eps_list.front();
    if (eps_max > domain.max_admissible_eps())
        throw ConfigError("largest eps exceeds the admissible bound for this domain");
    const ComputationalBox box = default_study_box(domain, eps_max);
    require_domain_inside(domain, box, eps_max);

    IntegralStudy study;
    ElementQuadrature quad;
    for (double eps : eps_list) {
        const TriMesh mesh = mesh_for_eps(box, eps, policy);
        const PhaseField pf(profile, eps, domain);
        IntegralErrorRow row;
        row.eps = eps;
        if (surface) {
            row.diffuse_value = diffuse_surface_integral(field, pf, mesh, quad);
            row.sharp_value = sharp_boundary_integral(field, domain);
        } else {
            row.diffuse_value = diffuse_volume_integral(field, pf, mesh, quad);
            row.sharp_value = sharp_volume_integral(field, domain, mesh, quad);
        }
        row.error = std::abs(row.diffuse_value - row.sharp_value);
        study.rows.push_back(row);
    }
    std::vector<double> errors;
    errors.reserve(study.rows.size());
    bool all_positive = true;
    for (const auto& row : study.rows) {
        errors.push_back(row.error);
        all_positive = all_positive && row.error > 0.0;
    }
    if (all_positive)
        study.eocs = eoc(errors);
    return study;
}

} // namespace

IntegralStudy volume_error_study(const ScalarField& h, const SProfile& profile,
                                 const SharpDomain& domain, const std::vector<double>& eps_list,
                                 const MeshPolicy& policy) {
    return run_integral_study(h, profile, domain, eps_list, policy, false);
}

IntegralStudy surface_error_study(const ScalarField& g, const SProfile& profile,
                                  const SharpDomain& domain, const std::vector<double>& eps_list,
                                  const MeshPolicy& policy) {
    return run_integral_study(g, profile, domain, eps_list, policy, true);
}

void write_integral_csv(const IntegralStudy& study, std::ostream& out) {
    out << "eps,diffuse,sharp,error,eoc\n";
    char buf[160];
    for (std::size_t k = 0; k < study.rows.size(); ++k) {
        const auto& r = study.rows[k];
        std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g,%.12g,", r.eps, r.diffuse_value,
                      r.sharp_value, r.error);
        out << buf;
        if (k > 0 && k - 1 < study.eocs.size()) {
            std::snprintf(buf, sizeof buf, "%.2f", study.eocs[k - 1]);
            out << buf;
        }
        out << '\n';
    }
}

} // namespace ddlab
