#include "ddlab/fem.hpp"

#include "ddlab/errors.hpp"
#include "ddlab/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace ddlab {

double Mat2::min_eigenvalue() const {
    const double tr = a11 + a22;
    const double det = a11 * a22 - a12 * a12;
    const double disc = std::sqrt(std::max(0.0, tr * tr - 4.0 * det));
    return 0.5 * (tr - disc);
}

double Mat2::max_eigenvalue() const {
    const double tr = a11 + a22;
    const double det = a11 * a22 - a12 * a12;
    const double disc = std::sqrt(std::max(0.0, tr * tr - 4.0 * det));
    return 0.5 * (tr + disc);
}

namespace {

constexpr double kWeightThreshold = 1e-14;

// 0 = no support, 1 = fully inside (omega == 1 exactly), 2 = band.
std::uint8_t classify_element(const TriMesh& mesh, std::int64_t t, const PhaseField& pf) {
    const auto& tr = mesh.triangles[static_cast<std::size_t>(t)];
    const double d0 = signed_distance(pf.domain(), mesh.vertex(tr[0]));
    const double d1 = signed_distance(pf.domain(), mesh.vertex(tr[1]));
    const double d2 = signed_distance(pf.domain(), mesh.vertex(tr[2]));
    const double diam = mesh.triangle_diameter(t);
    const double dmin = std::min({d0, d1, d2});
    const double dmax = std::max({d0, d1, d2});
    const double eps = pf.eps();
    // The oriented distance is 1-Lipschitz, so these vertex bounds cover the
    // whole element.
    if (dmin - diam >= eps)
        return 0;
    if (dmax + diam <= -eps)
        return 1;
    return 2;
}

} // namespace

ActivityMap compute_activity(const TriMesh& mesh, const ElementQuadrature& quad,
                             const PhaseField& pf) {
    const std::int64_t nt = mesh.triangle_count();
    ActivityMap map;
    map.element_state.assign(static_cast<std::size_t>(nt), 0);
    std::vector<std::uint8_t> vertex_active(mesh.vertices.size(), 0);

    par::for_chunks(nt, [&](std::int64_t lo, std::int64_t hi) {
        std::vector<QuadPoint> pts;
        for (std::int64_t t = lo; t < hi; ++t) {
            std::uint8_t state = classify_element(mesh, t, pf);
            if (state == 2) {
                pts.clear();
                element_quadrature(mesh, t, quad, &pf, pts);
                double weight = 0.0;
                for (const QuadPoint& q : pts) {
                    const double d = signed_distance(pf.domain(), q.x);
                    weight += q.w * (pf.omega_from_distance(d) +
                                     pf.grad_omega_magnitude_from_distance(d));
                }
                if (weight < kWeightThreshold)
                    state = 0;
            }
            map.element_state[static_cast<std::size_t>(t)] = state;
        }
    });
    // Vertex activation is a plain OR; do it sequentially to avoid races.
    for (std::int64_t t = 0; t < nt; ++t) {
        if (map.element_state[static_cast<std::size_t>(t)] == 0)
            continue;
        for (std::int32_t v : mesh.triangles[static_cast<std::size_t>(t)])
            vertex_active[static_cast<std::size_t>(v)] = 1;
    }
    map.active_of_vertex.assign(mesh.vertices.size(), -1);
    for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
        if (vertex_active[v]) {
            map.active_of_vertex[v] = map.n_active++;
            map.vertex_of_active.push_back(static_cast<std::int32_t>(v));
        }
    }
    return map;
}

namespace {

struct ChunkBuffers {
    std::vector<Triplet> triplets;
    std::vector<std::pair<std::int32_t, double>> loads;
};

} // namespace

AssembledSystem assemble(const TriMesh& mesh, const ElementQuadrature& quad,
                         const PhaseField& pf, const Coefficients& coeffs, BCKind bc) {
    AssembledSystem sys;
    sys.bc = bc;
    sys.activity = compute_activity(mesh, quad, pf);
    if (sys.activity.n_active == 0)
        throw EmptySystem("no active degrees of freedom: the weight vanishes on the whole mesh");

    const double beta = bc.type == BCKind::Type::DirichletPenalty
                            ? std::pow(pf.eps(), bc.sigma)
                            : 1.0;
    const bool has_boundary_mass = bc.type != BCKind::Type::Neumann;

    const std::int64_t nt = mesh.triangle_count();
    const std::int64_t nchunks = (nt + par::kChunk - 1) / par::kChunk;
    std::vector<ChunkBuffers> buffers(static_cast<std::size_t>(nchunks));
    std::vector<double> chunk_kappa(static_cast<std::size_t>(nchunks), 1.0);
    std::vector<double> chunk_minb(static_cast<std::size_t>(nchunks), 1e300);
    std::vector<double> chunk_omega(static_cast<std::size_t>(nchunks), 0.0);

    par::for_chunks(nt, [&](std::int64_t lo, std::int64_t hi) {
        const std::int64_t chunk = lo / par::kChunk;
        ChunkBuffers& buf = buffers[static_cast<std::size_t>(chunk)];
        std::vector<QuadPoint> pts;
        double kappa = 1.0;
        double minb = 1e300;
        double omega_mass = 0.0;
        for (std::int64_t t = lo; t < hi; ++t) {
            const std::uint8_t state = sys.activity.element_state[static_cast<std::size_t>(t)];
            if (state == 0)
                continue;
            const P1Element el = p1_element(mesh, t);
            const auto& tr = mesh.triangles[static_cast<std::size_t>(t)];
            pts.clear();
            element_quadrature(mesh, t, quad, state == 2 ? &pf : nullptr, pts);

            double K[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
            double F[3] = {0, 0, 0};
            for (const QuadPoint& q : pts) {
                double om, gm;
                if (state == 1) {
                    om = 1.0;
                    gm = 0.0;
                } else {
                    const double d = signed_distance(pf.domain(), q.x);
                    om = pf.omega_from_distance(d);
                    gm = pf.grad_omega_magnitude_from_distance(d);
                }
                const auto lam = el.shape_values(q.x);
                if (om > 0.0) {
                    const Mat2 A = coeffs.A(q.x);
                    const double lmin = A.min_eigenvalue();
                    if (!(lmin > 0.0))
                        throw EllipticityViolation("diffusion matrix not positive definite at"
                                                   " a quadrature node");
                    kappa = std::max({kappa, A.max_eigenvalue(), 1.0 / lmin});
                    const double c = coeffs.c(q.x);
                    const double f = coeffs.f(q.x);
                    if (!std::isfinite(f) || !std::isfinite(c))
                        throw NonFiniteSample("non-finite coefficient sample in assembly");
                    const double wom = q.w * om;
                    omega_mass += wom;
                    for (int i = 0; i < 3; ++i) {
                        for (int j = i; j < 3; ++j) {
                            const double kij =
                                wom * (A.quad(el.grad[i], el.grad[j]) + c * lam[i] * lam[j]);
                            K[i][j] += kij;
                            if (j != i)
                                K[j][i] += kij;
                        }
                        F[i] += wom * f * lam[i];
                    }
                }
                if (gm > 0.0) {
                    const double wgm = q.w * gm;
                    double bcoef = 0.0;
                    if (bc.type == BCKind::Type::Robin) {
                        bcoef = coeffs.b(q.x);
                        minb = std::min(minb, bcoef);
                    } else if (bc.type == BCKind::Type::DirichletPenalty) {
                        bcoef = 1.0 / beta;
                    }
                    const double gval = coeffs.g(q.x) / (bc.type == BCKind::Type::DirichletPenalty
                                                             ? beta
                                                             : 1.0);
                    if (!std::isfinite(gval))
                        throw NonFiniteSample("non-finite boundary datum sample in assembly");
                    for (int i = 0; i < 3; ++i) {
                        if (has_boundary_mass) {
                            for (int j = i; j < 3; ++j) {
                                const double kij = wgm * bcoef * lam[i] * lam[j];
                                K[i][j] += kij;
                                if (j != i)
                                    K[j][i] += kij;
                            }
                        }
                        F[i] += wgm * gval * lam[i];
                    }
                }
            }
            std::int32_t rows[3];
            for (int i = 0; i < 3; ++i)
                rows[i] = sys.activity.active_of_vertex[static_cast<std::size_t>(tr[i])];
            for (int i = 0; i < 3; ++i) {
                for (int j = 0; j < 3; ++j)
                    buf.triplets.push_back({rows[i], rows[j], K[i][j]});
                buf.loads.emplace_back(rows[i], F[i]);
            }
        }
        chunk_kappa[static_cast<std::size_t>(chunk)] = kappa;
        chunk_minb[static_cast<std::size_t>(chunk)] = minb;
        chunk_omega[static_cast<std::size_t>(chunk)] = omega_mass;
    });

    if (bc.type == BCKind::Type::Robin) {
        double minb = 1e300;
        for (double v : chunk_minb)
            minb = std::min(minb, v);
        if (!(minb > 0.0))
            throw ConfigError("Robin condition requires b >= b0 > 0 on the band; use the"
                              " Neumann condition for b = 0");
    }
    for (double k : chunk_kappa)
        sys.kappa = std::max(sys.kappa, k);
    for (double w : chunk_omega)
        sys.omega_mass += w;

    std::size_t total = 0;
    for (const auto& b : buffers)
        total += b.triplets.size();
    std::vector<Triplet> triplets;
    triplets.reserve(total);
    sys.rhs.assign(static_cast<std::size_t>(sys.activity.n_active), 0.0);
    for (const auto& b : buffers) {
        triplets.insert(triplets.end(), b.triplets.begin(), b.triplets.end());
        for (const auto& [row, v] : b.loads)
            sys.rhs[static_cast<std::size_t>(row)] += v;
    }
    sys.matrix = SparseCsr::from_triplets(sys.activity.n_active, std::move(triplets));

    if (bc.type == BCKind::Type::Neumann)
        sys.constraint = weighted_mean_vector(mesh, quad, pf, sys.activity);
    return sys;
}

SparseCsr assemble_operator(const TriMesh& mesh, const ElementQuadrature& quad,
                            const PhaseField& pf, const ActivityMap& activity,
                            WeightedOperator op) {
    const std::int64_t nt = mesh.triangle_count();
    const std::int64_t nchunks = (nt + par::kChunk - 1) / par::kChunk;
    std::vector<std::vector<Triplet>> buffers(static_cast<std::size_t>(nchunks));

    par::for_chunks(nt, [&](std::int64_t lo, std::int64_t hi) {
        auto& buf = buffers[static_cast<std::size_t>(lo / par::kChunk)];
        std::vector<QuadPoint> pts;
        for (std::int64_t t = lo; t < hi; ++t) {
            const std::uint8_t state = activity.element_state[static_cast<std::size_t>(t)];
            if (state == 0)
                continue;
            if (state == 1 && op == WeightedOperator::BoundaryMass)
                continue;
            const P1Element el = p1_element(mesh, t);
            const auto& tr = mesh.triangles[static_cast<std::size_t>(t)];
            pts.clear();
            element_quadrature(mesh, t, quad, state == 2 ? &pf : nullptr, pts);
            double K[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
            for (const QuadPoint& q : pts) {
                double w = 0.0;
                if (state == 1) {
                    w = (op == WeightedOperator::BoundaryMass) ? 0.0 : q.w;
                } else {
                    const double d = signed_distance(pf.domain(), q.x);
                    w = q.w * (op == WeightedOperator::BoundaryMass
                                   ? pf.grad_omega_magnitude_from_distance(d)
                                   : pf.omega_from_distance(d));
                }
                if (w == 0.0)
                    continue;
                const auto lam = el.shape_values(q.x);
                for (int i = 0; i < 3; ++i) {
                    for (int j = i; j < 3; ++j) {
                        const double kij = op == WeightedOperator::StiffnessOmega
                                               ? w * dot(el.grad[i], el.grad[j])
                                               : w * lam[i] * lam[j];
                        K[i][j] += kij;
                        if (j != i)
                            K[j][i] += kij;
                    }
                }
            }
            std::int32_t rows[3];
            for (int i = 0; i < 3; ++i)
                rows[i] = activity.active_of_vertex[static_cast<std::size_t>(tr[i])];
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j)
                    buf.push_back({rows[i], rows[j], K[i][j]});
        }
    });

    std::vector<Triplet> triplets;
    std::size_t total = 0;
    for (const auto& b : buffers)
        total += b.size();
    triplets.reserve(total);
    for (const auto& b : buffers)
        triplets.insert(triplets.end(), b.begin(), b.end());
    return SparseCsr::from_triplets(activity.n_active, std::move(triplets));
}

std::vector<double> weighted_mean_vector(const TriMesh& mesh, const ElementQuadrature& quad,
                                         const PhaseField& pf, const ActivityMap& activity) {
    std::vector<double> m(static_cast<std::size_t>(activity.n_active), 0.0);
    const std::int64_t nt = mesh.triangle_count();
    std::vector<QuadPoint> pts;
    for (std::int64_t t = 0; t < nt; ++t) {
        const std::uint8_t state = activity.element_state[static_cast<std::size_t>(t)];
        if (state == 0)
            continue;
        const P1Element el = p1_element(mesh, t);
        const auto& tr = mesh.triangles[static_cast<std::size_t>(t)];
        pts.clear();
        element_quadrature(mesh, t, quad, state == 2 ? &pf : nullptr, pts);
        double F[3] = {0, 0, 0};
        for (const QuadPoint& q : pts) {
            const double om = state == 1 ? 1.0 : pf.omega(q.x);
            if (om == 0.0)
                continue;
            const auto lam = el.shape_values(q.x);
            for (int i = 0; i < 3; ++i)
                F[i] += q.w * om * lam[i];
        }
        for (int i = 0; i < 3; ++i)
            m[static_cast<std::size_t>(
                activity.active_of_vertex[static_cast<std::size_t>(tr[i])])] += F[i];
    }
    return m;
}

FEFunction to_fe_function(const TriMesh& mesh, const ActivityMap& activity,
                          const std::vector<double>& active_values) {
    FEFunction u;
    u.mesh = &mesh;
    u.values.assign(mesh.vertices.size(), 0.0);
    for (std::int32_t k = 0; k < activity.n_active; ++k)
        u.values[static_cast<std::size_t>(activity.vertex_of_active[static_cast<std::size_t>(k)])] =
            active_values[static_cast<std::size_t>(k)];
    return u;
}

double FEFunction::value_at(Point2 p) const {
    const std::int64_t t = mesh->locate(p);
    if (t < 0)
        return 0.0;
    const P1Element el = p1_element(*mesh, t);
    const auto lam = el.shape_values(p);
    const auto& tr = mesh->triangles[static_cast<std::size_t>(t)];
    return lam[0] * values[static_cast<std::size_t>(tr[0])] +
           lam[1] * values[static_cast<std::size_t>(tr[1])] +
           lam[2] * values[static_cast<std::size_t>(tr[2])];
}

Point2 FEFunction::gradient_at(Point2 p) const {
    const std::int64_t t = mesh->locate(p);
    if (t < 0)
        return {0.0, 0.0};
    const P1Element el = p1_element(*mesh, t);
    const auto& tr = mesh->triangles[static_cast<std::size_t>(t)];
    Point2 g{0.0, 0.0};
    for (int i = 0; i < 3; ++i) {
        const double v = values[static_cast<std::size_t>(tr[i])];
        g.x += v * el.grad[i].x;
        g.y += v * el.grad[i].y;
    }
    return g;
}

DiffuseSolution solve_diffuse_problem(const TriMesh& mesh, const ElementQuadrature& quad,
                                      const PhaseField& pf, const Coefficients& coeffs,
                                      BCKind bc, const CgOptions& opts,
                                      const std::vector<double>* initial_guess) {
    DiffuseSolution sol;
    sol.system = assemble(mesh, quad, pf, coeffs, bc);
    const std::vector<double>* constraint =
        sol.system.constraint ? &*sol.system.constraint : nullptr;
    CgResult cg = solve_cg(sol.system.matrix, sol.system.rhs, opts, constraint, initial_guess);
    sol.stats.iterations = cg.iterations;
    sol.stats.relative_residual = cg.relative_residual;
    sol.stats.n_active = sol.system.activity.n_active;
    sol.u = to_fe_function(mesh, sol.system.activity, cg.x);
    return sol;
}

double galerkin_residual(const AssembledSystem& system, const FEFunction& u) {
    std::vector<double> x(static_cast<std::size_t>(system.activity.n_active));
    for (std::int32_t k = 0; k < system.activity.n_active; ++k)
        x[static_cast<std::size_t>(k)] =
            u.values[static_cast<std::size_t>(
                system.activity.vertex_of_active[static_cast<std::size_t>(k)])];
    std::vector<double> ax;
    system.matrix.multiply(x, ax);
    std::vector<double> r(ax.size()), b = system.rhs;
    for (std::size_t i = 0; i < ax.size(); ++i)
        r[i] = ax[i] - b[i];
    if (system.constraint) {
        // The component along the constraint row belongs to the multiplier.
        const std::vector<double>& m = *system.constraint;
        double mm = 0.0, mr = 0.0, mb = 0.0;
        for (std::size_t i = 0; i < m.size(); ++i) {
            mm += m[i] * m[i];
            mr += m[i] * r[i];
            mb += m[i] * b[i];
        }
        if (mm > 0.0)
            for (std::size_t i = 0; i < m.size(); ++i) {
                r[i] -= mr / mm * m[i];
                b[i] -= mb / mm * m[i];
            }
    }
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        num += r[i] * r[i];
        den += b[i] * b[i];
    }
    return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

double boundary_mismatch(const TriMesh& mesh, const ElementQuadrature& quad,
                         const PhaseField& pf, const FEFunction& u, const ScalarFn& g) {
    const std::int64_t nt = mesh.triangle_count();
    std::vector<QuadPoint> pts;
    double acc = 0.0;
    for (std::int64_t t = 0; t < nt; ++t) {
        pts.clear();
        element_quadrature(mesh, t, quad, &pf, pts);
        const P1Element el = p1_element(mesh, t);
        const auto& tr = mesh.triangles[static_cast<std::size_t>(t)];
        for (const QuadPoint& q : pts) {
            const double gm = pf.grad_omega_magnitude(q.x);
            if (gm == 0.0)
                continue;
            const auto lam = el.shape_values(q.x);
            const double uv = lam[0] * u.values[static_cast<std::size_t>(tr[0])] +
                              lam[1] * u.values[static_cast<std::size_t>(tr[1])] +
                              lam[2] * u.values[static_cast<std::size_t>(tr[2])];
            const double diff = uv - g(q.x);
            acc += q.w * gm * diff * diff;
        }
    }
    return acc;
}

void dump_solution(const FEFunction& u, std::ostream& out) {
    out << "vertex_index,x,y,value\n";
    for (std::size_t v = 0; v < u.values.size(); ++v) {
        const Point2 p = u.mesh->vertices[v];
        out << v << ',' << p.x << ',' << p.y << ',' << u.values[v] << '\n';
    }
}

} // namespace ddlab
