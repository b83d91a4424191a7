#include "ddlab/analysis.hpp"

#include "ddlab/errors.hpp"
#include "ddlab/parallel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace ddlab {

const char* norm_name(NormKind kind) {
    switch (kind) {
    case NormKind::L2_D: return "L2";
    case NormKind::W12_D: return "W12";
    case NormKind::W11_D: return "W11";
    case NormKind::W1inf_D: return "W1inf";
    case NormKind::L2_weighted: return "L2w";
    case NormKind::W12_weighted: return "W12w";
    }
    return "?";
}

double ErrorReport::by_kind(NormKind kind) const {
    switch (kind) {
    case NormKind::L2_D: return l2;
    case NormKind::W12_D: return w12;
    case NormKind::W11_D: return w11;
    case NormKind::W1inf_D: return w1inf;
    default: throw ConfigError("ErrorReport holds restricted norms only");
    }
}

namespace {

/// Accumulators for all restricted norms of the error and of the reference.
struct NormAccum {
    double e_l2 = 0.0, r_l2 = 0.0;
    double e_h1 = 0.0, r_h1 = 0.0;   // squared W12 contributions
    double e_w11 = 0.0, r_w11 = 0.0;
    double e_inf = 0.0, r_inf = 0.0; // maxima

    void merge(const NormAccum& o) {
        e_l2 += o.e_l2;
        r_l2 += o.r_l2;
        e_h1 += o.e_h1;
        r_h1 += o.r_h1;
        e_w11 += o.e_w11;
        r_w11 += o.r_w11;
        e_inf = std::max(e_inf, o.e_inf);
        r_inf = std::max(r_inf, o.r_inf);
    }
};

NormAccum accumulate_norms(const FEFunction& u_h, const RefField& ref, const SharpDomain& domain,
                           const TriMesh& mesh, int interface_depth) {
    const std::int64_t nt = mesh.triangle_count();
    const std::int64_t nchunks = (nt + par::kChunk - 1) / par::kChunk;
    std::vector<NormAccum> partial(static_cast<std::size_t>(nchunks));
    ElementQuadrature quad;

    par::for_chunks(nt, [&](std::int64_t lo, std::int64_t hi) {
        NormAccum acc;
        std::vector<QuadPoint> pts;
        for (std::int64_t t = lo; t < hi; ++t) {
            pts.clear();
            sharp_domain_points(domain, mesh, t, quad, interface_depth, pts);
            if (pts.empty())
                continue;
            const P1Element el = p1_element(mesh, t);
            const auto& tr = mesh.triangles[static_cast<std::size_t>(t)];
            const double u0 = u_h.values[static_cast<std::size_t>(tr[0])];
            const double u1 = u_h.values[static_cast<std::size_t>(tr[1])];
            const double u2 = u_h.values[static_cast<std::size_t>(tr[2])];
            const Point2 gh{u0 * el.grad[0].x + u1 * el.grad[1].x + u2 * el.grad[2].x,
                            u0 * el.grad[0].y + u1 * el.grad[1].y + u2 * el.grad[2].y};
            for (const QuadPoint& q : pts) {
                const auto lam = el.shape_values(q.x);
                const double uh = lam[0] * u0 + lam[1] * u1 + lam[2] * u2;
                const double ur = ref.value(q.x);
                const Point2 gr = ref.gradient(q.x);
                const double ev = uh - ur;
                const Point2 eg{gh.x - gr.x, gh.y - gr.y};
                const double eg2 = eg.x * eg.x + eg.y * eg.y;
                const double gr2 = gr.x * gr.x + gr.y * gr.y;
                acc.e_l2 += q.w * ev * ev;
                acc.r_l2 += q.w * ur * ur;
                acc.e_h1 += q.w * (ev * ev + eg2);
                acc.r_h1 += q.w * (ur * ur + gr2);
                acc.e_w11 += q.w * (std::abs(ev) + std::sqrt(eg2));
                acc.r_w11 += q.w * (std::abs(ur) + std::sqrt(gr2));
                acc.e_inf = std::max({acc.e_inf, std::abs(ev), std::sqrt(eg2)});
                acc.r_inf = std::max({acc.r_inf, std::abs(ur), std::sqrt(gr2)});
            }
        }
        partial[static_cast<std::size_t>(lo / par::kChunk)] = acc;
    });

    NormAccum total;
    for (const NormAccum& p : partial)
        total.merge(p);
    return total;
}

double ratio_or_throw(double num, double den, const char* what) {
    if (den < 1e-14)
        throw ZeroReference(std::string("reference ") + what + " norm vanishes");
    return num / den;
}

} // namespace

double restricted_error(const FEFunction& u_h, const RefField& ref, const SharpDomain& domain,
                        const TriMesh& mesh, NormKind kind, int interface_depth) {
    const NormAccum acc = accumulate_norms(u_h, ref, domain, mesh, interface_depth);
    switch (kind) {
    case NormKind::L2_D:
        return std::sqrt(ratio_or_throw(acc.e_l2, acc.r_l2, "L2"));
    case NormKind::W12_D:
        return std::sqrt(ratio_or_throw(acc.e_h1, acc.r_h1, "W12"));
    case NormKind::W11_D:
        return ratio_or_throw(acc.e_w11, acc.r_w11, "W11");
    case NormKind::W1inf_D:
        return ratio_or_throw(acc.e_inf, acc.r_inf, "W1inf");
    default:
        throw ConfigError("restricted_error expects a restricted norm kind");
    }
}

ErrorReport compute_error_report(const FEFunction& u_h, const RefField& ref,
                                 const SharpDomain& domain, const TriMesh& mesh, double eps,
                                 std::int32_t dof_count, int interface_depth) {
    const NormAccum acc = accumulate_norms(u_h, ref, domain, mesh, interface_depth);
    ErrorReport rep;
    rep.eps = eps;
    rep.dof_count = dof_count;
    rep.l2 = std::sqrt(ratio_or_throw(acc.e_l2, acc.r_l2, "L2"));
    rep.w12 = std::sqrt(ratio_or_throw(acc.e_h1, acc.r_h1, "W12"));
    rep.w11 = ratio_or_throw(acc.e_w11, acc.r_w11, "W11");
    rep.w1inf = ratio_or_throw(acc.e_inf, acc.r_inf, "W1inf");
    return rep;
}

double weighted_norm(const FEFunction& v, const PhaseField& pf, const TriMesh& mesh,
                     const ElementQuadrature& quad, NormKind kind) {
    if (kind != NormKind::L2_weighted && kind != NormKind::W12_weighted)
        throw ConfigError("weighted_norm expects a weighted norm kind");
    const bool with_gradient = kind == NormKind::W12_weighted;
    const double sq = par::sum_chunks(mesh.triangle_count(), [&](std::int64_t t) {
        thread_local std::vector<QuadPoint> pts;
        pts.clear();
        element_quadrature(mesh, t, quad, &pf, pts);
        const P1Element el = p1_element(mesh, t);
        const auto& tr = mesh.triangles[static_cast<std::size_t>(t)];
        const double u0 = v.values[static_cast<std::size_t>(tr[0])];
        const double u1 = v.values[static_cast<std::size_t>(tr[1])];
        const double u2 = v.values[static_cast<std::size_t>(tr[2])];
        double acc = 0.0;
        for (const QuadPoint& q : pts) {
            const double w = pf.omega(q.x);
            if (w != 0.0) {
                const auto lam = el.shape_values(q.x);
                const double uv = lam[0] * u0 + lam[1] * u1 + lam[2] * u2;
                double val = uv * uv;
                if (with_gradient) {
                    const Point2 g{u0 * el.grad[0].x + u1 * el.grad[1].x + u2 * el.grad[2].x,
                                   u0 * el.grad[0].y + u1 * el.grad[1].y + u2 * el.grad[2].y};
                    val += g.x * g.x + g.y * g.y;
                }
                acc += q.w * w * val;
            }
        }
        return acc;
    });
    return std::sqrt(sq);
}

namespace {

double dot_v(const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        acc += a[i] * b[i];
    return acc;
}

void project_constraint(const std::vector<double>* constraint, std::vector<double>& v) {
    if (!constraint)
        return;
    const double mm = dot_v(*constraint, *constraint);
    if (mm == 0.0)
        return;
    const double c = dot_v(v, *constraint) / mm;
    for (std::size_t i = 0; i < v.size(); ++i)
        v[i] -= c * (*constraint)[i];
}

/// Eigen decomposition of the m x m symmetric pencil G y = theta H y
/// (H SPD, m <= 9) by Cholesky reduction and cyclic Jacobi. theta comes out
/// descending; row k of Y holds the basis weights of ritz vector k. A tiny
/// escalating ridge on H absorbs a nearly rank-deficient basis.
void small_pencil(int m, const double* G, const double* H, double* theta, double* Y) {
    constexpr int N = 9;
    std::array<double, N * N> L{}, C{}, V{}, X{};
    for (double ridge_scale : {0.0, 1e-12, 1e-9, 1e-6}) {
        L.fill(0.0);
        double hmax = 0.0;
        for (int i = 0; i < m; ++i)
            hmax = std::max(hmax, std::abs(H[i * m + i]));
        const double ridge = ridge_scale * std::max(hmax, 1e-300);
        bool ok = true;
        for (int i = 0; i < m && ok; ++i) {
            for (int j = 0; j <= i; ++j) {
                double sum = H[i * m + j] + (i == j ? ridge : 0.0);
                for (int k = 0; k < j; ++k)
                    sum -= L[i * N + k] * L[j * N + k];
                if (i == j) {
                    if (!(sum > 0.0)) {
                        ok = false;
                        break;
                    }
                    L[i * N + i] = std::sqrt(sum);
                } else {
                    L[i * N + j] = sum / L[j * N + j];
                }
            }
        }
        if (!ok)
            continue;
        // C = L^-1 G L^-T.
        X.fill(0.0);
        for (int col = 0; col < m; ++col)
            for (int i = 0; i < m; ++i) {
                double sum = G[i * m + col];
                for (int k = 0; k < i; ++k)
                    sum -= L[i * N + k] * X[k * N + col];
                X[i * N + col] = sum / L[i * N + i];
            }
        C.fill(0.0);
        for (int row = 0; row < m; ++row)
            for (int j = 0; j < m; ++j) {
                double sum = X[row * N + j];
                for (int k = 0; k < j; ++k)
                    sum -= C[row * N + k] * L[j * N + k];
                C[row * N + j] = sum / L[j * N + j];
            }
        V.fill(0.0);
        for (int i = 0; i < m; ++i)
            V[i * N + i] = 1.0;
        for (int sweep = 0; sweep < 80; ++sweep) {
            double off = 0.0;
            for (int p = 0; p < m; ++p)
                for (int q = p + 1; q < m; ++q)
                    off += C[p * N + q] * C[p * N + q];
            if (off < 1e-30)
                break;
            for (int p = 0; p < m; ++p) {
                for (int q = p + 1; q < m; ++q) {
                    const double cpq = C[p * N + q];
                    if (cpq == 0.0)
                        continue;
                    const double th = (C[q * N + q] - C[p * N + p]) / (2.0 * cpq);
                    const double t = (th >= 0 ? 1.0 : -1.0) /
                                     (std::abs(th) + std::sqrt(th * th + 1.0));
                    const double c = 1.0 / std::sqrt(t * t + 1.0);
                    const double sn = t * c;
                    for (int k = 0; k < m; ++k) {
                        const double ckp = C[k * N + p], ckq = C[k * N + q];
                        C[k * N + p] = c * ckp - sn * ckq;
                        C[k * N + q] = sn * ckp + c * ckq;
                    }
                    for (int k = 0; k < m; ++k) {
                        const double cpk = C[p * N + k], cqk = C[q * N + k];
                        C[p * N + k] = c * cpk - sn * cqk;
                        C[q * N + k] = sn * cpk + c * cqk;
                        const double vpk = V[p * N + k], vqk = V[q * N + k];
                        V[p * N + k] = c * vpk - sn * vqk;
                        V[q * N + k] = sn * vpk + c * vqk;
                    }
                }
            }
        }
        std::array<int, N> order{};
        for (int i = 0; i < m; ++i)
            order[static_cast<std::size_t>(i)] = i;
        std::sort(order.begin(), order.begin() + m,
                  [&](int a, int b) { return C[a * N + a] > C[b * N + b]; });
        for (int k = 0; k < m; ++k) {
            const int src_row = order[static_cast<std::size_t>(k)];
            theta[k] = C[src_row * N + src_row];
            // back-substitute y = L^-T v.
            for (int i = m - 1; i >= 0; --i) {
                double sum = V[src_row * N + i];
                for (int kk = i + 1; kk < m; ++kk)
                    sum -= L[kk * N + i] * Y[k * m + kk];
                Y[k * m + i] = sum / L[i * N + i];
            }
        }
        return;
    }
    throw NoConvergence("ritz basis degenerated (gram matrix not SPD)");
}

/// Inverse subspace iteration (block size 3, Rayleigh-Ritz) for the largest
/// lambda of  Num v = lambda Den v, optionally restricted to the hyperplane
/// constraint . v = 0. Den must be SPD there. The block resolves the
/// symmetric near-degenerate leading pairs of the disk geometry, and the
/// outer convergence rate is independent of the conditioning of Den. Inner
/// solves are incomplete-Cholesky CG, warm-started column by column, with a
/// tolerance tracking the current eigen-residual; convergence is gated on
/// the true residual of the leading ritz pair.
double max_generalized_eigenvalue(const SparseCsr& num, const SparseCsr& den,
                                  const std::vector<double>* constraint,
                                  const EigenOptions& opts) {
    using Vec = std::vector<double>;
    const std::size_t n = static_cast<std::size_t>(num.rows());
    const int s = static_cast<int>(std::min<std::size_t>(3, n));
    const double phase = 0.5 + 0.137 * static_cast<double>(opts.seed % 1024);
    const IncompleteCholesky den_factor(den);

    auto orthonormalize = [&](std::vector<Vec>& block) {
        std::vector<Vec> kept;
        for (Vec& v : block) {
            for (int pass = 0; pass < 2; ++pass)
                for (const Vec& a : kept) {
                    const double c = dot_v(v, a);
                    for (std::size_t i = 0; i < n; ++i)
                        v[i] -= c * a[i];
                }
            const double nv = std::sqrt(dot_v(v, v));
            if (nv > 1e-12) {
                for (std::size_t i = 0; i < n; ++i)
                    v[i] /= nv;
                kept.push_back(std::move(v));
            }
        }
        block = std::move(kept);
    };

    std::vector<Vec> X(static_cast<std::size_t>(s), Vec(n));
    for (int j = 0; j < s; ++j) {
        for (std::size_t i = 0; i < n; ++i)
            X[static_cast<std::size_t>(j)][i] =
                1.0 + 0.5 * std::sin((1.7 * j + 1.0) * static_cast<double>(i) + phase + j);
        project_constraint(constraint, X[static_cast<std::size_t>(j)]);
    }
    orthonormalize(X);
    if (X.empty())
        throw NoConvergence("eigen start basis collapsed");

    const double tight_tol = std::min(1e-10, 0.001 * opts.tol);
    CgOptions inner;
    std::vector<Vec> Z(X.size()), AZ(X.size()), BZ(X.size());
    Vec w(n);
    double rho_prev = -1.0;
    double eta = 1.0;
    for (int it = 0; it < opts.max_outer; ++it) {
        inner.tol = std::clamp(0.25 * eta, tight_tol, 5e-2);
        bool numerator_alive = false;
        for (std::size_t j = 0; j < X.size(); ++j) {
            num.multiply(X[j], w);
            for (double x : w)
                numerator_alive = numerator_alive || x != 0.0;
            CgResult sol =
                solve_cg(den, w, inner, constraint, Z[j].empty() ? nullptr : &Z[j], &den_factor);
            Z[j] = std::move(sol.x);
        }
        if (!numerator_alive)
            return 0.0;
        std::vector<Vec> basis = Z;
        orthonormalize(basis);
        if (basis.empty())
            throw NoConvergence("eigen subspace collapsed");
        const int m = static_cast<int>(basis.size());
        for (int j = 0; j < m; ++j) {
            num.multiply(basis[static_cast<std::size_t>(j)], AZ[static_cast<std::size_t>(j)]);
            den.multiply(basis[static_cast<std::size_t>(j)], BZ[static_cast<std::size_t>(j)]);
        }
        std::array<double, 81> G{}, H{};
        for (int i = 0; i < m; ++i)
            for (int j = i; j < m; ++j) {
                G[static_cast<std::size_t>(i * m + j)] = G[static_cast<std::size_t>(j * m + i)] =
                    dot_v(basis[static_cast<std::size_t>(i)], AZ[static_cast<std::size_t>(j)]);
                H[static_cast<std::size_t>(i * m + j)] = H[static_cast<std::size_t>(j * m + i)] =
                    dot_v(basis[static_cast<std::size_t>(i)], BZ[static_cast<std::size_t>(j)]);
            }
        std::array<double, 9> th{};
        std::array<double, 81> Y{};
        small_pencil(m, G.data(), H.data(), th.data(), Y.data());
        const double rho = th[0];
        if (!(rho > 0.0))
            return 0.0;

        // True residual of the leading ritz pair.
        {
            Vec rv(n, 0.0), bx(n, 0.0);
            const double* y0 = Y.data();
            for (int k = 0; k < m; ++k) {
                const double c = y0[k];
                if (c == 0.0)
                    continue;
                for (std::size_t i = 0; i < n; ++i) {
                    rv[i] += c * AZ[static_cast<std::size_t>(k)][i];
                    bx[i] += c * BZ[static_cast<std::size_t>(k)][i];
                }
            }
            double rnorm2 = 0.0, bnorm2 = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double r = rv[i] - rho * bx[i];
                rnorm2 += r * r;
                bnorm2 += bx[i] * bx[i];
            }
            eta = std::sqrt(rnorm2) / (rho * std::sqrt(bnorm2));
            const double delta = rho_prev > 0.0 ? std::abs(rho - rho_prev) : rho;
            if (std::getenv("DDLAB_EIG_TRACE"))
                std::fprintf(stderr, "eig it %3d m %d rho %.10g eta %.3e delta %.3e\n", it, m,
                             rho, eta, delta / rho);
            if (eta * eta <= 0.1 * opts.tol && delta <= opts.tol * rho)
                return rho;
        }
        rho_prev = rho;

        // Ritz-rotate the basis so the warm starts and residual tolerances
        // track the leading pair.
        std::vector<Vec> Xn;
        for (int k = 0; k < std::min(m, s); ++k) {
            Vec col(n, 0.0);
            const double* y = &Y[static_cast<std::size_t>(k * m)];
            for (int j = 0; j < m; ++j) {
                const double c = y[j];
                if (c == 0.0)
                    continue;
                for (std::size_t i = 0; i < n; ++i)
                    col[i] += c * basis[static_cast<std::size_t>(j)][i];
            }
            Xn.push_back(std::move(col));
        }
        orthonormalize(Xn);
        if (Xn.empty())
            throw NoConvergence("eigen subspace collapsed");
        X = std::move(Xn);
    }
    throw NoConvergence("eigen iteration did not reach the tolerance within " +
                        std::to_string(opts.max_outer) + " outer iterations");
}

SparseCsr add_matrices(const SparseCsr& a, const SparseCsr& b) {
    std::vector<Triplet> t;
    t.reserve(static_cast<std::size_t>(a.nonzeros() + b.nonzeros()));
    for (std::int32_t r = 0; r < a.rows(); ++r)
        for (std::int64_t k = a.row_offsets()[r]; k < a.row_offsets()[r + 1]; ++k)
            t.push_back({r, a.cols()[static_cast<std::size_t>(k)],
                         a.values()[static_cast<std::size_t>(k)]});
    for (std::int32_t r = 0; r < b.rows(); ++r)
        for (std::int64_t k = b.row_offsets()[r]; k < b.row_offsets()[r + 1]; ++k)
            t.push_back({r, b.cols()[static_cast<std::size_t>(k)],
                         b.values()[static_cast<std::size_t>(k)]});
    return SparseCsr::from_triplets(a.rows(), std::move(t));
}

} // namespace

double discrete_trace_constant(const TriMesh& mesh, const PhaseField& pf,
                               const ElementQuadrature& quad, const EigenOptions& opts) {
    const ActivityMap activity = compute_activity(mesh, quad, pf);
    if (activity.n_active == 0)
        throw EmptySystem("no active degrees of freedom");
    const SparseCsr bmass = assemble_operator(mesh, quad, pf, activity, WeightedOperator::BoundaryMass);
    double bnorm = 0.0;
    for (double v : bmass.values())
        bnorm += std::abs(v);
    if (bnorm == 0.0)
        return 0.0;
    const SparseCsr stiff = assemble_operator(mesh, quad, pf, activity, WeightedOperator::StiffnessOmega);
    const SparseCsr mass = assemble_operator(mesh, quad, pf, activity, WeightedOperator::MassOmega);
    return max_generalized_eigenvalue(bmass, add_matrices(stiff, mass), nullptr, opts);
}

double discrete_poincare_friedrichs_constant(const TriMesh& mesh, const PhaseField& pf,
                                             const ElementQuadrature& quad,
                                             const EigenOptions& opts) {
    const ActivityMap activity = compute_activity(mesh, quad, pf);
    if (activity.n_active == 0)
        throw EmptySystem("no active degrees of freedom");
    const SparseCsr bmass = assemble_operator(mesh, quad, pf, activity, WeightedOperator::BoundaryMass);
    const SparseCsr stiff = assemble_operator(mesh, quad, pf, activity, WeightedOperator::StiffnessOmega);
    const SparseCsr mass = assemble_operator(mesh, quad, pf, activity, WeightedOperator::MassOmega);
    return max_generalized_eigenvalue(mass, add_matrices(stiff, bmass), nullptr, opts);
}

double discrete_poincare_mean_constant(const TriMesh& mesh, const PhaseField& pf,
                                       const ElementQuadrature& quad, const EigenOptions& opts) {
    const ActivityMap activity = compute_activity(mesh, quad, pf);
    if (activity.n_active == 0)
        throw EmptySystem("no active degrees of freedom");
    const SparseCsr stiff = assemble_operator(mesh, quad, pf, activity, WeightedOperator::StiffnessOmega);
    const SparseCsr mass = assemble_operator(mesh, quad, pf, activity, WeightedOperator::MassOmega);
    const std::vector<double> mvec = weighted_mean_vector(mesh, quad, pf, activity);
    return max_generalized_eigenvalue(mass, stiff, &mvec, opts);
}

InequalityConstants compute_inequality_constants(const TriMesh& mesh, const PhaseField& pf,
                                                 const ElementQuadrature& quad,
                                                 const EigenOptions& opts) {
    const ActivityMap activity = compute_activity(mesh, quad, pf);
    if (activity.n_active == 0)
        throw EmptySystem("no active degrees of freedom");
    const SparseCsr bmass = assemble_operator(mesh, quad, pf, activity, WeightedOperator::BoundaryMass);
    const SparseCsr stiff = assemble_operator(mesh, quad, pf, activity, WeightedOperator::StiffnessOmega);
    const SparseCsr mass = assemble_operator(mesh, quad, pf, activity, WeightedOperator::MassOmega);

    InequalityConstants out;
    double bnorm = 0.0;
    for (double v : bmass.values())
        bnorm += std::abs(v);
    if (bnorm > 0.0)
        out.trace = max_generalized_eigenvalue(bmass, add_matrices(stiff, mass), nullptr, opts);
    out.poincare_friedrichs =
        max_generalized_eigenvalue(mass, add_matrices(stiff, bmass), nullptr, opts);
    const std::vector<double> mvec = weighted_mean_vector(mesh, quad, pf, activity);
    out.poincare_mean = max_generalized_eigenvalue(mass, stiff, &mvec, opts);
    return out;
}

} // namespace ddlab
