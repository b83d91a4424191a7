#pragma once

#include "ddlab/fem.hpp"
#include "ddlab/integrals.hpp"

namespace ddlab {

/// Error norms: the *_D kinds integrate over the sharp domain D only, the
/// weighted kinds integrate against omega over the whole box.
enum class NormKind { L2_D, W12_D, W11_D, W1inf_D, L2_weighted, W12_weighted };

const char* norm_name(NormKind kind);

/// Closed-form reference solution (value and gradient).
struct RefField {
    ScalarFn value;
    std::function<Point2(Point2)> gradient;
};

/// Relative error ||u_h - ref|| / ||ref|| in the requested norm, integrated
/// over D with interface-clipped quadrature. The W1inf kind is the maximum
/// of |e| and |grad e| over the quadrature nodes inside D, normalized by the
/// same functional of the reference. Throws ZeroReference when the
/// denominator vanishes.
double restricted_error(const FEFunction& u_h, const RefField& ref, const SharpDomain& domain,
                        const TriMesh& mesh, NormKind kind, int interface_depth = 4);

/// Weighted L2 / W12 norm of a nodal function against omega.
double weighted_norm(const FEFunction& v, const PhaseField& pf, const TriMesh& mesh,
                     const ElementQuadrature& quad, NormKind kind);

/// Relative errors in all four restricted norms, computed in one sweep.
struct ErrorReport {
    double eps = 0.0;
    std::int32_t dof_count = 0;
    double l2 = 0.0;
    double w12 = 0.0;
    double w11 = 0.0;
    double w1inf = 0.0;

    double by_kind(NormKind kind) const;
};

ErrorReport compute_error_report(const FEFunction& u_h, const RefField& ref,
                                 const SharpDomain& domain, const TriMesh& mesh, double eps,
                                 std::int32_t dof_count, int interface_depth = 4);

struct EigenOptions {
    double tol = 1e-6;   // relative eigenvalue tolerance
    int max_outer = 500;
    unsigned seed = 1;   // phase of the deterministic start vectors
};

/// Largest generalized eigenvalue of  B v = lambda M v  with B the diffuse
/// boundary mass and M the weighted H1 matrix (stiffness + mass): the
/// discrete constant of the band trace inequality. Power iteration with
/// Jacobi-CG inner solves; returns 0 when B vanishes.
double discrete_trace_constant(const TriMesh& mesh, const PhaseField& pf,
                               const ElementQuadrature& quad, const EigenOptions& opts = {});

/// Largest eigenvalue of  Mass v = lambda (Stiff + B) v: the discrete
/// constant controlling the weighted L2 norm by gradient plus band terms.
double discrete_poincare_friedrichs_constant(const TriMesh& mesh, const PhaseField& pf,
                                             const ElementQuadrature& quad,
                                             const EigenOptions& opts = {});

/// Largest eigenvalue of  Mass v = lambda Stiff v  restricted to the
/// weighted-mean-zero subspace (deflated power iteration).
double discrete_poincare_mean_constant(const TriMesh& mesh, const PhaseField& pf,
                                       const ElementQuadrature& quad,
                                       const EigenOptions& opts = {});

struct InequalityConstants {
    double trace = 0.0;
    double poincare_friedrichs = 0.0;
    double poincare_mean = 0.0;
};

/// All three constants with the operator matrices assembled once.
InequalityConstants compute_inequality_constants(const TriMesh& mesh, const PhaseField& pf,
                                                 const ElementQuadrature& quad,
                                                 const EigenOptions& opts = {});

} // namespace ddlab
