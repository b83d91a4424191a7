#pragma once

#include "ddlab/fields.hpp"
#include "ddlab/meshing.hpp"
#include "ddlab/phasefield.hpp"
#include "ddlab/sparse.hpp"

#include <functional>
#include <iosfwd>
#include <optional>

namespace ddlab {

/// Symmetric 2x2 coefficient matrix.
struct Mat2 {
    double a11 = 1.0, a12 = 0.0, a22 = 1.0;

    static Mat2 identity() { return {1.0, 0.0, 1.0}; }
    static Mat2 scaled(double k) { return {k, 0.0, k}; }

    double quad(Point2 g1, Point2 g2) const {
        return a11 * g1.x * g2.x + a12 * (g1.x * g2.y + g1.y * g2.x) + a22 * g1.y * g2.y;
    }
    double min_eigenvalue() const;
    double max_eigenvalue() const;
};

using MatrixFn = std::function<Mat2(Point2)>;

/// Problem coefficients: diffusion A, reaction c >= 0, source f, boundary
/// datum g, and the Robin coefficient b (ignored for the other conditions).
struct Coefficients {
    MatrixFn A = [](Point2) { return Mat2::identity(); };
    ScalarFn c = constant_fn(0.0);
    ScalarFn f = constant_fn(0.0);
    ScalarFn g = constant_fn(0.0);
    ScalarFn b = constant_fn(1.0);
};

/// Boundary-condition flavour of the relaxed problem. Dirichlet data enters
/// through the penalty coefficient 1/beta with beta = eps^sigma.
struct BCKind {
    enum class Type { Robin, DirichletPenalty, Neumann };
    Type type = Type::Robin;
    double sigma = 1.0; // DirichletPenalty only

    static BCKind robin() { return {Type::Robin, 0.0}; }
    static BCKind dirichlet_penalty(double sigma) { return {Type::DirichletPenalty, sigma}; }
    static BCKind neumann() { return {Type::Neumann, 0.0}; }
};

/// Map between mesh vertices and rows of the reduced linear system. A vertex
/// is active iff some incident element carries weight-function quadrature
/// mass above 1e-14; everything else is excluded from the system.
struct ActivityMap {
    std::vector<std::int32_t> active_of_vertex; // -1 for inactive vertices
    std::vector<std::int32_t> vertex_of_active;
    // Per-element state: 0 = no support, 1 = fully inside (omega == 1),
    // 2 = band element.
    std::vector<std::uint8_t> element_state;
    std::int32_t n_active = 0;
};

ActivityMap compute_activity(const TriMesh& mesh, const ElementQuadrature& quad,
                             const PhaseField& pf);

struct AssembledSystem {
    SparseCsr matrix;     // on active DOFs
    std::vector<double> rhs;
    ActivityMap activity;
    BCKind bc;
    double kappa = 1.0;   // sampled ellipticity bound of A
    double omega_mass = 0.0; // integral of the weight over the box
    /// Weighted mean row (Neumann only): m_i = integral of phi_i * omega.
    std::optional<std::vector<double>> constraint;
};

/// Assembles stiffness + reaction mass against the weight omega and the
/// boundary mass against |grad omega|, with the load
///   f * omega + g_eff * |grad omega|,
/// where g_eff = g (Robin/Neumann) or g/beta (penalty) and the boundary
/// coefficient is b, 1/beta, or absent, respectively.
AssembledSystem assemble(const TriMesh& mesh, const ElementQuadrature& quad,
                         const PhaseField& pf, const Coefficients& coeffs, BCKind bc);

/// Nodal P1 function on the mesh; inactive vertices carry 0.
struct FEFunction {
    const TriMesh* mesh = nullptr;
    std::vector<double> values; // one per mesh vertex

    double value_at(Point2 p) const;
    Point2 gradient_at(Point2 p) const;
};

FEFunction to_fe_function(const TriMesh& mesh, const ActivityMap& activity,
                          const std::vector<double>& active_values);

enum class WeightedOperator { StiffnessOmega, MassOmega, BoundaryMass };

/// Single weighted operator with unit coefficients, on the given activity
/// map. Used for the functional-inequality constants.
SparseCsr assemble_operator(const TriMesh& mesh, const ElementQuadrature& quad,
                            const PhaseField& pf, const ActivityMap& activity,
                            WeightedOperator op);

/// Weighted-mean vector m_i = integral of phi_i * omega over the box.
std::vector<double> weighted_mean_vector(const TriMesh& mesh, const ElementQuadrature& quad,
                                         const PhaseField& pf, const ActivityMap& activity);

struct SolveStats {
    std::int64_t iterations = 0;
    double relative_residual = 0.0;
    std::int32_t n_active = 0;
};

struct DiffuseSolution {
    FEFunction u;
    AssembledSystem system;
    SolveStats stats;
};

/// assemble + conjugate-gradient solve. Neumann systems are solved in the
/// weighted-mean-zero hyperplane through the bordered constraint row.
DiffuseSolution solve_diffuse_problem(const TriMesh& mesh, const ElementQuadrature& quad,
                                      const PhaseField& pf, const Coefficients& coeffs,
                                      BCKind bc, const CgOptions& opts = {},
                                      const std::vector<double>* initial_guess = nullptr);

/// Relative algebraic residual ||A x - b|| / ||b|| of a solution.
double galerkin_residual(const AssembledSystem& system, const FEFunction& u);

/// Diffuse trace mismatch integral of (u - g)^2 |grad omega|.
double boundary_mismatch(const TriMesh& mesh, const ElementQuadrature& quad,
                         const PhaseField& pf, const FEFunction& u, const ScalarFn& g);

/// Solution dump: CSV `vertex_index,x,y,value`.
void dump_solution(const FEFunction& u, std::ostream& out);

} // namespace ddlab
