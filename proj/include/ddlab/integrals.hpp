#pragma once

#include "ddlab/fields.hpp"
#include "ddlab/meshing.hpp"
#include "ddlab/phasefield.hpp"

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace ddlab {

/// Mesh refinement policy for eps-studies: cells of size gamma * eps^2,
/// relaxed (but never beyond eps^2, which stays a hard guard) when the
/// vertex cap binds.
struct MeshPolicy {
    double gamma = 0.5;
    std::int64_t vertex_cap = kDefaultVertexCap;
};

/// Mesh for one study row. Throws ResourceLimit when the cap cannot be met
/// under the h < eps^2 guard.
TriMesh mesh_for_eps(const ComputationalBox& box, double eps, const MeshPolicy& policy);

/// Default bounding box for a study on the given domain.
ComputationalBox default_study_box(const SharpDomain& domain, double eps_max);

/// Quadrature approximation of the weighted volume integral of h against
/// omega over the box.
double diffuse_volume_integral(const ScalarField& h, const PhaseField& pf,
                               const TriMesh& mesh, const ElementQuadrature& quad);

/// Quadrature approximation of the band integral of h against |grad omega|.
double diffuse_surface_integral(const ScalarField& h, const PhaseField& pf,
                                const TriMesh& mesh, const ElementQuadrature& quad);

/// Sharp reference: integral of h over D itself. Elements near the boundary
/// are subdivided adaptively down to interface_depth; leaf triangles cut by
/// the boundary are clipped against the linear interpolant of the oriented
/// distance.
double sharp_volume_integral(const ScalarField& h, const SharpDomain& domain,
                             const TriMesh& mesh, const ElementQuadrature& quad,
                             int interface_depth = 4);

/// Sharp boundary reference via the parametric boundary rule.
double sharp_boundary_integral(const ScalarField& h, const SharpDomain& domain,
                               int order = 8);

/// Quadrature points covering the intersection of element t with D, using
/// the same adaptive subdivision and leaf clipping as sharp_volume_integral.
void sharp_domain_points(const SharpDomain& domain, const TriMesh& mesh, std::int64_t t,
                         const ElementQuadrature& quad, int interface_depth,
                         std::vector<QuadPoint>& out);

struct IntegralErrorRow {
    double eps = 0.0;
    double diffuse_value = 0.0;
    double sharp_value = 0.0;
    double error = 0.0; // |diffuse - sharp|
};

struct IntegralStudy {
    std::vector<IntegralErrorRow> rows;
    std::vector<double> eocs; // pairwise, defined from the second row
};

/// Pairwise experimental orders log2(e_k / e_{k+1}); entries must be
/// positive and correspond to successive halvings of eps.
std::vector<double> eoc(const std::vector<double>& errors);

/// Volume-integral error study over a decreasing eps list (length >= 3).
IntegralStudy volume_error_study(const ScalarField& h, const SProfile& profile,
                                 const SharpDomain& domain, const std::vector<double>& eps_list,
                                 const MeshPolicy& policy = {});

/// Boundary-integral error study.
IntegralStudy surface_error_study(const ScalarField& g, const SProfile& profile,
                                  const SharpDomain& domain, const std::vector<double>& eps_list,
                                  const MeshPolicy& policy = {});

/// CSV rows `eps,diffuse,sharp,error,eoc` (eoc empty on the first row).
void write_integral_csv(const IntegralStudy& study, std::ostream& out);

} // namespace ddlab
