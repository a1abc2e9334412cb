#pragma once

#include <vector>

#include "torsmink/csr.hpp"
#include "torsmink/geometry.hpp"
#include "torsmink/mesh.hpp"

// Piecewise-linear Galerkin engine for the torsion problem
//   laplace(u) = -2 in Omega,  u = 0 on the boundary,
// with the rigidity T = int |grad u|^2 = 2 int u, the per-facet torsion
// measures mu_i = int_facet |grad u|^2 ds recovered by the consistent-flux
// method, and the L_p measures h^(1-p) mu.

namespace torsmink {

struct TorsionField {
    TriMesh mesh;
    std::vector<double> u;        // nodal values, zero at boundary nodes
    std::size_t interior_dof_count = 0;
    std::size_t cg_iterations = 0;
};

struct TorsionData {
    double T = 0.0;                        // energy form: sum_tri |grad u|^2 * area
    double T_int = 0.0;                    // 2 * int u
    std::vector<double> facet_measures;    // mu_i per polygon facet, consistent flux
    std::vector<double> facet_measures_trace; // diagnostic: adjacent-triangle gradient traces
    std::vector<double> flux;              // lambda = -du/dnu per boundary node (by boundary_nodes order)
    double support_identity_residual = 0.0;   // |sum h mu - 4T| / 4T
    double divergence_residual = 0.0;         // |sum int lambda - 2 area| / 2 area
};

// Galerkin solve to relative residual 1e-10 (diagonal-preconditioned CG).
TorsionField solve_torsion(const TriMesh& mesh);

// Energy-form rigidity; also evaluates 2*int(u) and throws IdentityMismatch
// when the two disagree by more than rel_tol.
double rigidity(const TorsionField& f, double rel_tol = 1e-2);

// Boundary flux recovery and per-facet torsion measures for the polygon the
// field's mesh was built on. identity_tol bounds both stored residuals.
TorsionData facet_torsion_measure(const TorsionField& f, const ConvexPolygon& p,
                                  double identity_tol = 5e-2);

// h_i^(1-p) * mu_i per facet.
std::vector<double> lp_measure(const TorsionData& d, const ConvexPolygon& p, double p_exp);

// T(Omega0, P1) = (1/4) sum_i h(P1, xi_i) mu_i(Omega0) over Omega0's facets.
double mixed_rigidity(const TorsionData& d0, const ConvexPolygon& omega0, const ConvexPolygon& p1);

// max over triangles of |grad u| (for the gradient-bound check)
double max_gradient(const TorsionField& f);

// interpolate u at a point inside the domain
double field_value_at(const TorsionField& f, Vec2 x);

// convenience: triangulate at target_h, solve, measure
struct TorsionSolve {
    TorsionField field;
    TorsionData data;
};
TorsionSolve torsion_solve(const ConvexPolygon& p, double mesh_h, double identity_tol = 5e-2);

} // namespace torsmink
