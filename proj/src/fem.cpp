#include "torsmink/fem.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace torsmink {
namespace {

struct TriGeom {
    double area;
    Vec2 grad[3]; // gradient of the P1 basis function at each vertex
};

TriGeom tri_geometry(const TriMesh& mesh, std::size_t t) {
    const auto& tr = mesh.triangles[t];
    const Vec2 p0 = mesh.nodes[tr[0]], p1 = mesh.nodes[tr[1]], p2 = mesh.nodes[tr[2]];
    const double twice_area = (p1 - p0).cross(p2 - p0);
    if (!(twice_area > 0.0)) throw DegenerateGeometry("fem: non-positive triangle area");
    TriGeom g;
    g.area = 0.5 * twice_area;
    g.grad[0] = (p2 - p1).perp() * (1.0 / twice_area);
    g.grad[1] = (p0 - p2).perp() * (1.0 / twice_area);
    g.grad[2] = (p1 - p0).perp() * (1.0 / twice_area);
    return g;
}

// full stiffness over all nodes (no boundary elimination)
CsrMatrix assemble_full_stiffness(const TriMesh& mesh) {
    CsrBuilder kb(mesh.node_count());
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const TriGeom g = tri_geometry(mesh, t);
        const auto& tr = mesh.triangles[t];
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                kb.add(tr[i], tr[j], g.area * g.grad[i].dot(g.grad[j]));
    }
    return kb.build();
}

std::vector<double> assemble_load(const TriMesh& mesh) {
    std::vector<double> b(mesh.node_count(), 0.0);
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const TriGeom g = tri_geometry(mesh, t);
        const auto& tr = mesh.triangles[t];
        for (int i = 0; i < 3; ++i) b[tr[i]] += 2.0 * g.area / 3.0;
    }
    return b;
}

} // namespace

TorsionField solve_torsion(const TriMesh& mesh) {
    const std::size_t n = mesh.node_count();
    std::vector<int> interior_id(n, -1);
    std::size_t n_int = 0;
    for (std::size_t i = 0; i < n; ++i)
        if (!mesh.is_boundary_node(static_cast<int>(i))) interior_id[i] = static_cast<int>(n_int++);
    if (n_int == 0) throw DegenerateGeometry("fem: mesh has no interior nodes");

    CsrBuilder kb(n_int);
    std::vector<double> b(n_int, 0.0);
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const TriGeom g = tri_geometry(mesh, t);
        const auto& tr = mesh.triangles[t];
        for (int i = 0; i < 3; ++i) {
            const int gi = interior_id[tr[i]];
            if (gi < 0) continue;
            b[gi] += 2.0 * g.area / 3.0;
            for (int j = 0; j < 3; ++j) {
                const int gj = interior_id[tr[j]];
                if (gj >= 0) kb.add(gi, gj, g.area * g.grad[i].dot(g.grad[j]));
            }
        }
    }
    const CsrMatrix K = kb.build();
    std::vector<double> x;
    const CgResult cg = cg_solve(K, b, x, 1e-10);

    TorsionField f;
    f.mesh = mesh;
    f.u.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        if (interior_id[i] >= 0) f.u[i] = x[static_cast<std::size_t>(interior_id[i])];
    f.interior_dof_count = n_int;
    f.cg_iterations = cg.iterations;
    return f;
}

double rigidity(const TorsionField& f, double rel_tol) {
    long double energy = 0.0L, two_int_u = 0.0L;
    for (std::size_t t = 0; t < f.mesh.triangles.size(); ++t) {
        const TriGeom g = tri_geometry(f.mesh, t);
        const auto& tr = f.mesh.triangles[t];
        Vec2 grad{0.0, 0.0};
        double usum = 0.0;
        for (int i = 0; i < 3; ++i) {
            grad += f.u[tr[i]] * g.grad[i];
            usum += f.u[tr[i]];
        }
        energy += static_cast<long double>(g.area) * grad.norm_sq();
        two_int_u += static_cast<long double>(2.0 * g.area / 3.0) * usum;
    }
    const double e = static_cast<double>(energy), q = static_cast<double>(two_int_u);
    if (std::fabs(e - q) > rel_tol * std::max(std::fabs(e), std::fabs(q)))
        throw IdentityMismatch("rigidity: energy form and 2*int(u) disagree: " +
                               std::to_string(e) + " vs " + std::to_string(q));
    return e;
}

TorsionData facet_torsion_measure(const TorsionField& f, const ConvexPolygon& p,
                                  double identity_tol) {
    const TriMesh& mesh = f.mesh;
    const std::size_t nb = mesh.boundary_nodes.size();
    const std::size_t nf = p.facets().size();

    // residual of the full Galerkin system on boundary test functions
    const CsrMatrix K = assemble_full_stiffness(mesh);
    const std::vector<double> load = assemble_load(mesh);
    std::vector<double> Ku(mesh.node_count());
    K.mult(f.u, Ku);

    auto bidx = [&](int node) {
        const auto it = std::lower_bound(mesh.boundary_nodes.begin(), mesh.boundary_nodes.end(), node);
        return static_cast<std::size_t>(it - mesh.boundary_nodes.begin());
    };

    std::vector<double> rhs(nb);
    for (std::size_t j = 0; j < nb; ++j) {
        const int node = mesh.boundary_nodes[j];
        rhs[j] = load[node] - Ku[node];
    }

    // boundary mass matrix (piecewise-linear on the boundary chain)
    CsrBuilder mb(nb);
    for (const BoundaryEdge& e : mesh.boundary_edges) {
        const double len = (mesh.nodes[e.b] - mesh.nodes[e.a]).norm();
        const std::size_t ia = bidx(e.a), ib = bidx(e.b);
        mb.add(static_cast<int>(ia), static_cast<int>(ia), len / 3.0);
        mb.add(static_cast<int>(ib), static_cast<int>(ib), len / 3.0);
        mb.add(static_cast<int>(ia), static_cast<int>(ib), len / 6.0);
        mb.add(static_cast<int>(ib), static_cast<int>(ia), len / 6.0);
    }
    TorsionData d;
    d.flux.clear();
    cg_solve(mb.build(), rhs, d.flux, 1e-12);

    // mu_i = int_facet lambda^2, exact for the piecewise-linear flux
    d.facet_measures.assign(nf, 0.0);
    long double flux_total = 0.0L;
    for (const BoundaryEdge& e : mesh.boundary_edges) {
        const double len = (mesh.nodes[e.b] - mesh.nodes[e.a]).norm();
        const double la = d.flux[bidx(e.a)], lb = d.flux[bidx(e.b)];
        d.facet_measures[static_cast<std::size_t>(e.facet)] +=
            len * (la * la + la * lb + lb * lb) / 3.0;
        flux_total += len * (la + lb) / 2.0;
    }

    // diagnostic trace route: per-edge adjacent-triangle gradient magnitude
    d.facet_measures_trace.assign(nf, 0.0);
    {
        std::map<std::pair<int, int>, std::pair<std::size_t, bool>> edge_tri;
        for (std::size_t t = 0; t < mesh.triangles.size(); ++t)
            for (int k = 0; k < 3; ++k) {
                int a = mesh.triangles[t][k], b = mesh.triangles[t][(k + 1) % 3];
                if (a > b) std::swap(a, b);
                edge_tri[{a, b}] = {t, true};
            }
        for (const BoundaryEdge& e : mesh.boundary_edges) {
            int a = e.a, b = e.b;
            if (a > b) std::swap(a, b);
            const auto it = edge_tri.find({a, b});
            if (it == edge_tri.end()) continue;
            const TriGeom g = tri_geometry(mesh, it->second.first);
            const auto& tr = mesh.triangles[it->second.first];
            Vec2 grad{0.0, 0.0};
            for (int k = 0; k < 3; ++k) grad += f.u[tr[k]] * g.grad[k];
            const double len = (mesh.nodes[e.b] - mesh.nodes[e.a]).norm();
            d.facet_measures_trace[static_cast<std::size_t>(e.facet)] += len * grad.norm_sq();
        }
    }

    d.T = rigidity(f);
    {
        long double two_int_u = 0.0L;
        for (std::size_t i = 0; i < mesh.node_count(); ++i) two_int_u += load[i] * f.u[i];
        d.T_int = static_cast<double>(two_int_u);
    }

    long double h_mu = 0.0L;
    for (std::size_t i = 0; i < nf; ++i)
        h_mu += static_cast<long double>(p.facets()[i].offset) * d.facet_measures[i];
    d.support_identity_residual = std::fabs(static_cast<double>(h_mu) - 4.0 * d.T) / (4.0 * d.T);
    d.divergence_residual =
        std::fabs(static_cast<double>(flux_total) - 2.0 * p.area()) / (2.0 * p.area());

    if (d.support_identity_residual > identity_tol)
        throw IdentityMismatch("facet_torsion_measure: support identity residual " +
                               std::to_string(d.support_identity_residual));
    if (d.divergence_residual > identity_tol)
        throw IdentityMismatch("facet_torsion_measure: divergence residual " +
                               std::to_string(d.divergence_residual));
    return d;
}

std::vector<double> lp_measure(const TorsionData& d, const ConvexPolygon& p, double p_exp) {
    if (!(p_exp >= 1.0)) throw InputError("lp_measure: require p >= 1");
    std::vector<double> out(d.facet_measures.size());
    const double h_floor = 1e-14 * p.diameter();
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double h = p.facets()[i].offset;
        const double mu = d.facet_measures[i];
        if (p_exp == 1.0) {
            out[i] = mu;
            continue;
        }
        if (h <= h_floor && mu > 0.0)
            throw OriginOnBoundary("lp_measure: zero support number with positive facet measure");
        out[i] = std::pow(h, 1.0 - p_exp) * mu;
    }
    return out;
}

double mixed_rigidity(const TorsionData& d0, const ConvexPolygon& omega0, const ConvexPolygon& p1) {
    long double s = 0.0L;
    for (std::size_t i = 0; i < omega0.facets().size(); ++i)
        s += static_cast<long double>(support_function(p1, omega0.facets()[i].normal)) *
             d0.facet_measures[i];
    return static_cast<double>(s) / 4.0;
}

double max_gradient(const TorsionField& f) {
    double best = 0.0;
    for (std::size_t t = 0; t < f.mesh.triangles.size(); ++t) {
        const TriGeom g = tri_geometry(f.mesh, t);
        const auto& tr = f.mesh.triangles[t];
        Vec2 grad{0.0, 0.0};
        for (int k = 0; k < 3; ++k) grad += f.u[tr[k]] * g.grad[k];
        best = std::max(best, grad.norm());
    }
    return best;
}

double field_value_at(const TorsionField& f, Vec2 x) {
    const TriMesh& mesh = f.mesh;
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto& tr = mesh.triangles[t];
        const Vec2 a = mesh.nodes[tr[0]], b = mesh.nodes[tr[1]], c = mesh.nodes[tr[2]];
        const double twice_area = (b - a).cross(c - a);
        const double w0 = (b - x).cross(c - x);
        const double w1 = (c - x).cross(a - x);
        const double w2 = (a - x).cross(b - x);
        const double tol = -1e-12 * twice_area;
        if (w0 >= tol && w1 >= tol && w2 >= tol)
            return (w0 * f.u[tr[0]] + w1 * f.u[tr[1]] + w2 * f.u[tr[2]]) / twice_area;
    }
    throw InputError("field_value_at: point outside the mesh");
}

TorsionSolve torsion_solve(const ConvexPolygon& p, double mesh_h, double identity_tol) {
    TorsionSolve s;
    s.field = solve_torsion(triangulate(p, mesh_h));
    s.data = facet_torsion_measure(s.field, p, identity_tol);
    return s;
}

} // namespace torsmink
