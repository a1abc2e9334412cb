#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "torsmink/errors.hpp"
#include "torsmink/vec2.hpp"

// Planar convex geometry: discrete measures on the circle, Wulff shapes
// (halfplane intersections), support functions, exact Hausdorff distance and
// Minkowski combinations. All types are immutable values after construction
// and every operation is pure.

namespace torsmink {

// Atoms c_i * delta_{xi_i} on the unit circle, kept sorted by angle with
// near-duplicate directions merged by weight summation. A valid measure is
// not concentrated on any closed half-circle: the largest angular gap
// between consecutive atoms is strictly less than pi.
struct DiscreteMeasure {
    std::vector<UnitVector> normals; // sorted by angle in (-pi, pi]
    std::vector<double> weights;

    std::size_t size() const { return normals.size(); }
    double total() const;
};

constexpr double kNormalMergeTol = 1e-9; // radians

DiscreteMeasure build_measure(const std::vector<UnitVector>& normals,
                              const std::vector<double>& weights);

// (satisfied, max angular gap). Satisfied iff max gap < pi.
std::pair<bool, double> hemisphere_check(const DiscreteMeasure& m);

// Support numbers aligned index-for-index with a normal list.
using SupportVector = std::vector<double>;

struct Facet {
    UnitVector normal;
    double offset = 0.0;      // support number h_i = x . normal on the facet line
    double length = 0.0;
    int source_index = -1;    // index into the generating normal list, -1 if none
};

// Strictly convex polygon: CCW vertices, one facet record per edge.
// vertex(k) and vertex(k+1) are the endpoints of facet k.
class ConvexPolygon {
public:
    // Build from a CCW vertex loop; collinear vertices within tolerance are
    // merged. Throws InvalidPolygon when fewer than 3 distinct vertices
    // survive or the loop is not convex/CCW.
    static ConvexPolygon from_vertices(const std::vector<Vec2>& vertices);

    // Build from matched vertex/facet lists that already satisfy the
    // invariants (used by the Wulff construction).
    static ConvexPolygon from_parts(std::vector<Vec2> vertices, std::vector<Facet> facets);

    const std::vector<Vec2>& vertices() const { return vertices_; }
    const std::vector<Facet>& facets() const { return facets_; }
    std::size_t size() const { return vertices_.size(); }
    Vec2 vertex(std::size_t k) const { return vertices_[k % vertices_.size()]; }

    double area() const { return area_; }
    double diameter() const { return diameter_; }
    // max_i |v_i|: the circumradius about the origin
    double circumradius() const { return circumradius_; }

    ConvexPolygon translated(Vec2 t) const;
    ConvexPolygon scaled(double m) const;

private:
    ConvexPolygon() = default;
    void finalize();

    std::vector<Vec2> vertices_;
    std::vector<Facet> facets_;
    double area_ = 0.0;
    double diameter_ = 0.0;
    double circumradius_ = 0.0;
};

struct HausdorffResult {
    double distance = 0.0;
    UnitVector witness_direction;
};

// P(y) = intersection of {x . xi_i <= y_i}. Redundant halfplanes contribute
// no facet. Requires the hemisphere condition (else Unbounded) and a
// positive-area result (else EmptyInterior). Origin-on-boundary results are
// legal: y_i = 0 entries keep that support line through the origin.
ConvexPolygon wulff_shape(const std::vector<UnitVector>& normals, const SupportVector& y);

double support_function(const ConvexPolygon& p, UnitVector u);

// h(P, xi_i) per normal; wulff_shape of the result reproduces P.
SupportVector clean_support_vector(const ConvexPolygon& p, const std::vector<UnitVector>& normals);

// Exact sup over the circle of |h_A - h_B|, maximized in closed form on each
// arc between the merged facet-normal breakpoints.
HausdorffResult hausdorff_distance(const ConvexPolygon& a, const ConvexPolygon& b);

struct PolygonMetrics {
    double area = 0.0;
    double diameter = 0.0;
    double circumradius_from_origin = 0.0;
};
PolygonMetrics polygon_metrics(const ConvexPolygon& p);

// a*A + b*B (Minkowski combination), a,b >= 0, a+b > 0. The result supports
// a*h_A + b*h_B exactly in every direction.
ConvexPolygon minkowski_combine(double a, const ConvexPolygon& A, double b, const ConvexPolygon& B);

// Per-atom facet index on p (normals matched within an angular tolerance),
// or nullopt when the atom's facet is absent from p.
std::vector<std::optional<std::size_t>> match_facets(const DiscreteMeasure& m,
                                                     const ConvexPolygon& p,
                                                     double angle_tol = 1e-7);

ConvexPolygon regular_polygon(int sides, double inradius, double angle_offset = 0.0);

} // namespace torsmink
