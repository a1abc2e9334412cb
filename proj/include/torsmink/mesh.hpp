#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "torsmink/geometry.hpp"

namespace torsmink {

struct BoundaryEdge {
    int a = -1;      // node indices, CCW along the boundary
    int b = -1;
    int facet = -1;  // facet of the source polygon this edge lies on
};

struct TriMesh {
    std::vector<Vec2> nodes;
    std::vector<std::array<int, 3>> triangles; // CCW node triples
    std::vector<BoundaryEdge> boundary_edges;  // ordered CCW around the boundary
    std::vector<int> boundary_nodes;           // sorted unique node indices on the boundary
    double target_h = 0.0;

    std::size_t node_count() const { return nodes.size(); }
    bool is_boundary_node(int i) const;
    double triangle_area(std::size_t t) const;
    double total_area() const;
    double min_angle_deg() const;
};

// Triangulate a convex polygon: the boundary is subdivided so every boundary
// edge is at most target_h long (power-of-two subdivision per facet, so that
// halving target_h at least doubles the boundary edge count), the interior is
// seeded from a fixed origin-anchored near-hexagonal lattice, and the result
// is Delaunay-refined until every non-corner triangle has minimum angle
// >= 20 degrees and circumradius <= 0.75 * target_h.
//
// facet_min_counts, when given, raises the subdivision count per facet (the
// edge <= target_h bound always holds). The solver pins counts from a
// reference body so its objective stays smooth across length flips.
TriMesh triangulate(const ConvexPolygon& p, double target_h,
                    const std::vector<int>* facet_min_counts = nullptr);

} // namespace torsmink
