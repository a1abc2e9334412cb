#include "torsmink/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

namespace torsmink {

UnitVector::UnitVector(double x_, double y_) {
    const double n = std::hypot(x_, y_);
    if (!(n > 1e-300) || !std::isfinite(n))
        throw InvalidPolygon("unit vector from near-zero or non-finite input");
    x = x_ / n;
    y = y_ / n;
}

double angular_distance(UnitVector a, UnitVector b) {
    // atan2 of (|cross|, dot) resolves tiny separations that acos cannot
    const double c = a.x * b.y - a.y * b.x;
    const double d = a.dot(b);
    return std::atan2(std::fabs(c), d);
}

double DiscreteMeasure::total() const {
    return std::accumulate(weights.begin(), weights.end(), 0.0);
}

DiscreteMeasure build_measure(const std::vector<UnitVector>& normals,
                              const std::vector<double>& weights) {
    if (normals.size() != weights.size())
        throw InputError("build_measure: normals and weights differ in length");
    if (normals.size() < 3)
        throw TooFewNormals("build_measure: need at least 3 atoms, got " +
                            std::to_string(normals.size()));
    for (double w : weights)
        if (!(w > 0.0) || !std::isfinite(w))
            throw NonPositiveWeight("build_measure: weights must be positive and finite");

    std::vector<std::size_t> order(normals.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return normals[a].angle() < normals[b].angle();
    });

    DiscreteMeasure m;
    for (std::size_t k : order) {
        if (!m.normals.empty() && angular_distance(m.normals.back(), normals[k]) <= kNormalMergeTol) {
            m.weights.back() += weights[k];
        } else {
            m.normals.push_back(normals[k]);
            m.weights.push_back(weights[k]);
        }
    }
    // wraparound merge between the last and first atoms
    if (m.normals.size() >= 2 &&
        angular_distance(m.normals.front(), m.normals.back()) <= kNormalMergeTol) {
        m.weights.front() += m.weights.back();
        m.normals.pop_back();
        m.weights.pop_back();
    }
    if (m.normals.size() < 3)
        throw TooFewNormals("build_measure: fewer than 3 atoms after merging duplicates");

    auto [ok, gap] = hemisphere_check(m);
    if (!ok)
        throw HemisphereViolation("build_measure: atoms concentrated on a closed half-circle "
                                  "(max angular gap " + std::to_string(gap) + ")");
    return m;
}

std::pair<bool, double> hemisphere_check(const DiscreteMeasure& m) {
    const std::size_t n = m.normals.size();
    double max_gap = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double a = m.normals[i].angle();
        const double b = (i + 1 < n) ? m.normals[i + 1].angle() : m.normals[0].angle() + 2.0 * M_PI;
        max_gap = std::max(max_gap, b - a);
    }
    return {max_gap < M_PI, max_gap};
}

// ---------------------------------------------------------------------------
// ConvexPolygon

void ConvexPolygon::finalize() {
    const std::size_t n = vertices_.size();
    if (n < 3 || facets_.size() != n)
        throw InvalidPolygon("polygon needs >= 3 vertices with matching facets");

    area_ = 0.0;
    for (std::size_t k = 0; k < n; ++k) area_ += vertices_[k].cross(vertices_[(k + 1) % n]);
    area_ *= 0.5;
    if (!(area_ > 0.0)) throw EmptyInterior("polygon has non-positive area");

    diameter_ = 0.0;
    circumradius_ = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        circumradius_ = std::max(circumradius_, vertices_[i].norm());
        for (std::size_t j = i + 1; j < n; ++j)
            diameter_ = std::max(diameter_, (vertices_[i] - vertices_[j]).norm());
    }

    // strict convexity and facet consistency
    const double cross_tol = 1e-14 * diameter_ * diameter_;
    const double line_tol = 1e-10 * diameter_;
    for (std::size_t k = 0; k < n; ++k) {
        const Vec2 e0 = vertices_[(k + 1) % n] - vertices_[k];
        const Vec2 e1 = vertices_[(k + 2) % n] - vertices_[(k + 1) % n];
        if (!(e0.cross(e1) > cross_tol))
            throw InvalidPolygon("polygon traversal not strictly convex CCW");
        const Facet& f = facets_[k];
        if (std::fabs(f.normal.dot(vertices_[k]) - f.offset) > line_tol ||
            std::fabs(f.normal.dot(vertices_[(k + 1) % n]) - f.offset) > line_tol)
            throw InvalidPolygon("facet endpoints do not lie on the support line");
    }
}

ConvexPolygon ConvexPolygon::from_vertices(const std::vector<Vec2>& input) {
    if (input.size() < 3) throw InvalidPolygon("need at least 3 vertices");
    std::vector<Vec2> v = input;

    double signed_area = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k)
        signed_area += v[k].cross(v[(k + 1) % v.size()]);
    if (signed_area < 0.0) std::reverse(v.begin(), v.end());

    double scale = 0.0;
    for (const Vec2& p : v)
        for (const Vec2& q : v) scale = std::max(scale, (p - q).norm());
    if (!(scale > 0.0)) throw InvalidPolygon("all vertices coincide");

    // merge coincident then collinear vertices
    std::vector<Vec2> w;
    for (const Vec2& p : v)
        if (w.empty() || (p - w.back()).norm() > 1e-12 * scale) w.push_back(p);
    if (w.size() > 1 && (w.front() - w.back()).norm() <= 1e-12 * scale) w.pop_back();

    std::vector<Vec2> u;
    const std::size_t nw = w.size();
    for (std::size_t k = 0; k < nw; ++k) {
        const Vec2 prev = w[(k + nw - 1) % nw];
        const Vec2 next = w[(k + 1) % nw];
        if ((w[k] - prev).cross(next - w[k]) > 1e-12 * scale * scale) u.push_back(w[k]);
    }
    if (u.size() < 3) throw InvalidPolygon("fewer than 3 vertices after cleaning");

    ConvexPolygon p;
    p.vertices_ = u;
    for (std::size_t k = 0; k < u.size(); ++k) {
        const Vec2 d = u[(k + 1) % u.size()] - u[k];
        Facet f;
        f.normal = UnitVector(d.y, -d.x);
        f.offset = f.normal.dot(u[k]);
        f.length = d.norm();
        p.facets_.push_back(f);
    }
    p.finalize();
    return p;
}

ConvexPolygon ConvexPolygon::from_parts(std::vector<Vec2> vertices, std::vector<Facet> facets) {
    ConvexPolygon p;
    p.vertices_ = std::move(vertices);
    p.facets_ = std::move(facets);
    p.finalize();
    return p;
}

ConvexPolygon ConvexPolygon::translated(Vec2 t) const {
    std::vector<Vec2> v = vertices_;
    for (Vec2& p : v) p += t;
    std::vector<Facet> f = facets_;
    for (Facet& fc : f) fc.offset += fc.normal.dot(t);
    return from_parts(std::move(v), std::move(f));
}

ConvexPolygon ConvexPolygon::scaled(double m) const {
    if (!(m > 0.0)) throw InvalidPolygon("scale factor must be positive");
    std::vector<Vec2> v = vertices_;
    for (Vec2& p : v) p = p * m;
    std::vector<Facet> f = facets_;
    for (Facet& fc : f) {
        fc.offset *= m;
        fc.length *= m;
    }
    return from_parts(std::move(v), std::move(f));
}

// ---------------------------------------------------------------------------
// Wulff shape: halfplane intersection with normals sorted by angle

namespace {

struct HalfPlane {
    UnitVector n;
    double off;
    int src;
    double ang;
};

Vec2 line_intersection(const HalfPlane& a, const HalfPlane& b) {
    const double det = a.n.x * b.n.y - a.n.y * b.n.x;
    return {(a.off * b.n.y - b.off * a.n.y) / det, (a.n.x * b.off - b.n.x * a.off) / det};
}

bool strictly_outside(const HalfPlane& h, Vec2 p, double tol) {
    return h.n.dot(p) > h.off + tol;
}

} // namespace

ConvexPolygon wulff_shape(const std::vector<UnitVector>& normals, const SupportVector& y) {
    if (normals.size() != y.size())
        throw InputError("wulff_shape: normals and support vector differ in length");
    if (normals.size() < 3) throw Unbounded("wulff_shape: fewer than 3 halfplanes");
    for (double v : y)
        if (!(v >= 0.0) || !std::isfinite(v))
            throw InputError("wulff_shape: support numbers must be finite and >= 0");

    std::vector<HalfPlane> hp;
    hp.reserve(normals.size());
    for (std::size_t i = 0; i < normals.size(); ++i)
        hp.push_back({normals[i], y[i], static_cast<int>(i), normals[i].angle()});
    std::stable_sort(hp.begin(), hp.end(),
                     [](const HalfPlane& a, const HalfPlane& b) { return a.ang < b.ang; });

    // same-direction duplicates: keep the tighter constraint
    std::vector<HalfPlane> uniq;
    for (const HalfPlane& h : hp) {
        if (!uniq.empty() && angular_distance(uniq.back().n, h.n) <= 1e-12) {
            if (h.off < uniq.back().off) uniq.back() = h;
        } else {
            uniq.push_back(h);
        }
    }
    if (uniq.size() >= 2 && angular_distance(uniq.front().n, uniq.back().n) <= 1e-12) {
        if (uniq.back().off < uniq.front().off) uniq.front() = uniq.back();
        uniq.pop_back();
    }
    if (uniq.size() < 3) throw Unbounded("wulff_shape: fewer than 3 distinct directions");

    double max_gap = 0.0;
    for (std::size_t i = 0; i < uniq.size(); ++i) {
        const double a = uniq[i].ang;
        const double b = (i + 1 < uniq.size()) ? uniq[i + 1].ang : uniq[0].ang + 2.0 * M_PI;
        max_gap = std::max(max_gap, b - a);
    }
    if (!(max_gap < M_PI))
        throw Unbounded("wulff_shape: normals concentrated on a closed half-circle");

    double scale = 0.0;
    for (const HalfPlane& h : uniq) scale = std::max(scale, std::fabs(h.off));
    const double tol = 1e-12 * std::max(1.0, scale);

    std::deque<HalfPlane> dq;
    for (const HalfPlane& h : uniq) {
        while (dq.size() >= 2 &&
               strictly_outside(h, line_intersection(dq[dq.size() - 1], dq[dq.size() - 2]), tol))
            dq.pop_back();
        while (dq.size() >= 2 && strictly_outside(h, line_intersection(dq[0], dq[1]), tol))
            dq.pop_front();
        dq.push_back(h);
    }
    bool changed = true;
    while (changed && dq.size() > 2) {
        changed = false;
        if (strictly_outside(dq[0], line_intersection(dq[dq.size() - 1], dq[dq.size() - 2]), tol)) {
            dq.pop_back();
            changed = true;
        }
        if (dq.size() > 2 &&
            strictly_outside(dq[dq.size() - 1], line_intersection(dq[0], dq[1]), tol)) {
            dq.pop_front();
            changed = true;
        }
    }
    if (dq.size() < 3) throw EmptyInterior("wulff_shape: intersection has no interior");

    // vertex k = intersection of line k with line k+1; facet k spans v_{k-1} -> v_k
    std::vector<HalfPlane> kept(dq.begin(), dq.end());
    auto vertex_loop = [](const std::vector<HalfPlane>& lines) {
        const std::size_t m = lines.size();
        std::vector<Vec2> verts(m);
        for (std::size_t k = 0; k < m; ++k)
            verts[k] = line_intersection(lines[k], lines[(k + 1) % m]);
        return verts;
    };

    std::vector<Vec2> verts = vertex_loop(kept);
    double diam = 0.0;
    for (std::size_t i = 0; i < verts.size(); ++i)
        for (std::size_t j = i + 1; j < verts.size(); ++j)
            diam = std::max(diam, (verts[i] - verts[j]).norm());

    // peel grazing facets (zero-length edges within 1e-10 * diameter) and
    // re-intersect the surviving support lines so vertices stay exact
    const double edge_tol = 1e-10 * std::max(diam, 1e-30);
    for (bool again = true; again && kept.size() > 3;) {
        again = false;
        for (std::size_t k = 0; k < kept.size(); ++k) {
            const std::size_t prev = (k + kept.size() - 1) % kept.size();
            if ((verts[k] - verts[prev]).norm() <= edge_tol) { // facet k has no extent
                kept.erase(kept.begin() + static_cast<std::ptrdiff_t>(k));
                verts = vertex_loop(kept);
                again = true;
                break;
            }
        }
    }
    if (kept.size() < 3) throw EmptyInterior("wulff_shape: intersection degenerate");
    for (std::size_t k = 0; k < kept.size(); ++k)
        if ((verts[k] - verts[(k + kept.size() - 1) % kept.size()]).norm() <= edge_tol)
            throw EmptyInterior("wulff_shape: intersection degenerate");

    double area2 = 0.0;
    for (std::size_t k = 0; k < verts.size(); ++k)
        area2 += verts[k].cross(verts[(k + 1) % verts.size()]);
    if (!(area2 > 2e-12 * std::max(diam * diam, 1e-30)))
        throw EmptyInterior("wulff_shape: intersection has zero area");

    const std::size_t m = kept.size();
    std::vector<Vec2> out_verts(m);
    std::vector<Facet> out_facets(m);
    for (std::size_t k = 0; k < m; ++k) {
        const Vec2 a = verts[(k + m - 1) % m];
        out_verts[k] = a;
        Facet& f = out_facets[k];
        f.normal = kept[k].n;
        f.offset = kept[k].off;
        f.length = (verts[k] - a).norm();
        f.source_index = kept[k].src;
    }
    return ConvexPolygon::from_parts(std::move(out_verts), std::move(out_facets));
}

// ---------------------------------------------------------------------------

double support_function(const ConvexPolygon& p, UnitVector u) {
    double best = -std::numeric_limits<double>::infinity();
    for (const Vec2& v : p.vertices()) best = std::max(best, u.dot(v));
    return best;
}

SupportVector clean_support_vector(const ConvexPolygon& p, const std::vector<UnitVector>& normals) {
    SupportVector y(normals.size());
    for (std::size_t i = 0; i < normals.size(); ++i) y[i] = support_function(p, normals[i]);
    return y;
}

namespace {

// vertex achieving the support maximum in direction theta
Vec2 support_vertex(const ConvexPolygon& p, double theta) {
    const UnitVector u = UnitVector::from_angle(theta);
    Vec2 best = p.vertices()[0];
    double bv = u.dot(best);
    for (const Vec2& v : p.vertices()) {
        const double s = u.dot(v);
        if (s > bv) {
            bv = s;
            best = v;
        }
    }
    return best;
}

double wrap_to(double theta, double lo) {
    while (theta < lo) theta += 2.0 * M_PI;
    while (theta >= lo + 2.0 * M_PI) theta -= 2.0 * M_PI;
    return theta;
}

} // namespace

HausdorffResult hausdorff_distance(const ConvexPolygon& a, const ConvexPolygon& b) {
    std::vector<double> breaks;
    breaks.reserve(a.facets().size() + b.facets().size());
    for (const Facet& f : a.facets()) breaks.push_back(f.normal.angle());
    for (const Facet& f : b.facets()) breaks.push_back(f.normal.angle());
    std::sort(breaks.begin(), breaks.end());

    HausdorffResult best;
    best.distance = -1.0;
    auto consider = [&](double theta, Vec2 d) {
        const UnitVector u = UnitVector::from_angle(theta);
        const double v = std::fabs(u.dot(d));
        if (v > best.distance) {
            best.distance = v;
            best.witness_direction = u;
        }
    };

    const std::size_t nb = breaks.size();
    for (std::size_t k = 0; k < nb; ++k) {
        const double alpha = breaks[k];
        const double beta = (k + 1 < nb) ? breaks[k + 1] : breaks[0] + 2.0 * M_PI;
        if (beta - alpha < 1e-15) continue;
        const double mid = 0.5 * (alpha + beta);
        const Vec2 d = support_vertex(a, mid) - support_vertex(b, mid);
        consider(alpha, d);
        consider(beta, d);
        if (d.norm() > 0.0) {
            // critical points of d . (cos, sin) on the arc
            const double phi = std::atan2(d.y, d.x);
            for (double cand : {wrap_to(phi, alpha), wrap_to(phi + M_PI, alpha)})
                if (cand > alpha && cand < beta) consider(cand, d);
        }
    }
    if (best.distance < 0.0) best.distance = 0.0;
    return best;
}

PolygonMetrics polygon_metrics(const ConvexPolygon& p) {
    return {p.area(), p.diameter(), p.circumradius()};
}

ConvexPolygon minkowski_combine(double a, const ConvexPolygon& A, double b,
                                const ConvexPolygon& B) {
    if (!(a >= 0.0) || !(b >= 0.0) || !(a + b > 0.0))
        throw InputError("minkowski_combine: need a,b >= 0 with a+b > 0");
    if (a == 0.0) return B.scaled(b);
    if (b == 0.0) return A.scaled(a);

    std::vector<UnitVector> normals;
    for (const Facet& f : A.facets()) normals.push_back(f.normal);
    for (const Facet& f : B.facets()) normals.push_back(f.normal);
    std::sort(normals.begin(), normals.end(),
              [](UnitVector u, UnitVector v) { return u.angle() < v.angle(); });
    std::vector<UnitVector> uniq;
    for (UnitVector u : normals)
        if (uniq.empty() || angular_distance(uniq.back(), u) > 1e-12) uniq.push_back(u);
    if (uniq.size() >= 2 && angular_distance(uniq.front(), uniq.back()) <= 1e-12) uniq.pop_back();

    SupportVector y(uniq.size());
    for (std::size_t i = 0; i < uniq.size(); ++i)
        y[i] = a * support_function(A, uniq[i]) + b * support_function(B, uniq[i]);
    // the combination's support can be negative when the origin is outside;
    // shift into the positive cone, intersect, shift back
    double shift = 0.0;
    for (double v : y) shift = std::min(shift, v);
    if (shift < 0.0) {
        const Vec2 t = a * A.vertices()[0] + b * B.vertices()[0]; // a point of the sum
        for (std::size_t i = 0; i < uniq.size(); ++i) y[i] -= uniq[i].dot(t);
        for (double& v : y) v = std::max(v, 0.0);
        return wulff_shape(uniq, y).translated(t);
    }
    return wulff_shape(uniq, y);
}

std::vector<std::optional<std::size_t>> match_facets(const DiscreteMeasure& m,
                                                     const ConvexPolygon& p, double angle_tol) {
    std::vector<std::optional<std::size_t>> out(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) {
        double best = angle_tol;
        for (std::size_t f = 0; f < p.facets().size(); ++f) {
            const double d = angular_distance(m.normals[i], p.facets()[f].normal);
            if (d <= best) {
                best = d;
                out[i] = f;
            }
        }
    }
    return out;
}

ConvexPolygon regular_polygon(int sides, double inradius, double angle_offset) {
    if (sides < 3) throw InvalidPolygon("regular_polygon: need >= 3 sides");
    std::vector<UnitVector> normals;
    for (int k = 0; k < sides; ++k)
        normals.push_back(UnitVector::from_angle(angle_offset + 2.0 * M_PI * k / sides));
    return wulff_shape(normals, SupportVector(static_cast<std::size_t>(sides), inradius));
}

} // namespace torsmink
