#include "torsmink/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <utility>

namespace torsmink {

bool TriMesh::is_boundary_node(int i) const {
    return std::binary_search(boundary_nodes.begin(), boundary_nodes.end(), i);
}

double TriMesh::triangle_area(std::size_t t) const {
    const auto& tr = triangles[t];
    const Vec2 a = nodes[tr[0]], b = nodes[tr[1]], c = nodes[tr[2]];
    return 0.5 * (b - a).cross(c - a);
}

double TriMesh::total_area() const {
    long double s = 0.0L;
    for (std::size_t t = 0; t < triangles.size(); ++t) s += triangle_area(t);
    return static_cast<double>(s);
}

double TriMesh::min_angle_deg() const {
    double worst = 180.0;
    for (const auto& tr : triangles) {
        for (int k = 0; k < 3; ++k) {
            const Vec2 a = nodes[tr[k]], b = nodes[tr[(k + 1) % 3]], c = nodes[tr[(k + 2) % 3]];
            const Vec2 u = b - a, v = c - a;
            const double ang = std::atan2(std::fabs(u.cross(v)), u.dot(v));
            worst = std::min(worst, ang * 180.0 / M_PI);
        }
    }
    return worst;
}

namespace {

// ---------------------------------------------------------------------------
// Bowyer-Watson Delaunay triangulation with a super-box, deterministic
// insertion order, long-double predicates for near-degenerate cases.

struct Tri {
    int v[3];  // CCW
    int nb[3]; // nb[k] shares edge (v[k], v[(k+1)%3]); -1 at the super-box rim
    bool alive = true;
};

double orient(Vec2 a, Vec2 b, Vec2 c) {
    const double d = (b - a).cross(c - a);
    const double mag = std::fabs((b.x - a.x) * (c.y - a.y)) + std::fabs((b.y - a.y) * (c.x - a.x));
    if (std::fabs(d) > 1e-12 * mag) return d;
    const long double ax = a.x, ay = a.y;
    return static_cast<double>((static_cast<long double>(b.x) - ax) * (static_cast<long double>(c.y) - ay) -
                               (static_cast<long double>(b.y) - ay) * (static_cast<long double>(c.x) - ax));
}

// d strictly inside the circumcircle of CCW triangle (a,b,c)
bool in_circle(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
    const long double adx = a.x - d.x, ady = a.y - d.y;
    const long double bdx = b.x - d.x, bdy = b.y - d.y;
    const long double cdx = c.x - d.x, cdy = c.y - d.y;
    const long double alift = adx * adx + ady * ady;
    const long double blift = bdx * bdx + bdy * bdy;
    const long double clift = cdx * cdx + cdy * cdy;
    const long double det = adx * (bdy * clift - cdy * blift) -
                            ady * (bdx * clift - cdx * blift) +
                            alift * (bdx * cdy - cdx * bdy);
    return det > 0.0L;
}

class Delaunay {
public:
    Delaunay(Vec2 lo, Vec2 hi) {
        const Vec2 c = 0.5 * (lo + hi);
        const double r = std::max({hi.x - lo.x, hi.y - lo.y, 1e-9}) * 10.0 + 1.0;
        nodes_.push_back({c.x - r, c.y - r});
        nodes_.push_back({c.x + r, c.y - r});
        nodes_.push_back({c.x + r, c.y + r});
        nodes_.push_back({c.x - r, c.y + r});
        tris_.push_back({{0, 1, 2}, {-1, -1, 1}, true});
        tris_.push_back({{0, 2, 3}, {0, -1, -1}, true});
    }

    // inserts p; returns the new node index, or -1 when p coincides with an
    // existing vertex or would create a degenerate fan
    int insert(Vec2 p, double merge_tol) {
        const int t = locate(p);
        for (int k = 0; k < 3; ++k)
            if ((nodes_[tris_[t].v[k]] - p).norm() <= merge_tol) return -1;

        // cavity = connected incircle-violating triangles around p; a point
        // landing exactly on an edge pulls in the triangle across it too
        ++stamp_now_;
        stamp_.resize(tris_.size(), 0);
        cavity_.clear();
        std::vector<int> stack{t};
        stamp_[t] = stamp_now_;
        for (int k = 0; k < 3; ++k) {
            const Vec2 a = nodes_[tris_[t].v[k]], b = nodes_[tris_[t].v[(k + 1) % 3]];
            const int nb = tris_[t].nb[k];
            if (nb >= 0 && stamp_[nb] != stamp_now_ &&
                std::fabs(orient(a, b, p)) <= 1e-12 * (b - a).norm() * ((p - a).norm() + (b - p).norm())) {
                stamp_[nb] = stamp_now_;
                stack.push_back(nb);
            }
        }
        while (!stack.empty()) {
            const int cur = stack.back();
            stack.pop_back();
            cavity_.push_back(cur);
            for (int k = 0; k < 3; ++k) {
                const int nb = tris_[cur].nb[k];
                if (nb < 0 || stamp_[nb] == stamp_now_) continue;
                const Tri& nt = tris_[nb];
                if (in_circle(nodes_[nt.v[0]], nodes_[nt.v[1]], nodes_[nt.v[2]], p)) {
                    stamp_[nb] = stamp_now_;
                    stack.push_back(nb);
                }
            }
        }

        // rim edges (in cavity, neighbor outside), oriented CCW as seen from p
        struct RimEdge { int a, b, outside; };
        std::vector<RimEdge> rim;
        for (int ct : cavity_) {
            for (int k = 0; k < 3; ++k) {
                const int nb = tris_[ct].nb[k];
                if (nb >= 0 && stamp_[nb] == stamp_now_) continue;
                rim.push_back({tris_[ct].v[k], tris_[ct].v[(k + 1) % 3], nb});
            }
        }
        if (rim.empty()) return -1;
        for (const RimEdge& e : rim)
            if (!(orient(nodes_[e.a], nodes_[e.b], p) > 0.0)) return -1; // degenerate fan

        const int pid = static_cast<int>(nodes_.size());
        nodes_.push_back(p);
        for (int ct : cavity_) tris_[ct].alive = false;

        const int base = static_cast<int>(tris_.size());
        for (std::size_t e = 0; e < rim.size(); ++e) {
            Tri nt;
            nt.v[0] = rim[e].a;
            nt.v[1] = rim[e].b;
            nt.v[2] = pid;
            nt.nb[0] = rim[e].outside;
            nt.nb[1] = -2; // fixed below
            nt.nb[2] = -2;
            const int id = base + static_cast<int>(e);
            if (rim[e].outside >= 0) link(rim[e].outside, rim[e].b, rim[e].a, id);
            tris_.push_back(nt);
        }
        // connect fan neighbors: the triangle with edge (b,pid) meets (pid,b)
        for (std::size_t e = 0; e < rim.size(); ++e)
            for (std::size_t f = 0; f < rim.size(); ++f)
                if (rim[f].a == rim[e].b) {
                    tris_[base + static_cast<int>(e)].nb[1] = base + static_cast<int>(f);
                    tris_[base + static_cast<int>(f)].nb[2] = base + static_cast<int>(e);
                }
        last_ = base;
        for (std::size_t e = 0; e < rim.size(); ++e)
            created_.push_back(base + static_cast<int>(e));
        return pid;
    }

    const std::vector<Vec2>& nodes() const { return nodes_; }
    const std::vector<Tri>& tris() const { return tris_; }
    std::vector<int> take_created() { return std::exchange(created_, {}); }

private:
    int locate(Vec2 p) const {
        int t = last_ >= 0 && last_ < static_cast<int>(tris_.size()) && tris_[last_].alive
                    ? last_
                    : first_alive();
        const std::size_t cap = 4 * tris_.size() + 64;
        for (std::size_t step = 0; step < cap; ++step) {
            const Tri& tr = tris_[t];
            int move = -1;
            double worst = -1e-13;
            for (int k = 0; k < 3; ++k) {
                const double o = orient(nodes_[tr.v[k]], nodes_[tr.v[(k + 1) % 3]], p);
                if (o < worst && tr.nb[k] >= 0) {
                    worst = o;
                    move = tr.nb[k];
                }
            }
            if (move < 0) return t;
            t = move;
        }
        // degenerate walk; deterministic linear fallback
        for (std::size_t i = 0; i < tris_.size(); ++i) {
            const Tri& tr = tris_[i];
            if (!tr.alive) continue;
            bool inside = true;
            for (int k = 0; k < 3; ++k)
                if (orient(nodes_[tr.v[k]], nodes_[tr.v[(k + 1) % 3]], p) < -1e-12) inside = false;
            if (inside) return static_cast<int>(i);
        }
        throw DegenerateGeometry("triangulate: point location failed");
    }

    int first_alive() const {
        for (std::size_t i = 0; i < tris_.size(); ++i)
            if (tris_[i].alive) return static_cast<int>(i);
        throw DegenerateGeometry("triangulate: triangulation empty");
    }

    void link(int t, int a, int b, int nb) {
        for (int k = 0; k < 3; ++k)
            if (tris_[t].v[k] == a && tris_[t].v[(k + 1) % 3] == b) {
                tris_[t].nb[k] = nb;
                return;
            }
    }

    std::vector<Vec2> nodes_;
    std::vector<Tri> tris_;
    std::vector<int> cavity_;
    std::vector<int> stamp_;
    int stamp_now_ = 0;
    std::vector<int> created_;
    mutable int last_ = 0;
};

// deterministic jitter in [-0.5, 0.5) from lattice indices
double hash_jitter(std::int64_t i, std::int64_t j, std::uint64_t salt) {
    std::uint64_t h = static_cast<std::uint64_t>(i) * 0x9E3779B97F4A7C15ull ^
                      static_cast<std::uint64_t>(j) * 0xC2B2AE3D27D4EB4Full ^ salt;
    h ^= h >> 33;
    h *= 0xFF51AFD7ED558CCDull;
    h ^= h >> 33;
    return static_cast<double>(h % 100000ull) / 100000.0 - 0.5;
}

struct Segment {
    int a, b;   // delaunay node ids
    int facet;
    double lo;  // parametric span along the facet, for final ordering
    double hi;
};

Vec2 circumcenter(Vec2 a, Vec2 b, Vec2 c) {
    const Vec2 ab = b - a, ac = c - a;
    const double d = 2.0 * ab.cross(ac);
    const double ab2 = ab.norm_sq(), ac2 = ac.norm_sq();
    return a + Vec2(ac.y * ab2 - ab.y * ac2, ab.x * ac2 - ac.x * ab2) * (1.0 / d);
}

} // namespace

TriMesh triangulate(const ConvexPolygon& p, double target_h,
                    const std::vector<int>* facet_min_counts) {
    if (p.area() < 1e-12) throw DegenerateGeometry("triangulate: polygon area below 1e-12");
    if (!(target_h > 0.0) || target_h > p.diameter() * (1.0 + 1e-12))
        throw InputError("triangulate: require 0 < target_h <= diam");
    if (facet_min_counts && facet_min_counts->size() != p.facets().size())
        throw InputError("triangulate: facet_min_counts length mismatch");

    const std::size_t nf = p.facets().size();
    Vec2 lo{1e300, 1e300}, hi{-1e300, -1e300};
    for (const Vec2& v : p.vertices()) {
        lo.x = std::min(lo.x, v.x);
        lo.y = std::min(lo.y, v.y);
        hi.x = std::max(hi.x, v.x);
        hi.y = std::max(hi.y, v.y);
    }
    Delaunay dt(lo, hi);

    // boundary chain: power-of-two subdivision per facet
    std::vector<Segment> segments;
    std::vector<int> corner_node(nf, -1);
    {
        std::vector<std::vector<int>> chain(nf);
        for (std::size_t f = 0; f < nf; ++f) {
            const Vec2 a = p.vertex(f), b = p.vertex(f + 1);
            const double len = (b - a).norm();
            std::size_t n = 1;
            while (len / static_cast<double>(n) > target_h) n *= 2;
            if (facet_min_counts)
                n = std::max(n, static_cast<std::size_t>(std::max(1, (*facet_min_counts)[f])));
            for (std::size_t k = 0; k < n; ++k) {
                const Vec2 q = a + (b - a) * (static_cast<double>(k) / static_cast<double>(n));
                const int id = dt.insert(q, 0.0);
                if (id < 0) throw DegenerateGeometry("triangulate: duplicate boundary node");
                chain[f].push_back(id);
                if (k == 0) corner_node[f] = id;
            }
        }
        for (std::size_t f = 0; f < nf; ++f) {
            const std::size_t n = chain[f].size();
            for (std::size_t k = 0; k < n; ++k) {
                const int a = chain[f][k];
                const int b = (k + 1 < n) ? chain[f][k + 1] : chain[(f + 1) % nf][0];
                const double step = 1.0 / static_cast<double>(n);
                segments.push_back({a, b, static_cast<int>(f), k * step, (k + 1) * step});
            }
        }
    }

    // interior seeds: origin-anchored near-hexagonal lattice with clearance to
    // every facet line, deterministically jittered to break cocircular ties
    {
        const double row_h = target_h * std::sqrt(3.0) / 2.0;
        const double clear = 0.6 * target_h;
        const std::int64_t j0 = static_cast<std::int64_t>(std::floor(lo.y / row_h)) - 1;
        const std::int64_t j1 = static_cast<std::int64_t>(std::ceil(hi.y / row_h)) + 1;
        for (std::int64_t j = j0; j <= j1; ++j) {
            const double yy = static_cast<double>(j) * row_h;
            const double xoff = (j % 2 == 0) ? 0.0 : target_h / 2.0;
            const std::int64_t i0 = static_cast<std::int64_t>(std::floor((lo.x - xoff) / target_h)) - 1;
            const std::int64_t i1 = static_cast<std::int64_t>(std::ceil((hi.x - xoff) / target_h)) + 1;
            for (std::int64_t i = i0; i <= i1; ++i) {
                Vec2 q{static_cast<double>(i) * target_h + xoff, yy};
                q.x += 0.04 * target_h * hash_jitter(i, j, 0x51ED2701u);
                q.y += 0.04 * target_h * hash_jitter(i, j, 0xA2C17E03u);
                bool ok = true;
                for (const Facet& f : p.facets())
                    if (f.normal.dot(q) > f.offset - clear) {
                        ok = false;
                        break;
                    }
                if (ok) dt.insert(q, 0.0);
            }
        }
    }
    dt.take_created();

    // Ruppert-style refinement
    const double rho_max = 1.0 / (2.0 * std::sin(20.0 * M_PI / 180.0)); // min angle 20 deg
    const double size_max = 0.75 * target_h;
    const double diam = p.diameter();

    auto inside_domain = [&](Vec2 q) {
        for (const Facet& f : p.facets())
            if (f.normal.dot(q) > f.offset - 1e-12 * diam) return false;
        return true;
    };
    auto encroaches = [&](Vec2 q, const Segment& s) {
        const Vec2 a = dt.nodes()[s.a], b = dt.nodes()[s.b];
        const Vec2 mid = 0.5 * (a + b);
        const double r = 0.5 * (b - a).norm();
        return (q - mid).norm() < r * (1.0 - 1e-12);
    };
    auto split_segment = [&](std::size_t sidx) -> int {
        Segment s = segments[sidx];
        const Vec2 mid = 0.5 * (dt.nodes()[s.a] + dt.nodes()[s.b]);
        const int id = dt.insert(mid, 1e-12 * target_h);
        if (id < 0) return -1;
        const double pm = 0.5 * (s.lo + s.hi);
        segments[sidx] = {s.a, id, s.facet, s.lo, pm};
        segments.push_back({id, s.b, s.facet, pm, s.hi});
        return id;
    };

    std::deque<int> queue;
    auto queue_created = [&]() {
        for (int t : dt.take_created()) queue.push_back(t);
    };
    for (std::size_t t = 0; t < dt.tris().size(); ++t) queue.push_back(static_cast<int>(t));

    auto is_corner = [&](int v) {
        return std::find(corner_node.begin(), corner_node.end(), v) != corner_node.end();
    };

    std::size_t inserted = 0;
    const std::size_t insert_cap =
        200000 + 50 * (segments.size() + static_cast<std::size_t>(p.area() / (target_h * target_h) + 1));
    while (!queue.empty()) {
        const int t = queue.front();
        queue.pop_front();
        const Tri& tr = dt.tris()[t];
        if (!tr.alive) continue;
        if (tr.v[0] < 4 || tr.v[1] < 4 || tr.v[2] < 4) continue; // touches the super-box
        const Vec2 a = dt.nodes()[tr.v[0]], b = dt.nodes()[tr.v[1]], c = dt.nodes()[tr.v[2]];
        const double area2 = (b - a).cross(c - a);
        if (area2 <= 0.0) continue;

        const double lab = (b - a).norm(), lbc = (c - b).norm(), lca = (a - c).norm();
        const double shortest = std::min({lab, lbc, lca});
        const double circ_r = lab * lbc * lca / (2.0 * area2);
        const bool too_big = circ_r > size_max;
        bool bad_ratio = circ_r / shortest > rho_max;

        if (bad_ratio && !too_big) {
            // a sharp polygon corner cannot be improved by splitting; leave the
            // corner triangle alone once it is small enough
            int n_corner = 0;
            for (int k = 0; k < 3; ++k)
                if (is_corner(tr.v[k])) ++n_corner;
            if (n_corner >= 1) {
                int on_boundary = 0;
                for (int k = 0; k < 3; ++k)
                    for (const Segment& s : segments)
                        if ((s.a == tr.v[k] && s.b == tr.v[(k + 1) % 3]) ||
                            (s.b == tr.v[k] && s.a == tr.v[(k + 1) % 3]))
                            ++on_boundary;
                if (on_boundary >= 2) bad_ratio = false;
            }
        }
        if (!bad_ratio && !too_big) continue;

        const Vec2 cc = circumcenter(a, b, c);
        int split = -1;
        if (!inside_domain(cc)) {
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t s = 0; s < segments.size(); ++s) {
                const Vec2 mid = 0.5 * (dt.nodes()[segments[s].a] + dt.nodes()[segments[s].b]);
                const double d2 = (cc - mid).norm_sq();
                if (encroaches(cc, segments[s]) && d2 < best) {
                    best = d2;
                    split = static_cast<int>(s);
                }
            }
            if (split < 0) {
                // outside but encroaching nothing: split the segment nearest the center
                for (std::size_t s = 0; s < segments.size(); ++s) {
                    const Vec2 mid = 0.5 * (dt.nodes()[segments[s].a] + dt.nodes()[segments[s].b]);
                    const double d2 = (cc - mid).norm_sq();
                    if (d2 < best) {
                        best = d2;
                        split = static_cast<int>(s);
                    }
                }
            }
        } else {
            for (std::size_t s = 0; s < segments.size(); ++s)
                if (encroaches(cc, segments[s])) {
                    split = static_cast<int>(s);
                    break;
                }
        }

        int added;
        if (split >= 0) {
            added = split_segment(static_cast<std::size_t>(split));
        } else {
            added = dt.insert(cc, 1e-12 * target_h);
        }
        if (added < 0) continue; // coincided with an existing node; give up on t
        queue_created();
        if (++inserted > insert_cap)
            throw DegenerateGeometry("triangulate: refinement failed to terminate");
    }

    // strip the super-box and compact node ids
    TriMesh mesh;
    mesh.target_h = target_h;
    mesh.nodes.assign(dt.nodes().begin() + 4, dt.nodes().end());
    for (const Tri& tr : dt.tris()) {
        if (!tr.alive) continue;
        if (tr.v[0] < 4 || tr.v[1] < 4 || tr.v[2] < 4) continue;
        mesh.triangles.push_back({tr.v[0] - 4, tr.v[1] - 4, tr.v[2] - 4});
    }
    std::sort(segments.begin(), segments.end(), [](const Segment& x, const Segment& y) {
        return std::pair(x.facet, x.lo) < std::pair(y.facet, y.lo);
    });
    for (const Segment& s : segments) {
        mesh.boundary_edges.push_back({s.a - 4, s.b - 4, s.facet});
        mesh.boundary_nodes.push_back(s.a - 4);
    }
    std::sort(mesh.boundary_nodes.begin(), mesh.boundary_nodes.end());
    mesh.boundary_nodes.erase(std::unique(mesh.boundary_nodes.begin(), mesh.boundary_nodes.end()),
                              mesh.boundary_nodes.end());
    if (mesh.triangles.empty()) throw DegenerateGeometry("triangulate: no triangles produced");
    return mesh;
}

} // namespace torsmink
