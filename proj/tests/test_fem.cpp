#include <doctest.h>

#include <cmath>

#include "torsmink/fem.hpp"
#include "torsmink/verify.hpp"
#include "oracles.hpp"

using namespace torsmink;

namespace {

ConvexPolygon unit_square() {
    return ConvexPolygon::from_vertices({{-1, -1}, {1, -1}, {1, 1}, {-1, 1}});
}

} // namespace

TEST_CASE("square torsion against the series oracle") {
    const ConvexPolygon sq = unit_square();
    const TorsionSolve s = torsion_solve(sq, 0.04);
    const double T_exact = oracles::square_rigidity();
    const double u0_exact = oracles::square_center_value();

    CHECK(std::fabs(s.data.T - T_exact) / T_exact < 5e-3);
    CHECK(std::fabs(field_value_at(s.field, {0, 0}) - u0_exact) / u0_exact < 5e-3);
    CHECK(s.data.support_identity_residual < 1e-2);
    CHECK(s.data.divergence_residual < 1e-2);
    // mu_i = T by symmetry
    for (double mu : s.data.facet_measures) CHECK(mu == doctest::Approx(s.data.T).epsilon(2e-3));
}

TEST_CASE("mesh convergence: T error shrinks by at least 3x per halving") {
    const ConvexPolygon sq = unit_square();
    const double T_exact = oracles::square_rigidity();
    const double e1 = std::fabs(torsion_solve(sq, 0.08).data.T - T_exact);
    const double e2 = std::fabs(torsion_solve(sq, 0.04).data.T - T_exact);
    CHECK(e1 / e2 >= 3.0);
    // the support identity residual also decreases under refinement
    const double r1 = torsion_solve(sq, 0.08).data.support_identity_residual;
    const double r2 = torsion_solve(sq, 0.04).data.support_identity_residual;
    CHECK(r2 < r1);
}

TEST_CASE("64-gon brackets the disk") {
    const ConvexPolygon gon = regular_polygon(64, 1.0);
    const TorsionSolve s = torsion_solve(gon, 0.04);
    const double lo = oracles::disk_rigidity(1.0);
    const double hi = oracles::disk_rigidity(1.0 / std::cos(M_PI / 64.0));
    CHECK(s.data.T >= lo * 0.995);
    CHECK(s.data.T <= hi * 1.005);
    // max u bracketed by the inscribed/circumscribed disk solutions
    double umax = 0.0;
    for (double u : s.field.u) umax = std::max(umax, u);
    CHECK(umax >= 0.5 * 0.99);
    CHECK(umax <= 0.5 / std::pow(std::cos(M_PI / 64.0), 2) * 1.01);
    // each facet measure is close to facet length (disk flux is 1)
    for (std::size_t f = 0; f < gon.facets().size(); ++f)
        CHECK(s.data.facet_measures[f] ==
              doctest::Approx(gon.facets()[f].length).epsilon(2e-2));
}

TEST_CASE("torsion field invariants") {
    const ConvexPolygon p = random_polygon(12);
    const TorsionField f = solve_torsion(triangulate(p, 0.08));
    for (std::size_t i = 0; i < f.mesh.node_count(); ++i) {
        if (f.mesh.is_boundary_node(static_cast<int>(i)))
            CHECK(f.u[i] == 0.0);
        else
            CHECK(f.u[i] > 0.0);
    }
    double umax = 0.0;
    for (double u : f.u) umax = std::max(umax, u);
    CHECK(umax <= p.diameter() * p.diameter() / 4.0);
    CHECK(max_gradient(f) <= p.diameter() * 1.01);
}

TEST_CASE("rigidity: energy and 2*int(u) agree; homogeneity") {
    const ConvexPolygon sq = unit_square();
    const TorsionField f = solve_torsion(triangulate(sq, 0.05));
    const double T = rigidity(f);
    const TorsionSolve s2 = torsion_solve(sq.scaled(2.0), 0.1);
    CHECK(s2.data.T == doctest::Approx(16.0 * T).epsilon(1e-2));
}

TEST_CASE("trace route tracks the consistent flux") {
    const ConvexPolygon sq = unit_square();
    const TorsionSolve s = torsion_solve(sq, 0.04);
    for (std::size_t f = 0; f < 4; ++f)
        CHECK(s.data.facet_measures_trace[f] ==
              doctest::Approx(s.data.facet_measures[f]).epsilon(0.1));
}

TEST_CASE("lp_measure") {
    const ConvexPolygon sq = unit_square();
    const TorsionSolve s = torsion_solve(sq, 0.05);

    // p = 1 reduces to the torsion measure itself
    const auto lp1 = lp_measure(s.data, sq, 1.0);
    for (std::size_t f = 0; f < 4; ++f) CHECK(lp1[f] == s.data.facet_measures[f]);

    // h = 1 on the unit square, so any p gives the measure back
    const auto lp3 = lp_measure(s.data, sq, 3.0);
    for (std::size_t f = 0; f < 4; ++f)
        CHECK(lp3[f] == doctest::Approx(s.data.facet_measures[f]));

    // scaling: per-facet value scales by m^(4-p)
    const double m = 2.0, p = 2.5;
    const ConvexPolygon big = sq.scaled(m);
    const TorsionSolve sb = torsion_solve(big, 0.05 * m);
    const auto lp_big = lp_measure(sb.data, big, p);
    const auto lp_small = lp_measure(s.data, sq, p);
    for (std::size_t f = 0; f < 4; ++f)
        CHECK(lp_big[f] == doctest::Approx(std::pow(m, 4.0 - p) * lp_small[f]).epsilon(1e-2));

    // zero support with positive measure is rejected for p > 1
    const ConvexPolygon touching = wulff_shape(
        {{1, 0}, {0, 1}, {-1, 0}, {0, -1}}, {0.0, 1.0, 1.0, 1.0});
    const TorsionSolve st = torsion_solve(touching, 0.05);
    CHECK_THROWS_AS(lp_measure(st.data, touching, 2.0), OriginOnBoundary);
}

TEST_CASE("mixed rigidity") {
    const ConvexPolygon sq = unit_square();
    const TorsionSolve s = torsion_solve(sq, 0.04);

    // T(O, O) = T(O) through the support identity
    CHECK(mixed_rigidity(s.data, sq, sq) == doctest::Approx(s.data.T).epsilon(1e-2));

    // translation of the second argument adds (1/4) sum (x0 . xi) mu, which
    // vanishes for the centrally symmetric square
    const ConvexPolygon moved = sq.translated({0.37, -0.11});
    CHECK(mixed_rigidity(s.data, sq, moved) ==
          doctest::Approx(mixed_rigidity(s.data, sq, sq)).epsilon(1e-2));

    // Minkowski inequality on random pairs: T(A,B)^4 >= T(A)^3 T(B)
    for (int t = 0; t < 20; ++t) {
        const ConvexPolygon a = random_polygon(900 + 2 * t);
        const ConvexPolygon b = random_polygon(901 + 2 * t);
        const TorsionSolve sa = torsion_solve(a, 0.06);
        const double Tb = torsion_solve(b, 0.06).data.T;
        const double mixed = mixed_rigidity(sa.data, a, b);
        CHECK(std::pow(mixed, 4.0) >= std::pow(sa.data.T, 3.0) * Tb * (1.0 - 1e-3));
    }
}

TEST_CASE("translation invariance of T and facet measures") {
    const ConvexPolygon p = random_polygon(44);
    const TorsionSolve base = torsion_solve(p, 0.05);
    const TorsionSolve moved = torsion_solve(p.translated({0.21, 0.13}), 0.05);
    CHECK(std::fabs(moved.data.T - base.data.T) <= 1e-2 * base.data.T);
    for (std::size_t f = 0; f < p.facets().size(); ++f)
        CHECK(std::fabs(moved.data.facet_measures[f] - base.data.facet_measures[f]) <=
              1e-2 * base.data.facet_measures[f]);
}

TEST_CASE("homogeneity of facet measures (order 3)") {
    const ConvexPolygon p = random_polygon(45);
    const TorsionSolve base = torsion_solve(p, 0.05);
    for (double m : {0.5, 2.0, 3.0}) {
        const TorsionSolve s = torsion_solve(p.scaled(m), 0.05 * m);
        CHECK(std::fabs(s.data.T - std::pow(m, 4.0) * base.data.T) <=
              1e-2 * std::pow(m, 4.0) * base.data.T);
        for (std::size_t f = 0; f < p.facets().size(); ++f)
            CHECK(std::fabs(s.data.facet_measures[f] -
                            std::pow(m, 3.0) * base.data.facet_measures[f]) <=
                  1e-2 * std::pow(m, 3.0) * base.data.facet_measures[f]);
    }
}

TEST_CASE("volume bound from the gradient estimate") {
    for (int seed : {5, 6, 7}) {
        const ConvexPolygon p = random_polygon(seed);
        const TorsionSolve s = torsion_solve(p, 0.06);
        CHECK(p.area() >= s.data.T / (p.diameter() * p.diameter()) * (1.0 - 1e-2));
    }
}
