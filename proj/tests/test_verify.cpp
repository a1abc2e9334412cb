#include <doctest.h>

#include <cmath>

#include "torsmink/verify.hpp"
#include "oracles.hpp"

using namespace torsmink;

namespace {

DiscreteMeasure axes_measure(std::vector<double> w = {1, 1, 1, 1}) {
    return build_measure({{1, 0}, {0, 1}, {-1, 0}, {0, -1}}, std::move(w));
}

} // namespace

TEST_CASE("identity suite passes on the square, 64-gon, and a random pentagon") {
    VerifyConfig cfg;
    cfg.mesh_h = 0.04;
    for (const ConvexPolygon& p :
         {regular_polygon(4, 1.0), regular_polygon(64, 1.0), random_polygon(7, 5, 5)}) {
        const auto checks = identity_suite(p, cfg);
        CHECK(checks.size() >= 8);
        for (const CheckReport& c : checks) {
            INFO(c.name, " measured=", c.measured, " bound=", c.bound);
            CHECK(c.passed);
            CHECK(recheck(c) == c.passed);
            CHECK(std::isfinite(c.measured));
        }
    }
}

TEST_CASE("hadamard check: self pair gives 4T") {
    VerifyConfig cfg;
    cfg.mesh_h = 0.04;
    const ConvexPolygon sq = regular_polygon(4, 1.0);
    const CheckReport r = hadamard_check(sq, sq, {0.05, 0.025}, cfg);
    CHECK(r.passed);
    // d/dt T((1+t) Omega) at 0 equals 4T
    CHECK(r.details.at("formula") == doctest::Approx(4.0 * r.details.at("T")).epsilon(1e-2));
    CHECK(r.measured == doctest::Approx(r.bound).epsilon(2e-2));
}

TEST_CASE("hadamard check: hexagon versus square") {
    VerifyConfig cfg;
    cfg.mesh_h = 0.04;
    const CheckReport r =
        hadamard_check(regular_polygon(6, 1.0), regular_polygon(4, 1.0), {0.05, 0.025}, cfg);
    CHECK(r.passed);
}

TEST_CASE("translation direction has zero Hadamard derivative on symmetric bodies") {
    // h of a point x0 is x0 . theta; the formula term sums (x0 . xi) mu_i,
    // which cancels for the square; the finite difference of a pure
    // translation is zero up to FEM noise
    VerifyConfig cfg;
    cfg.mesh_h = 0.04;
    const ConvexPolygon sq = regular_polygon(4, 1.0);
    const TorsionSolve s = torsion_solve(sq, cfg.mesh_h);
    const Vec2 x0{0.31, -0.17};
    double formula = 0.0;
    for (std::size_t f = 0; f < sq.facets().size(); ++f)
        formula += x0.dot(sq.facets()[f].normal.vec()) * s.data.facet_measures[f];
    CHECK(std::fabs(formula) <= 1e-2 * 4.0 * s.data.T);
    const double t = 0.05;
    const double Tt = torsion_solve(sq.translated(t * x0), cfg.mesh_h).data.T;
    CHECK(std::fabs((Tt - s.data.T) / t) <= 2e-2 * 4.0 * s.data.T);
}

TEST_CASE("Brunn-Minkowski check") {
    VerifyConfig cfg;
    cfg.mesh_h = 0.04;
    const ConvexPolygon sq = regular_polygon(4, 1.0);
    const ConvexPolygon gon = regular_polygon(64, 1.0);

    SUBCASE("strict inequality for square vs 64-gon") {
        const CheckReport r = bm_check(sq, gon, 0.5, cfg);
        CHECK(r.passed);
        CHECK(r.measured > r.bound);
        CHECK(r.details.at("equality") == 0.0);
    }
    SUBCASE("homothetic pair flags equality") {
        const CheckReport r = bm_check(sq, sq.translated({0.4, 0.2}).scaled(1.0), 0.5, cfg);
        CHECK(r.passed);
        CHECK(r.details.at("equality") == 1.0);
    }
    SUBCASE("endpoints are exact") {
        const CheckReport r0 = bm_check(sq, gon, 0.0, cfg);
        const CheckReport r1 = bm_check(sq, gon, 1.0, cfg);
        CHECK(r0.measured == doctest::Approx(r0.bound).epsilon(1e-9));
        CHECK(r1.measured == doctest::Approx(r1.bound).epsilon(1e-9));
    }
}

TEST_CASE("Minkowski inequality check") {
    VerifyConfig cfg;
    cfg.mesh_h = 0.04;
    const ConvexPolygon sq = regular_polygon(4, 1.0);
    const ConvexPolygon hex = regular_polygon(6, 1.0);
    const CheckReport strict = minkowski_ineq_check(sq, hex, cfg);
    CHECK(strict.passed);
    const CheckReport self = minkowski_ineq_check(sq, sq, cfg);
    CHECK(self.passed);
    CHECK(self.details.at("equality") == 1.0);
}

TEST_CASE("inequalities hold on seeded random pairs") {
    VerifyConfig cfg;
    cfg.mesh_h = 0.05;
    for (int t = 0; t < 12; ++t) {
        const ConvexPolygon a = random_polygon(2000 + 2 * t);
        const ConvexPolygon b = random_polygon(2001 + 2 * t);
        const double lambda = 0.15 + 0.7 * (t / 12.0);
        CHECK(bm_check(a, b, lambda, cfg).passed);
        CHECK(minkowski_ineq_check(a, b, cfg).passed);
    }
}

TEST_CASE("continuity in measure: shrinking perturbations") {
    SolveConfig cfg;
    cfg.mesh_h = 0.05;
    cfg.tol_residual = 1e-3;
    cfg.max_iters = 200;
    const DiscreteMeasure m = axes_measure();
    std::vector<DiscreteMeasure> perturbed;
    const std::vector<double> eps = {0.2, 0.1, 0.05};
    for (double e : eps)
        perturbed.push_back(axes_measure({1.0 + e, 1.0, 1.0, 1.0}));
    const ConvergenceTable t = continuity_in_measure(m, perturbed, eps, 2.0, cfg);
    REQUIRE(t.rows.size() == 3);
    CHECK(t.passed);
    CHECK(t.rows[0].hausdorff > t.rows[1].hausdorff);
    CHECK(t.rows[1].hausdorff > t.rows[2].hausdorff);
    CHECK(t.rows[2].hausdorff < 10 * cfg.tol_residual);
}

TEST_CASE("continuity in measure: a bad row is recorded, not fatal") {
    SolveConfig cfg;
    cfg.mesh_h = 0.06;
    cfg.tol_residual = 1e-2;
    const DiscreteMeasure m = axes_measure();
    // a measure violating the hemisphere condition cannot be built, so a row
    // is marked failed through the solver's own hemisphere check instead:
    // p out of range in a row is simulated with p_i = 4 exclusion in mode p
    CHECK_THROWS_AS(continuity_in_p(m, {2.5, 4.0}, 2.0, cfg), PCritical);
}

TEST_CASE("continuity in p: law r(p) for the hexagon measure") {
    SolveConfig cfg;
    cfg.mesh_h = 0.05;
    cfg.tol_residual = 1e-3;
    cfg.max_iters = 200;
    std::vector<UnitVector> normals;
    for (int k = 0; k < 6; ++k) normals.push_back(UnitVector::from_angle(2 * M_PI * k / 6));
    const DiscreteMeasure m = build_measure(normals, std::vector<double>(6, 1.0));
    const std::vector<double> ps = {2.5, 2.25, 2.125};
    const ConvergenceTable t = continuity_in_p(m, ps, 2.0, cfg);
    CHECK(t.passed);
    for (std::size_t i = 1; i < t.rows.size(); ++i)
        CHECK(t.rows[i].hausdorff < t.rows[i - 1].hausdorff);
    // normalized solutions obey r(p_i) = (4/6)^(1/p_i)
    for (std::size_t i = 0; i < ps.size(); ++i) {
        SolveConfig scfg = cfg;
        scfg.p = ps[i];
        const SolveReport rep = solve_normalized(m, scfg);
        CHECK(rep.atom_h[0] ==
              doctest::Approx(oracles::normalized_inradius(6, 1.0, ps[i])).epsilon(1e-2));
    }
}

TEST_CASE("uniqueness probe on a non-symmetric measure") {
    SolveConfig cfg;
    cfg.mesh_h = 0.05;
    cfg.tol_residual = 1e-3;
    cfg.max_iters = 200;
    cfg.seed = 42;
    std::vector<UnitVector> normals;
    for (double a : {0.1, 1.3, 2.4, 3.6, 5.0}) normals.push_back(UnitVector::from_angle(a));
    const DiscreteMeasure m = build_measure(normals, {1.0, 2.0, 0.7, 1.5, 1.1});
    const CheckReport r = uniqueness_probe(m, 2.0, 3, cfg);
    INFO("measured=", r.measured, " bound=", r.bound);
    CHECK(r.passed);

    // identical seeds produce identical reports
    const CheckReport r2 = uniqueness_probe(m, 2.0, 3, cfg);
    CHECK(r.measured == r2.measured);
    CHECK(r.bound == r2.bound);
}

TEST_CASE("weak convergence of facet measures for 2^k-gons") {
    VerifyConfig cfg;
    cfg.mesh_h = 0.05;
    std::vector<ConvexPolygon> seq = {regular_polygon(8, 1.0), regular_polygon(16, 1.0),
                                      regular_polygon(32, 1.0)};
    const ConvexPolygon limit = regular_polygon(64, 1.0);
    const std::vector<DirectionFunction> fns = {
        [](UnitVector) { return 1.0; },
        [](UnitVector u) { return u.x; },
    };
    const CheckReport r = weak_convergence_probe(seq, limit, fns, cfg);
    CHECK(r.passed);
    // the total measure approaches the disk value 2 pi R^3
    CHECK(r.details.at("total_measure") ==
          doctest::Approx(oracles::disk_total_measure(1.0)).epsilon(2e-2));

    // constant sequence: zero gaps
    const std::vector<ConvexPolygon> constant = {limit, limit};
    const CheckReport rc = weak_convergence_probe(constant, limit, fns, cfg);
    CHECK(rc.passed);
    CHECK(rc.measured == 0.0);
}

TEST_CASE("check reports re-verify from their stored fields") {
    VerifyConfig cfg;
    cfg.mesh_h = 0.06;
    for (const CheckReport& c : identity_suite(regular_polygon(4, 1.0), cfg))
        CHECK(recheck(c) == c.passed);
    CheckReport tampered;
    tampered.relation = "le";
    tampered.measured = 2.0;
    tampered.bound = 1.0;
    tampered.tolerance = 0.0;
    tampered.passed = true; // lies
    CHECK_FALSE(recheck(tampered));
}
