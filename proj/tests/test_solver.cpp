#include <doctest.h>

#include <cmath>

#include "torsmink/solver.hpp"
#include "torsmink/verify.hpp"
#include "oracles.hpp"

using namespace torsmink;

namespace {

DiscreteMeasure axes_measure(std::vector<double> w = {1, 1, 1, 1}) {
    return build_measure({{1, 0}, {0, 1}, {-1, 0}, {0, -1}}, std::move(w));
}

DiscreteMeasure regular_measure(int m, double w) {
    std::vector<UnitVector> normals;
    for (int k = 0; k < m; ++k) normals.push_back(UnitVector::from_angle(2 * M_PI * k / m));
    return build_measure(normals, std::vector<double>(static_cast<std::size_t>(m), w));
}

SolveConfig coarse(double p) {
    SolveConfig cfg;
    cfg.p = p;
    cfg.mesh_h = 0.05;
    cfg.tol_residual = 1e-3;
    cfg.max_iters = 200;
    return cfg;
}

} // namespace

TEST_CASE("functional_Fp") {
    const DiscreteMeasure m = axes_measure();
    const ConvexPolygon sq = wulff_shape(m.normals, {1, 1, 1, 1});
    CHECK(functional_Fp(m, sq, 2.0) == doctest::Approx(1.0));
    CHECK(functional_Fp(m, sq, 3.7) == doctest::Approx(1.0));

    // F_p(mQ) = m^p F_p(Q)
    CHECK(functional_Fp(m, sq.scaled(1.7), 2.5) ==
          doctest::Approx(std::pow(1.7, 2.5) * functional_Fp(m, sq, 2.5)));

    // regular hexagon with inradius r: F_p = (6/4) r^p
    const DiscreteMeasure hex = regular_measure(6, 1.0);
    const double r = 0.83;
    const ConvexPolygon hexagon = regular_polygon(6, r);
    CHECK(functional_Fp(hex, hexagon, 2.0) == doctest::Approx(1.5 * r * r));
}

TEST_CASE("objective is scale invariant") {
    const DiscreteMeasure m = axes_measure({1.2, 0.9, 1.0, 1.1});
    const SolveConfig cfg = coarse(2.0);
    const SupportVector y = {1.0, 0.9, 1.1, 1.0};
    const double g1 = objective_and_gradient(m, y, cfg).G;
    for (double s : {0.3, 0.5, 2.0, 3.0}) {
        SupportVector ys = y;
        for (double& v : ys) v *= s;
        CHECK(objective_and_gradient(m, ys, cfg).G == doctest::Approx(g1).epsilon(1e-6));
    }
}

TEST_CASE("gradient vanishes at the symmetric square fixed point") {
    const DiscreteMeasure m = axes_measure();
    const SolveConfig cfg = coarse(2.0);
    const ObjectiveEval e = objective_and_gradient(m, {1, 1, 1, 1}, cfg);
    for (double g : e.grad) CHECK(std::fabs(g) <= 2e-3);
    CHECK(e.residual <= 2e-3);
}

TEST_CASE("Hadamard derivative: dT/dy_i equals the facet measure") {
    const DiscreteMeasure m = axes_measure({1.0, 1.3, 0.8, 1.1});
    SolveConfig cfg = coarse(2.0);
    cfg.mesh_h = 0.02;
    const SupportVector y = {1.0, 0.93, 1.12, 0.97};
    const ObjectiveEval base = objective_and_gradient(m, y, cfg);
    const ConvexPolygon body = wulff_shape(m.normals, y);
    const double eps = 1e-3 * body.diameter();
    for (std::size_t i = 0; i < 4; ++i) {
        SupportVector up = y, dn = y;
        up[i] += eps;
        dn[i] -= eps;
        const double Tu = torsion_solve(wulff_shape(m.normals, up), cfg.mesh_h).data.T;
        const double Td = torsion_solve(wulff_shape(m.normals, dn), cfg.mesh_h).data.T;
        const double fd = (Tu - Td) / (2 * eps);
        CHECK(fd == doctest::Approx(base.atom_mu[i]).epsilon(2e-2));
    }
}

TEST_CASE("solve_normalized: closed forms for regular measures") {
    // axes, p = 2 -> unit square
    {
        const SolveReport rep = solve_normalized(axes_measure(), coarse(2.0));
        const ConvexPolygon expected = regular_polygon(4, 1.0);
        CHECK(hausdorff_distance(*rep.normalized_solution, expected).distance <= 1e-2);
        CHECK(rep.Fp_value == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(rep.lagrange_b == doctest::Approx(4.0 * rep.T_value / 2.0));
    }
    // hexagon, w = 2, p = 3 -> inradius (4/12)^(1/3)
    {
        const SolveReport rep = solve_normalized(regular_measure(6, 2.0), coarse(3.0));
        const double r = oracles::normalized_inradius(6, 2.0, 3.0);
        const ConvexPolygon expected = regular_polygon(6, r);
        CHECK(hausdorff_distance(*rep.normalized_solution, expected).distance <= 1e-2 * r);
    }
}

TEST_CASE("solve report invariants") {
    const DiscreteMeasure m = axes_measure({2.0, 1.0, 1.0, 1.0});
    const SolveReport rep = solve_normalized(m, coarse(2.0));
    CHECK(rep.residual <= 1e-3);
    CHECK(rep.Fp_value == doctest::Approx(1.0).epsilon(1e-6));
    // every atom carries a facet and the origin is strictly interior
    for (std::size_t i = 0; i < m.size(); ++i) {
        CHECK(rep.atom_mu[i] > 0.0);
        CHECK(rep.atom_h[i] > 0.0);
    }
    // descent phase of the recorded objective is non-increasing
    for (std::size_t k = 1; k < rep.iterations.size(); ++k)
        if (!rep.iterations[k].polish)
            CHECK(rep.iterations[k].objective <=
                  rep.iterations[k - 1].objective * (1 + 1e-12));
    // polish tail may wiggle only at the consistency-gap scale
    for (std::size_t k = 1; k < rep.iterations.size(); ++k)
        if (rep.iterations[k].polish)
            CHECK(rep.iterations[k].objective <= rep.iterations[k - 1].objective * (1 + 1e-3));
}

TEST_CASE("optimality_residual: right body small, wrong body large") {
    const SolveConfig cfg = coarse(2.0);
    const ConvexPolygon sq = regular_polygon(4, 1.0);
    const TorsionSolve s = torsion_solve(sq, 0.02);

    CHECK(optimality_residual(axes_measure(), sq, s.data, 2.0) < 1e-2);
    CHECK(optimality_residual(axes_measure({2, 1, 1, 1}), sq, s.data, 2.0) > 0.3);

    // scale sensitivity: the residual grows away from the normalized scale
    const ConvexPolygon scaled = sq.scaled(1.3);
    const TorsionSolve ss = torsion_solve(scaled, 0.026);
    CHECK(optimality_residual(axes_measure(), scaled, ss.data, 2.0) >
          10.0 * optimality_residual(axes_measure(), sq, s.data, 2.0));

    // a missing facet is an error
    const DiscreteMeasure five =
        build_measure({{1, 0}, {0, 1}, {-1, 0}, {0, -1}, UnitVector(1.0, 1.0)},
                      {1, 1, 1, 1, 1});
    CHECK_THROWS_AS(optimality_residual(five, sq, s.data, 2.0), MissingFacet);
}

TEST_CASE("rescale_solution: factors and round trip") {
    const DiscreteMeasure m = axes_measure();
    const ConvexPolygon sq = regular_polygon(4, 0.77);
    const TorsionSolve s = torsion_solve(sq, 0.04);

    const ConvexPolygon t1 = rescale_solution(sq, 2.0, RescaleTarget::T_EQ_1, m, s.data);
    CHECK(torsion_solve(t1, 0.04).data.T == doctest::Approx(1.0).epsilon(1e-2));

    const ConvexPolygon f1 = rescale_solution(sq, 2.0, RescaleTarget::FP_EQ_1, m, s.data);
    CHECK(functional_Fp(m, f1, 2.0) == doctest::Approx(1.0).epsilon(1e-12));

    // NORMALIZED after ORIGINAL is the identity (scaling laws compose exactly)
    const ConvexPolygon orig = rescale_solution(sq, 2.0, RescaleTarget::ORIGINAL, m, s.data);
    const double sfac = std::pow(s.data.T, 1.0 / (2.0 - 4.0));
    const TorsionData scaled_data = scale_torsion_data(s.data, sfac);
    const ConvexPolygon back =
        rescale_solution(orig, 2.0, RescaleTarget::NORMALIZED, m, scaled_data);
    CHECK(hausdorff_distance(back, sq).distance <= 1e-9);

    CHECK_THROWS_AS(rescale_solution(sq, 4.0, RescaleTarget::ORIGINAL, m, s.data), PCritical);

    // if T = 1 the ORIGINAL factor is 1
    TorsionData unit = s.data;
    unit.T = 1.0;
    const ConvexPolygon same = rescale_solution(sq, 2.0, RescaleTarget::ORIGINAL, m, unit);
    CHECK(hausdorff_distance(same, sq).distance <= 1e-12);
}

TEST_CASE("solve_original: symmetric square case and the L_p equation") {
    SolveConfig cfg = coarse(2.0);
    cfg.mesh_h = 0.04;
    cfg.tol_residual = 1e-2;
    const DiscreteMeasure m = axes_measure();
    const SolveReport rep = solve_original(m, cfg);
    REQUIRE(rep.original_solution.has_value());

    const double T1 = oracles::square_rigidity();
    const double r_expected = oracles::original_inradius(4, 1.0, 2.0, T1);
    CHECK(rep.atom_h[0] == doctest::Approx(r_expected).epsilon(1e-2));

    // lp_measure of the solution returns the weights
    const TorsionSolve s = torsion_solve(*rep.original_solution, cfg.mesh_h);
    const auto lp = lp_measure(s.data, *rep.original_solution, 2.0);
    for (std::size_t f = 0; f < lp.size(); ++f)
        CHECK(lp[f] == doctest::Approx(1.0).epsilon(2e-2));

    CHECK_THROWS_AS(solve_original(m, coarse(4.0)), PCritical);
}

TEST_CASE("gradient of G against central finite differences") {
    const DiscreteMeasure m = axes_measure({1.0, 1.4, 0.9, 1.2});
    SolveConfig cfg = coarse(2.0);
    cfg.mesh_h = 0.02;
    const SupportVector y = {1.05, 0.92, 1.0, 1.1};
    const ObjectiveEval base = objective_and_gradient(m, y, cfg);
    const double eps = 5e-3;
    for (std::size_t i = 0; i < 4; ++i) {
        SupportVector up = y, dn = y;
        up[i] += eps;
        dn[i] -= eps;
        const double fd = (objective_and_gradient(m, up, cfg).G -
                           objective_and_gradient(m, dn, cfg).G) /
                          (2 * eps);
        CHECK(fd == doctest::Approx(base.grad[i]).epsilon(3e-2));
    }
}

TEST_CASE("solve rejects invalid configurations") {
    const DiscreteMeasure m = axes_measure();
    SolveConfig bad = coarse(1.0);
    CHECK_THROWS_AS(solve_normalized(m, bad), InputError);
    bad = coarse(2.0);
    bad.backtrack_factor = 1.5;
    CHECK_THROWS_AS(solve_normalized(m, bad), InputError);
}
