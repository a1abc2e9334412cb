#include "torsmink/verify.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <random>
#include <thread>

namespace torsmink {

bool recheck(const CheckReport& r) {
    if (r.relation == "le") return r.measured <= r.bound + r.tolerance * std::fabs(r.bound);
    if (r.relation == "ge") return r.measured >= r.bound - r.tolerance * std::fabs(r.bound);
    if (r.relation == "rel")
        return std::fabs(r.measured - r.bound) <= r.tolerance * std::fabs(r.bound);
    return false;
}

std::size_t worker_count() {
    if (const char* env = std::getenv("TORSMINK_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return static_cast<std::size_t>(v);
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc ? hc : 1;
}

namespace {

// run fn(i) for i in [0, n) on up to worker_count() threads; results land in
// index order so the fan-out joins deterministically
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    const std::size_t workers = std::min(worker_count(), std::max<std::size_t>(n, 1));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
        });
    for (auto& t : pool) t.join();
}

CheckReport make_report(std::string name, double measured, double bound, double tol,
                        std::string relation) {
    CheckReport r;
    r.name = std::move(name);
    r.measured = measured;
    r.bound = bound;
    r.tolerance = tol;
    r.relation = std::move(relation);
    r.passed = recheck(r);
    return r;
}

} // namespace

std::vector<CheckReport> identity_suite(const ConvexPolygon& p, const VerifyConfig& cfg) {
    std::vector<CheckReport> out;
    const TorsionSolve base = torsion_solve(p, cfg.mesh_h);
    const double T = base.data.T;

    // homogeneity: T(mP) = m^4 T(P), mu(mP) = m^3 mu(P)
    for (double m : {0.5, 2.0}) {
        const TorsionSolve s = torsion_solve(p.scaled(m), cfg.mesh_h * m);
        const double m4 = m * m * m * m;
        out.push_back(make_report("homogeneity_T_m" + std::to_string(m), s.data.T, m4 * T,
                                  1e-2, "rel"));
        double worst = 0.0;
        for (std::size_t f = 0; f < p.facets().size(); ++f)
            worst = std::max(worst, std::fabs(s.data.facet_measures[f] -
                                              m * m * m * base.data.facet_measures[f]) /
                                        (m * m * m * base.data.facet_measures[f]));
        out.push_back(
            make_report("homogeneity_measure_m" + std::to_string(m), worst, 1e-2, 0.0, "le"));
    }

    // translation invariance with a seeded offset
    {
        std::mt19937_64 rng(cfg.seed + 17);
        std::uniform_real_distribution<double> u(-0.3, 0.3);
        const Vec2 x0{u(rng) * p.diameter(), u(rng) * p.diameter()};
        const TorsionSolve s = torsion_solve(p.translated(x0), cfg.mesh_h);
        out.push_back(make_report("translation_T", s.data.T, T, 1e-2, "rel"));
        double worst = 0.0;
        for (std::size_t f = 0; f < p.facets().size(); ++f)
            worst = std::max(worst, std::fabs(s.data.facet_measures[f] -
                                              base.data.facet_measures[f]) /
                                        base.data.facet_measures[f]);
        out.push_back(make_report("translation_measure", worst, 1e-2, 0.0, "le"));
    }

    // |grad u| <= diam
    out.push_back(
        make_report("gradient_bound", max_gradient(base.field), p.diameter(), 1e-2, "le"));

    // sum h mu = 4T and total flux = 2 area
    out.push_back(
        make_report("support_identity", base.data.support_identity_residual, 1e-2, 0.0, "le"));
    out.push_back(
        make_report("divergence_identity", base.data.divergence_residual, 1e-2, 0.0, "le"));

    // area >= T / diam^2
    out.push_back(make_report("volume_bound", p.area(), T / (p.diameter() * p.diameter()),
                              1e-2, "ge"));
    return out;
}

CheckReport hadamard_check(const ConvexPolygon& omega, const ConvexPolygon& omega1,
                           const std::vector<double>& t_list, const VerifyConfig& cfg) {
    if (t_list.empty()) throw InputError("hadamard_check: need at least one t value");
    for (double t : t_list)
        if (!(t > 0.0 && t < 0.1 * omega.diameter()))
            throw InputError("hadamard_check: t values must lie in (0, 0.1*diam)");

    const TorsionSolve base = torsion_solve(omega, cfg.mesh_h);
    const double formula = 4.0 * mixed_rigidity(base.data, omega, omega1);

    std::vector<double> ts = t_list;
    std::sort(ts.begin(), ts.end());
    auto slope = [&](double t) {
        const ConvexPolygon sum = minkowski_combine(1.0, omega, t, omega1);
        const TorsionSolve s = torsion_solve(sum, cfg.mesh_h);
        return (s.data.T - base.data.T) / t;
    };
    double fd;
    if (ts.size() >= 2) {
        const double d1 = slope(ts[0]), d2 = slope(ts[1]);
        fd = (ts[1] * d1 - ts[0] * d2) / (ts[1] - ts[0]); // first-order Richardson
    } else {
        fd = slope(ts[0]);
    }
    CheckReport r = make_report("hadamard", fd, formula, 2e-2, "rel");
    r.details["fd"] = fd;
    r.details["formula"] = formula;
    r.details["T"] = base.data.T;
    return r;
}

CheckReport bm_check(const ConvexPolygon& o0, const ConvexPolygon& o1, double lambda,
                     const VerifyConfig& cfg) {
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw InputError("bm_check: lambda outside [0,1]");
    const ConvexPolygon combo = minkowski_combine(lambda, o0, 1.0 - lambda, o1);
    const double Tc = torsion_solve(combo, cfg.mesh_h).data.T;
    const double T0 = torsion_solve(o0, cfg.mesh_h).data.T;
    const double T1 = torsion_solve(o1, cfg.mesh_h).data.T;
    const double lhs = std::pow(Tc, 0.25);
    const double rhs = lambda * std::pow(T0, 0.25) + (1.0 - lambda) * std::pow(T1, 0.25);
    CheckReport r = make_report("brunn_minkowski", lhs, rhs, cfg.rel_slack, "ge");
    r.details["lambda"] = lambda;
    r.details["equality"] = (std::fabs(lhs - rhs) <= 1e-3 * rhs) ? 1.0 : 0.0;
    return r;
}

CheckReport minkowski_ineq_check(const ConvexPolygon& o0, const ConvexPolygon& o1,
                                 const VerifyConfig& cfg) {
    const TorsionSolve s0 = torsion_solve(o0, cfg.mesh_h);
    const double T1 = torsion_solve(o1, cfg.mesh_h).data.T;
    const double mixed = mixed_rigidity(s0.data, o0, o1);
    const double lhs = std::pow(mixed, 4.0);
    const double rhs = std::pow(s0.data.T, 3.0) * T1;
    CheckReport r = make_report("minkowski_inequality", lhs, rhs, 4.0 * cfg.rel_slack, "ge");
    r.details["mixed"] = mixed;
    r.details["equality"] = (std::fabs(lhs - rhs) <= 4e-3 * rhs) ? 1.0 : 0.0;
    return r;
}

namespace {

ConvergenceTable continuity_table(const DiscreteMeasure& base_m, double base_p,
                                  const std::vector<DiscreteMeasure>& row_measures,
                                  const std::vector<double>& row_ps,
                                  const std::vector<double>& sizes, const SolveConfig& cfg) {
    ConvergenceTable table;
    SolveConfig scfg = cfg;
    scfg.p = base_p;
    const SolveReport limit = solve_original(base_m, scfg);
    table.limit_T = limit.T_value;
    table.limit_residual = limit.residual;
    const ConvexPolygon& limit_body = *limit.original_solution;

    const std::size_t n = row_measures.size();
    table.rows.assign(n, {});
    parallel_for(n, [&](std::size_t i) {
        ConvergenceRow& row = table.rows[i];
        row.index = static_cast<int>(i);
        row.perturbation = sizes[i];
        try {
            SolveConfig rcfg = cfg;
            rcfg.p = row_ps[i];
            auto [ok, gap] = hemisphere_check(row_measures[i]);
            if (!ok)
                throw HemisphereViolation("row measure concentrated on a closed half-circle");
            const SolveReport rep = solve_original(row_measures[i], rcfg);
            row.hausdorff = hausdorff_distance(*rep.original_solution, limit_body).distance;
            row.residual = rep.residual;
            row.T = torsion_solve(*rep.original_solution, cfg.mesh_h).data.T;
        } catch (const Error& e) {
            row.failed = true;
            row.error = e.what();
        }
    });

    bool ok = true;
    for (const ConvergenceRow& r : table.rows)
        if (r.failed) ok = false;
    for (std::size_t i = 1; i < table.rows.size() && ok; ++i)
        if (table.rows[i].hausdorff > table.rows[i - 1].hausdorff * (1.0 + 1e-9)) ok = false;
    if (ok && !table.rows.empty() && !(table.rows.back().hausdorff < 10.0 * cfg.tol_residual))
        ok = false;
    table.passed = ok;
    table.criterion = "hausdorff non-increasing along shrinking perturbations; final < 10x tol";
    return table;
}

} // namespace

ConvergenceTable continuity_in_measure(const DiscreteMeasure& m,
                                       const std::vector<DiscreteMeasure>& perturbed,
                                       const std::vector<double>& perturbation_sizes,
                                       double p, const SolveConfig& cfg) {
    if (perturbed.size() != perturbation_sizes.size())
        throw InputError("continuity_in_measure: sizes/measures length mismatch");
    std::vector<double> ps(perturbed.size(), p);
    return continuity_table(m, p, perturbed, ps, perturbation_sizes, cfg);
}

ConvergenceTable continuity_in_p(const DiscreteMeasure& m, const std::vector<double>& p_list,
                                 double p, const SolveConfig& cfg) {
    std::vector<DiscreteMeasure> ms(p_list.size(), m);
    std::vector<double> sizes(p_list.size());
    for (std::size_t i = 0; i < p_list.size(); ++i) {
        if (std::fabs(p_list[i] - 4.0) < 1e-12)
            throw PCritical("continuity_in_p: p_i = 4 excluded");
        sizes[i] = std::fabs(p_list[i] - p);
    }
    return continuity_table(m, p, ms, p_list, sizes, cfg);
}

CheckReport uniqueness_probe(const DiscreteMeasure& m, double p, int k, const SolveConfig& cfg) {
    if (k < 2) throw InputError("uniqueness_probe: need k >= 2");
    SolveConfig scfg = cfg;
    scfg.p = p;

    std::vector<std::optional<ConvexPolygon>> sols(static_cast<std::size_t>(k));
    parallel_for(static_cast<std::size_t>(k), [&](std::size_t i) {
        std::mt19937_64 rng(cfg.seed + i);
        std::uniform_real_distribution<double> u(0.5, 2.0);
        SupportVector y0(m.size());
        for (double& v : y0) v = u(rng);
        try {
            sols[i] = *solve_normalized(m, scfg, y0).normalized_solution;
        } catch (const Error&) {
            // failed start recorded below
        }
    });

    CheckReport r;
    r.name = "uniqueness";
    r.relation = "le";
    r.tolerance = 0.0;
    double diam = 0.0, worst = 0.0;
    bool all_ok = true;
    for (int i = 0; i < k; ++i) {
        if (!sols[static_cast<std::size_t>(i)]) {
            all_ok = false;
            r.details["failed_start_" + std::to_string(i)] = 1.0;
            continue;
        }
        diam = std::max(diam, sols[static_cast<std::size_t>(i)]->diameter());
    }
    if (all_ok)
        for (int i = 0; i < k; ++i)
            for (int j = i + 1; j < k; ++j)
                worst = std::max(worst, hausdorff_distance(*sols[static_cast<std::size_t>(i)],
                                                           *sols[static_cast<std::size_t>(j)])
                                            .distance);
    r.measured = worst;
    r.bound = 1e-3 * diam;
    r.details["k"] = k;
    r.details["diam"] = diam;
    r.passed = all_ok && recheck(r);
    return r;
}

CheckReport weak_convergence_probe(const std::vector<ConvexPolygon>& seq,
                                   const ConvexPolygon& limit,
                                   const std::vector<DirectionFunction>& test_fns,
                                   const VerifyConfig& cfg) {
    if (seq.empty() || test_fns.empty())
        throw InputError("weak_convergence_probe: empty sequence or test functions");

    auto sums = [&](const ConvexPolygon& p) {
        const TorsionSolve s = torsion_solve(p, cfg.mesh_h);
        std::vector<double> out(test_fns.size() + 1, 0.0);
        for (std::size_t f = 0; f < p.facets().size(); ++f) {
            for (std::size_t k = 0; k < test_fns.size(); ++k)
                out[k] += test_fns[k](p.facets()[f].normal) * s.data.facet_measures[f];
            out.back() += s.data.facet_measures[f];
        }
        return out;
    };

    const std::vector<double> limit_sums = sums(limit);
    const double total_measure = limit_sums.back();
    std::vector<std::vector<double>> seq_sums(seq.size());
    parallel_for(seq.size(), [&](std::size_t j) { seq_sums[j] = sums(seq[j]); });

    CheckReport r;
    r.name = "weak_convergence";
    r.relation = "le";
    r.bound = 2e-2;
    r.tolerance = 0.0;
    bool ok = true;
    double worst_final = 0.0;
    for (std::size_t k = 0; k < test_fns.size(); ++k) {
        double fmax = 0.0;
        for (int g = 0; g < 720; ++g)
            fmax = std::max(
                fmax, std::fabs(test_fns[k](UnitVector::from_angle(2.0 * M_PI * g / 720.0))));
        const double scale = total_measure * std::max(fmax, 1e-30);
        double prev = std::numeric_limits<double>::infinity();
        double gap = 0.0;
        for (std::size_t j = 0; j < seq.size(); ++j) {
            gap = std::fabs(seq_sums[j][k] - limit_sums[k]);
            if (gap > prev * (1.0 + 1e-9) + 1e-12 * scale) ok = false;
            prev = gap;
        }
        r.details["final_gap_fn" + std::to_string(k)] = gap;
        worst_final = std::max(worst_final, gap / scale);
    }
    r.measured = worst_final;
    r.details["total_measure"] = total_measure;
    r.passed = ok && recheck(r);
    return r;
}

ConvexPolygon random_polygon(std::uint64_t seed, int min_facets, int max_facets) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> nfd(min_facets, max_facets);
    const int nf = nfd(rng);
    std::uniform_real_distribution<double> jitter(-0.25, 0.25);
    std::uniform_real_distribution<double> sup(0.8, 1.2);
    std::vector<UnitVector> normals;
    SupportVector y;
    for (int k = 0; k < nf; ++k) {
        const double theta = 2.0 * M_PI * (k + jitter(rng)) / nf;
        normals.push_back(UnitVector::from_angle(theta));
        y.push_back(sup(rng));
    }
    return wulff_shape(normals, y);
}

} // namespace torsmink
