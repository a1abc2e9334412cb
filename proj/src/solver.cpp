#include "torsmink/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace torsmink {

void SolveConfig::validate() const {
    if (!(p > 1.0)) throw InputError("solver: require p > 1");
    if (!(tol_residual > 0.0)) throw InputError("solver: require tol_residual > 0");
    if (!(mesh_h > 0.0)) throw InputError("solver: require mesh_h > 0");
    if (!(backtrack_factor > 0.0 && backtrack_factor < 1.0))
        throw InputError("solver: require 0 < backtrack_factor < 1");
    if (max_iters < 1) throw InputError("solver: require max_iters >= 1");
}

double functional_Fp(const DiscreteMeasure& m, const ConvexPolygon& p, double p_exp) {
    long double s = 0.0L;
    for (std::size_t i = 0; i < m.size(); ++i)
        s += m.weights[i] * std::pow(support_function(p, m.normals[i]), p_exp);
    return static_cast<double>(s) / 4.0;
}

namespace {

// One full evaluation at a (positive) support vector: Wulff shape, FEM solve,
// atom-mapped facet measures, objective, gradient, optimality residual.
struct State {
    SupportVector y;            // cleaned supports
    std::vector<double> mu;     // per atom (0 for atoms without a facet)
    TorsionData data;
    double Fp = 0.0;
    double T_supp = 0.0;
    double G = 0.0;
    std::vector<double> grad;   // dG/dy
    std::vector<double> phi;    // optimality log-ratios at the F_p = 1 scale
    double residual = 0.0;      // max |exp(phi) - 1|
    bool all_active = false;
    double min_facet_len = 0.0; // shortest facet among the atoms
    double diam = 0.0;
};

State evaluate(const DiscreteMeasure& m, const SupportVector& y, const SolveConfig& cfg,
               const std::vector<int>* atom_counts = nullptr) {
    const std::size_t n = m.size();
    const ConvexPolygon P0 = wulff_shape(m.normals, y);
    State st;
    st.y = clean_support_vector(P0, m.normals);
    st.mu.assign(n, 0.0);

    // canonicalize to the F_p = 1 scale geometrically (exact) before the FEM
    // solve, so iterates never drift in size and re-evaluations reproduce the
    // state bit-for-bit
    {
        long double fp0 = 0.0L;
        for (std::size_t i = 0; i < n; ++i) fp0 += m.weights[i] * std::pow(st.y[i], cfg.p);
        const double sc = std::pow(static_cast<double>(fp0) / 4.0, -1.0 / cfg.p);
        for (double& v : st.y) v *= sc;
    }
    const ConvexPolygon P = wulff_shape(m.normals, st.y);
    st.y = clean_support_vector(P, m.normals);

    std::vector<int> facet_counts;
    if (atom_counts) {
        facet_counts.assign(P.facets().size(), 0);
        for (std::size_t f = 0; f < P.facets().size(); ++f) {
            const int src = P.facets()[f].source_index;
            if (src >= 0) facet_counts[f] = (*atom_counts)[static_cast<std::size_t>(src)];
        }
    }
    const TriMesh mesh = triangulate(P, cfg.mesh_h, atom_counts ? &facet_counts : nullptr);
    const TorsionField field = solve_torsion(mesh);
    st.data = facet_torsion_measure(field, P);
    std::vector<double> atom_len(n, 0.0);
    for (std::size_t f = 0; f < P.facets().size(); ++f) {
        const int src = P.facets()[f].source_index;
        if (src < 0) continue;
        st.mu[static_cast<std::size_t>(src)] += st.data.facet_measures[f];
        atom_len[static_cast<std::size_t>(src)] += P.facets()[f].length;
    }
    st.diam = P.diameter();
    st.min_facet_len = *std::min_element(atom_len.begin(), atom_len.end());

    long double fp = 0.0L, hm = 0.0L;
    for (std::size_t i = 0; i < n; ++i) {
        fp += m.weights[i] * std::pow(st.y[i], cfg.p);
        hm += st.y[i] * st.mu[i];
    }
    st.Fp = static_cast<double>(fp) / 4.0;
    st.T_supp = static_cast<double>(hm) / 4.0;
    st.G = st.Fp / std::pow(st.T_supp, cfg.p / 4.0);

    st.grad.assign(n, 0.0);
    const double tpow = std::pow(st.T_supp, -cfg.p / 4.0);
    for (std::size_t i = 0; i < n; ++i)
        st.grad[i] = (cfg.p / 4.0) * m.weights[i] * std::pow(st.y[i], cfg.p - 1.0) * tpow -
                     st.Fp * (cfg.p / 4.0) * tpow / st.T_supp * st.mu[i];

    // optimality ratios at the F_p = 1 scale; inactive atoms clip to a large
    // negative log, which both flags residual 1 and points the polish inward
    const double log_s = -std::log(st.Fp) / cfg.p;
    st.phi.assign(n, 0.0);
    st.all_active = true;
    st.residual = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double r;
        if (st.mu[i] > 0.0 && st.y[i] > 0.0) {
            r = std::log(st.mu[i] / (st.T_supp * m.weights[i] * std::pow(st.y[i], cfg.p - 1.0))) -
                cfg.p * log_s;
        } else {
            r = -3.0;
            st.all_active = false;
        }
        st.phi[i] = std::clamp(r, -3.0, 3.0);
        st.residual = std::max(st.residual, std::fabs(std::expm1(st.phi[i])));
    }
    return st;
}

// Levenberg-damped normal equations for the (scale-degenerate) m x m system
std::vector<double> lm_step(const std::vector<double>& J, const std::vector<double>& rhs,
                            std::size_t n, double ridge) {
    std::vector<double> A(n * n, 0.0), b(n, 0.0);
    double trace = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < n; ++k) s += J[k * n + i] * J[k * n + j];
            A[i * n + j] = s;
            if (i == j) trace += s;
        }
    const double lam = ridge * std::max(trace / static_cast<double>(n), 1e-30);
    for (std::size_t i = 0; i < n; ++i) {
        A[i * n + i] += lam;
        double s = 0.0;
        for (std::size_t k = 0; k < n; ++k) s += J[k * n + i] * rhs[k];
        b[i] = s;
    }
    // Cholesky A = L L^T, forward/back substitution
    std::vector<double> L(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = A[i * n + j];
            for (std::size_t k = 0; k < j; ++k) s -= L[i * n + k] * L[j * n + k];
            if (i == j) {
                if (!(s > 0.0)) throw SolverDiverged("solver: normal equations not SPD");
                L[i * n + i] = std::sqrt(s);
            } else {
                L[i * n + j] = s / L[j * n + j];
            }
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= L[i * n + k] * x[k];
        x[i] = s / L[i * n + i];
    }
    for (std::size_t ii = n; ii-- > 0;) {
        double s = x[ii];
        for (std::size_t k = ii + 1; k < n; ++k) s -= L[k * n + ii] * x[k];
        x[ii] = s / L[ii * n + ii];
    }
    return x;
}

double norm2(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

} // namespace

ObjectiveEval objective_and_gradient(const DiscreteMeasure& m, const SupportVector& y,
                                     const SolveConfig& cfg) {
    cfg.validate();
    if (y.size() != m.size()) throw InputError("objective: support vector length mismatch");
    for (double v : y)
        if (!(v > 0.0)) throw InputError("objective: supports must be strictly positive");
    State st = evaluate(m, y, cfg);
    ObjectiveEval out;
    out.G = st.G;
    out.grad = st.grad;
    out.data = st.data;
    out.cleaned = st.y;
    out.atom_mu = st.mu;
    out.Fp = st.Fp;
    out.T_support = st.T_supp;
    out.residual = st.residual;
    return out;
}

SolveReport solve_normalized(const DiscreteMeasure& m, const SolveConfig& cfg,
                             const std::optional<SupportVector>& y0) {
    cfg.validate();
    auto [hemi_ok, gap] = hemisphere_check(m);
    if (!hemi_ok)
        throw HemisphereViolation("solve: measure concentrated on a closed half-circle (gap " +
                                  std::to_string(gap) + ")");

    const std::size_t n = m.size();
    SupportVector y = y0.value_or(SupportVector(n, 1.0));
    if (y.size() != n) throw InputError("solve: initial support vector length mismatch");
    for (double v : y)
        if (!(v > 0.0)) throw InputError("solve: initial supports must be strictly positive");

    // pin boundary subdivision counts from a start-independent reference body
    // (the normalized all-ones Wulff shape), so the discrete objective does
    // not flip resolution under the small support changes near the root
    std::vector<int> atom_counts(n, 0);
    {
        SupportVector ones(n, 1.0);
        const ConvexPolygon R0 = wulff_shape(m.normals, ones);
        const double fp_ref = functional_Fp(m, R0, cfg.p);
        const ConvexPolygon R = R0.scaled(std::pow(fp_ref, -1.0 / cfg.p));
        for (const Facet& f : R.facets()) {
            if (f.source_index < 0) continue;
            int c = 1;
            while (f.length / static_cast<double>(c) > cfg.mesh_h) c *= 2;
            atom_counts[static_cast<std::size_t>(f.source_index)] = c;
        }
    }

    State st = evaluate(m, y, cfg, &atom_counts);
    std::vector<IterationRecord> history;
    std::vector<double> residual_history;
    double step = cfg.step_init;
    int iter = 0;
    bool converged = st.residual < cfg.tol_residual;
    bool polish = false;
    int polish_failures = 0;

    while (iter < cfg.max_iters && !converged) {
        ++iter;
        if (!polish && st.residual < 0.05 && st.all_active &&
            st.min_facet_len > 0.02 * st.diam)
            polish = true; // close enough for the optimality polish to take over
        history.push_back({st.G, st.residual, step, polish});
        residual_history.push_back(st.residual);

        if (!polish) {
            // gradient descent in z = log y with Armijo backtracking
            std::vector<double> gz(n);
            double gz2 = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                gz[i] = st.grad[i] * st.y[i];
                gz2 += gz[i] * gz[i];
            }
            if (std::getenv("TORSMINK_DEBUG")) {
                std::fprintf(stderr, "  gd iter=%d res=%.3e G=%.9f active=%d minlen=%.3e diam=%.3e y/gz:",
                             iter, st.residual, st.G, static_cast<int>(st.all_active),
                             st.min_facet_len, st.diam);
                for (std::size_t i = 0; i < n; ++i)
                    std::fprintf(stderr, " %.4f/%.1e", st.y[i], gz[i]);
                std::fprintf(stderr, "\n");
            }
            bool accepted = false;
            while (step > 1e-14) {
                SupportVector trial(n);
                for (std::size_t i = 0; i < n; ++i) {
                    const double dz = std::clamp(-step * gz[i], -5.0, 5.0);
                    trial[i] = st.y[i] * std::exp(dz);
                }
                State ts;
                try {
                    ts = evaluate(m, trial, cfg, &atom_counts);
                } catch (const Error&) {
                    step *= cfg.backtrack_factor;
                    continue; // trial body unusable; shrink
                }
                if (ts.G <= st.G - 1e-4 * step * gz2) {
                    st = ts;
                    accepted = true;
                    step = std::min(step * 1.5, 16.0);
                    break;
                }
                step *= cfg.backtrack_factor;
            }
            if (st.residual < cfg.tol_residual) {
                converged = true;
                break;
            }
            if (!accepted && st.all_active && st.min_facet_len > 1e-4 * st.diam) {
                polish = true; // descent reached its consistency floor
            } else if (!accepted) {
                break; // stalled with an inactive facet: report non-convergence
            }
            continue;
        }

        // Gauss-Newton polish on phi(log y) = 0, least squares because the
        // system is scale-invariant
        std::vector<double> J(n * n, 0.0);
        // the FD step must dominate the mesh-flip noise in phi (~1e-4), and a
        // 0.2% truncation error is harmless for a Gauss-Newton direction
        const double eps = 2e-3;
        for (std::size_t j = 0; j < n; ++j) {
            SupportVector yp = st.y;
            yp[j] *= std::exp(eps);
            State sp = evaluate(m, yp, cfg, &atom_counts);
            if (!sp.all_active) { // outward bump killed a facet; probe inward instead
                yp = st.y;
                yp[j] *= std::exp(-eps);
                sp = evaluate(m, yp, cfg, &atom_counts);
                for (std::size_t i = 0; i < n; ++i) J[i * n + j] = (st.phi[i] - sp.phi[i]) / eps;
            } else {
                for (std::size_t i = 0; i < n; ++i) J[i * n + j] = (sp.phi[i] - st.phi[i]) / eps;
            }
        }
        std::vector<double> rhs(n);
        for (std::size_t i = 0; i < n; ++i) rhs[i] = -st.phi[i];

        bool accepted = false;
        double ridge = 1e-6;
        const double phi_norm = norm2(st.phi);
        const bool debug = std::getenv("TORSMINK_DEBUG") != nullptr;
        for (int attempt = 0; attempt < 2 && !accepted; ++attempt, ridge *= 1e4) {
            std::vector<double> d;
            try {
                d = lm_step(J, rhs, n, ridge);
            } catch (const SolverDiverged&) {
                continue;
            }
            double dmax = 0.0;
            for (double v : d) dmax = std::max(dmax, std::fabs(v));
            if (dmax > 2.0)
                for (double& v : d) v *= 2.0 / dmax;
            double t = 1.0;
            for (int bt = 0; bt < 9 && !accepted; ++bt, t *= 0.5) {
                SupportVector trial(n);
                for (std::size_t i = 0; i < n; ++i) trial[i] = st.y[i] * std::exp(t * d[i]);
                State ts;
                try {
                    ts = evaluate(m, trial, cfg, &atom_counts);
                } catch (const Error&) {
                    continue;
                }
                if (debug)
                    std::fprintf(stderr,
                                 "  polish iter=%d attempt=%d t=%.3e |phi|=%.3e->%.3e res=%.3e G=%.12f->%.12f active=%d\n",
                                 iter, attempt, t, phi_norm, norm2(ts.phi), ts.residual, st.G,
                                 ts.G, static_cast<int>(ts.all_active));
                if (!ts.all_active) continue;
                if (norm2(ts.phi) < phi_norm * (1.0 - 1e-4 * t)) {
                    st = ts;
                    accepted = true;
                }
            }
        }
        if (st.residual < cfg.tol_residual) {
            converged = true;
            break;
        }
        if (!accepted) {
            // noisy Jacobian or a flip crease; hand back to descent unless
            // that already failed repeatedly
            if (++polish_failures >= 3) break;
            polish = false;
            step = std::max(step, 0.1);
        }
    }

    if (st.residual < cfg.tol_residual) converged = true;
    history.push_back({st.G, st.residual, step, polish});
    residual_history.push_back(st.residual);
    if (!converged)
        throw MaxItersExceeded("solve: optimality residual " + std::to_string(st.residual) +
                                   " above tolerance " + std::to_string(cfg.tol_residual) +
                                   " after " + std::to_string(iter) + " iterations",
                               st.residual, residual_history);

    // final normalized body: F_p = 1 exactly
    const double sc = std::pow(st.Fp, -1.0 / cfg.p);
    SupportVector yn = st.y;
    for (double& v : yn) v *= sc;
    const ConvexPolygon body = wulff_shape(m.normals, yn);
    const TorsionData nd = scale_torsion_data(st.data, sc);

    SolveReport rep;
    rep.normalized_solution = body;
    rep.residual = st.residual;
    rep.Fp_value = functional_Fp(m, body, cfg.p);
    rep.T_value = nd.T;
    rep.lagrange_b = 4.0 * nd.T / cfg.p;
    rep.iterations = std::move(history);
    rep.p = cfg.p;
    rep.atom_h.assign(n, 0.0);
    rep.atom_mu.assign(n, 0.0);
    rep.atom_target.assign(n, 0.0);
    const double s3 = sc * sc * sc;
    for (std::size_t i = 0; i < n; ++i) {
        rep.atom_h[i] = yn[i];
        rep.atom_mu[i] = st.mu[i] * s3;
        rep.atom_target[i] = m.weights[i] * std::pow(yn[i], cfg.p - 1.0) * (st.T_supp * s3 * sc);
        if (!(st.mu[i] > 0.0))
            throw MissingFacet("solve: atom " + std::to_string(i) +
                               " has no facet on the converged body");
        if (!(yn[i] > 0.0)) throw EmptyInterior("solve: origin not strictly interior");
    }
    return rep;
}

double optimality_residual(const DiscreteMeasure& m, const ConvexPolygon& p,
                           const TorsionData& d, double p_exp) {
    const auto matches = match_facets(m, p);
    long double hm = 0.0L;
    for (std::size_t f = 0; f < p.facets().size(); ++f)
        hm += static_cast<long double>(p.facets()[f].offset) * d.facet_measures[f];
    const double T_supp = static_cast<double>(hm) / 4.0;

    double worst = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (!matches[i])
            throw MissingFacet("optimality_residual: measure normal " + std::to_string(i) +
                               " has no facet on the body");
        const std::size_t f = *matches[i];
        const double h = p.facets()[f].offset;
        const double target = m.weights[i] * std::pow(h, p_exp - 1.0);
        worst = std::max(worst, std::fabs(d.facet_measures[f] / T_supp - target) / target);
    }
    return worst;
}

TorsionData scale_torsion_data(const TorsionData& d, double s) {
    TorsionData out = d;
    const double s3 = s * s * s;
    out.T = d.T * s3 * s;
    out.T_int = d.T_int * s3 * s;
    for (double& v : out.facet_measures) v *= s3;
    for (double& v : out.facet_measures_trace) v *= s3;
    for (double& v : out.flux) v *= s;
    return out;
}

ConvexPolygon rescale_solution(const ConvexPolygon& p, double p_exp, RescaleTarget target,
                               const DiscreteMeasure& m, const TorsionData& d) {
    switch (target) {
        case RescaleTarget::T_EQ_1:
            return p.scaled(std::pow(d.T, -0.25));
        case RescaleTarget::FP_EQ_1:
            return p.scaled(std::pow(functional_Fp(m, p, p_exp), -1.0 / p_exp));
        case RescaleTarget::ORIGINAL:
            if (std::fabs(p_exp - 4.0) < 1e-12)
                throw PCritical("rescale: the original problem excludes p = n+2 = 4");
            return p.scaled(std::pow(d.T, 1.0 / (p_exp - 4.0)));
        case RescaleTarget::NORMALIZED:
            return p.scaled(std::pow(d.T, -1.0 / p_exp));
    }
    throw InputError("rescale: unknown target");
}

SolveReport solve_original(const DiscreteMeasure& m, const SolveConfig& cfg) {
    if (std::fabs(cfg.p - 4.0) < 1e-12)
        throw PCritical("solve: the original problem excludes p = n+2 = 4");
    SolveReport rep = solve_normalized(m, cfg);

    const double s = std::pow(rep.T_value, 1.0 / (cfg.p - 4.0));
    const ConvexPolygon original = rep.normalized_solution->scaled(s);

    // independent verification on a fresh mesh of the rescaled body
    const TorsionSolve ts = torsion_solve(original, cfg.mesh_h);
    const auto matches = match_facets(m, original);
    double worst = 0.0;
    const std::size_t n = m.size();
    rep.atom_h.assign(n, 0.0);
    rep.atom_mu.assign(n, 0.0);
    rep.atom_target.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (!matches[i])
            throw MissingFacet("solve_original: atom " + std::to_string(i) + " lost its facet");
        const std::size_t f = *matches[i];
        const double h = original.facets()[f].offset;
        const double target = m.weights[i] * std::pow(h, cfg.p - 1.0);
        rep.atom_h[i] = h;
        rep.atom_mu[i] = ts.data.facet_measures[f];
        rep.atom_target[i] = target;
        worst = std::max(worst, std::fabs(ts.data.facet_measures[f] - target) / target);
    }
    if (worst > cfg.tol_residual)
        throw MaxItersExceeded("solve_original: verification residual " + std::to_string(worst) +
                                   " above tolerance " + std::to_string(cfg.tol_residual),
                               worst);
    rep.original_solution = original;
    rep.residual = worst;
    return rep;
}

} // namespace torsmink
