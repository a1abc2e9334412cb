#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "torsmink/solver.hpp"

// Executable forms of the torsion-measure identities, inequalities,
// continuity experiments, and uniqueness probes.

namespace torsmink {

struct CheckReport {
    std::string name;
    bool passed = false;
    double measured = 0.0;
    double bound = 0.0;
    double tolerance = 0.0;
    // relation of measured to bound: "le" (measured <= bound + tol*scale),
    // "ge", or "rel" (|measured - bound| <= tol * |bound|)
    std::string relation;
    std::map<std::string, double> details;
};

// re-derives `passed` from the stored fields
bool recheck(const CheckReport& r);

struct VerifyConfig {
    double mesh_h = 0.02;
    double rel_slack = 1e-3; // additive relative slack for the inequalities
    std::uint64_t seed = 0;
};

struct ConvergenceRow {
    int index = 0;
    double perturbation = 0.0;
    double hausdorff = 0.0;
    double residual = 0.0;
    double T = 0.0;
    bool failed = false;
    std::string error;
};

struct ConvergenceTable {
    std::vector<ConvergenceRow> rows; // ordered by decreasing perturbation
    double limit_T = 0.0;
    double limit_residual = 0.0;
    bool passed = false;    // distances non-increasing and final < 10x solver tol
    std::string criterion;
};

// homogeneity, translation invariance, gradient bound, support identity,
// divergence identity, volume bound
std::vector<CheckReport> identity_suite(const ConvexPolygon& p, const VerifyConfig& cfg);

// Richardson-extrapolated one-sided difference of t -> T(omega + t*omega1)
// against sum h(omega1) mu(omega); pass within 2%
CheckReport hadamard_check(const ConvexPolygon& omega, const ConvexPolygon& omega1,
                           const std::vector<double>& t_list, const VerifyConfig& cfg);

// T(l*o0 + (1-l)*o1)^(1/4) >= l*T(o0)^(1/4) + (1-l)*T(o1)^(1/4)
CheckReport bm_check(const ConvexPolygon& o0, const ConvexPolygon& o1, double lambda,
                     const VerifyConfig& cfg);

// T(o0,o1)^4 >= T(o0)^3 T(o1)
CheckReport minkowski_ineq_check(const ConvexPolygon& o0, const ConvexPolygon& o1,
                                 const VerifyConfig& cfg);

ConvergenceTable continuity_in_measure(const DiscreteMeasure& m,
                                       const std::vector<DiscreteMeasure>& perturbed,
                                       const std::vector<double>& perturbation_sizes,
                                       double p, const SolveConfig& cfg);

ConvergenceTable continuity_in_p(const DiscreteMeasure& m, const std::vector<double>& p_list,
                                 double p, const SolveConfig& cfg);

// k solves from seeded random starts in [0.5, 2]^m; pass iff all pairwise
// Hausdorff distances are <= 1e-3 * diam
CheckReport uniqueness_probe(const DiscreteMeasure& m, double p, int k, const SolveConfig& cfg);

using DirectionFunction = std::function<double(UnitVector)>;

// facet-measure-weighted sums of each test function along the sequence must
// approach the limit's sum; final gap < 2% of total measure * max |f|
CheckReport weak_convergence_probe(const std::vector<ConvexPolygon>& seq,
                                   const ConvexPolygon& limit,
                                   const std::vector<DirectionFunction>& test_fns,
                                   const VerifyConfig& cfg);

// well-conditioned seeded random polygon (wulff of jittered normals/supports)
ConvexPolygon random_polygon(std::uint64_t seed, int min_facets = 5, int max_facets = 9);

// worker fan-out honoring TORSMINK_THREADS, joining results in index order
std::size_t worker_count();

} // namespace torsmink
