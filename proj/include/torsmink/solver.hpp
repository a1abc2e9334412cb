#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "torsmink/fem.hpp"
#include "torsmink/geometry.hpp"

// Variational solver for the discrete planar L_p problems:
//   normalized (Problem 3):  mu_i / T = c_i h_i^(p-1)
//   original   (Problem 4):  mu_i     = c_i h_i^(p-1)
// Scheme: gradient descent on the scale-invariant quotient
//   G(y) = F_p(P(y)) / T(P(y))^(p/4)
// in log-support coordinates with Armijo backtracking, followed by a damped
// Gauss-Newton polish on the optimality log-ratios once every measure normal
// carries a facet. Inside the optimality equation T is evaluated through the
// support identity T = (1/4) sum h_i mu_i, which makes the discrete system
// exactly solvable; reported rigidities are the energy values.

namespace torsmink {

struct SolveConfig {
    double p = 2.0;
    double mesh_h = 0.02;
    double tol_residual = 1e-2;
    int max_iters = 500;
    double step_init = 0.5;
    double backtrack_factor = 0.5;
    std::uint64_t seed = 0;

    void validate() const;
};

struct IterationRecord {
    double objective = 0.0;
    double residual = 0.0;
    double step = 0.0;
    bool polish = false; // Gauss-Newton tail; objective may wiggle within 1e-6 relative there
};

struct SolveReport {
    std::optional<ConvexPolygon> normalized_solution; // F_p = 1 scale (always set on success)
    std::optional<ConvexPolygon> original_solution;   // Problem-4 scale; absent when p = 4
    double residual = 0.0;
    double Fp_value = 0.0;
    double T_value = 0.0;   // energy rigidity of the normalized solution
    double lagrange_b = 0.0; // 4 T / p
    std::vector<IterationRecord> iterations;
    double p = 0.0;

    // per-atom table on the reported solution (original if present, else normalized)
    std::vector<double> atom_h;
    std::vector<double> atom_mu;
    std::vector<double> atom_target; // c_i h_i^(p-1), times T for the normalized table
};

// F_p(P) = (1/4) sum c_i h(P, xi_i)^p
double functional_Fp(const DiscreteMeasure& m, const ConvexPolygon& p, double p_exp);

struct ObjectiveEval {
    double G = 0.0;
    std::vector<double> grad;   // d G / d y_i at the cleaned support vector
    TorsionData data;           // FEM data of P(y)
    SupportVector cleaned;      // h(P(y), xi_i)
    std::vector<double> atom_mu;
    double Fp = 0.0;
    double T_support = 0.0;     // (1/4) sum h mu
    double residual = 0.0;      // scale-invariant optimality residual
};

ObjectiveEval objective_and_gradient(const DiscreteMeasure& m, const SupportVector& y,
                                     const SolveConfig& cfg);

SolveReport solve_normalized(const DiscreteMeasure& m, const SolveConfig& cfg,
                             const std::optional<SupportVector>& y0 = std::nullopt);

// max_i |mu_i/T - c_i h_i^(p-1)| / (c_i h_i^(p-1)), T via the support identity.
// Throws MissingFacet when a measure normal has no facet on P.
double optimality_residual(const DiscreteMeasure& m, const ConvexPolygon& p,
                           const TorsionData& d, double p_exp);

enum class RescaleTarget { T_EQ_1, FP_EQ_1, ORIGINAL, NORMALIZED };

ConvexPolygon rescale_solution(const ConvexPolygon& p, double p_exp, RescaleTarget target,
                               const DiscreteMeasure& m, const TorsionData& d);

// torsion data of the scaled body s*P from data of P (exact scaling laws)
TorsionData scale_torsion_data(const TorsionData& d, double s);

SolveReport solve_original(const DiscreteMeasure& m, const SolveConfig& cfg);

} // namespace torsmink
