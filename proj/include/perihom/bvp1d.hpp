/// @file bvp1d.hpp
/// @brief One-dimensional boundary value problems for the rate study:
/// the eps-problem through its exact first-integral representation, the
/// homogenized problem by double quadrature, Dirichlet correctors, error
/// norms with and without correctors, log-log rate fits, Lipschitz and
/// Hoelder scans, and the non-centered counterexample.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "perihom/drift_transform.hpp"
#include "perihom/expression.hpp"
#include "perihom/trig_interp.hpp"

namespace perihom {

struct Domain1D {
    Real x0 = 0.0;
    Real x1 = 1.0;
};

/// Problem data: -(q(x/eps) u')' = f(x) m(x/eps) on (x0, x1), u = g on the
/// boundary, swept over the listed eps values.
struct BVProblem {
    Domain1D domain;
    Expression f;   // right-hand side in x1; empty means f = 0
    Real g0 = 0.0;  // u(x0)
    Real g1 = 0.0;  // u(x1)
    std::vector<Real> eps_list;
};

void validate_eps_list(const std::vector<Real>& eps);

struct DiscreteSolution {
    Eigen::ArrayXd nodes;
    Eigen::ArrayXd values;
    Eigen::ArrayXd deriv;
};

struct HomogenizedSolution {
    DiscreteSolution sol;
    Eigen::ArrayXd second;  // u'' = -f/a_bar at the nodes
    Real a_bar = 0.0;
};

struct SolveOptions {
    int mesh_per_period = 64;
    std::int64_t max_intervals = 1 << 22;
};

/// Exact first-integral solve: u'(x) = (C - F(x))/q(x/eps) with
/// F(x) = int f m(./eps), C fixed by the boundary data; composite 6-point
/// Gauss panels aligned to the eps-cells. Refuses eps below the mesh budget.
DiscreteSolution solve_eps_1d(const TransformedCoefficients& tc, const BVProblem& prob, Real eps,
                              const SolveOptions& opts = {});

/// -a_bar u'' = f by double quadrature on the given node set.
HomogenizedSolution solve_homogenized_1d(Real a_bar, const BVProblem& prob,
                                         const Eigen::ArrayXd& nodes);

struct CorrectorSolution {
    DiscreteSolution sol;
    Real sup_deviation = 0.0;  // |Phi_eps - x|_inf, expected O(eps)
};

/// (q(x/eps) Phi')' = 0 with Phi = x on the boundary, via the closed form
/// Phi(x) = x0 + (x1 - x0) G(x)/G(x1), G(x) = int q^{-1}(./eps).
CorrectorSolution dirichlet_corrector_1d(const TransformedCoefficients& tc, Real eps,
                                         const Domain1D& domain, const SolveOptions& opts = {});

struct ErrorRecord {
    Real l2 = 0.0;
    Real linf = 0.0;
    Real h1_raw = 0.0;
    Real h1_corrected = 0.0;
};

/// Norms of u_eps - u and of u_eps - u - (Phi - x) u' (with derivatives for
/// the H1 entries), by composite quadrature on the common fine mesh.
ErrorRecord error_norms(const DiscreteSolution& u_eps, const HomogenizedSolution& u_hom,
                        const CorrectorSolution& corrector);

struct RateFit {
    Real slope = 0.0;
    Real intercept = 0.0;
    Real max_log_residual = 0.0;
    std::vector<int> used_indices;   // indices of (eps, err) pairs in the fit
    std::string note;                // exclusions (zero errors, pre-asymptotic)
};

/// Least-squares line through (log eps, log err); needs >= 4 positive pairs.
/// Exact zeros are excluded with a note. When `drop_preasymptotic` is set,
/// the largest eps is removed and the line refit if its log-residual
/// exceeds 0.1.
RateFit fit_rate(const std::vector<Real>& eps, const std::vector<Real>& errs,
                 bool drop_preasymptotic = false);

struct LipschitzRow {
    Real eps = 0.0;
    Real grad_sup = 0.0;       // |u'_eps|_inf
    Real holder_half = 0.0;    // C^{0,1/2} seminorm of u'_eps
};

struct LipschitzScan {
    std::vector<LipschitzRow> rows;
    Real grad_sup_spread = 0.0;      // max/min - 1 over the scanned eps
    Real holder_growth_exponent = 0.0;  // fitted: seminorm ~ eps^{-exponent}
};

/// Sup-norm of u'_eps per eps (must stabilize: uniform Lipschitz) and the
/// C^{0,1/2} seminorm growth (expected ~ eps^{-1/2}: nothing above Lipschitz
/// is uniform).
LipschitzScan lipschitz_scan(const TransformedCoefficients& tc, const BVProblem& prob,
                             const std::vector<Real>& eps_list, const SolveOptions& opts = {});

struct SweepRow {
    Real eps = 0.0;
    ErrorRecord err;
    Real grad_sup = 0.0;
    Real holder_half = 0.0;
};

struct RateReport {
    std::vector<SweepRow> rows;
    RateFit l2, linf, h1_raw, h1_corrected;
    LipschitzScan lipschitz;
    Real a_bar = 0.0;
};

/// Full eps-sweep against the homogenized reference with a_bar supplied by
/// the caller (closed form or cell homogenization; never a surrogate).
RateReport rate_sweep(const TransformedCoefficients& tc, const BVProblem& prob, Real a_bar,
                      const SolveOptions& opts = {});

struct CounterexampleRow {
    Real eps = 0.0;
    Real closed_form_gap = 0.0;  // |u_eps - closed form|_inf
    Real sup_norm = 0.0;         // |u_eps|_inf
};

struct CounterexampleReport {
    std::vector<CounterexampleRow> rows;
    bool sup_bounded_by_eps = true;
    std::string note;
};

/// The fixed non-centered problem u'' + (1/eps) u' = 1 on (0,1) with zero
/// boundary data: numerical quadrature solve of the integrating-factor form
/// against the closed form eps (x - (1 - e^{-x/eps})/(1 - e^{-1/eps})).
/// The uniform limit u = 0 solves no uniformly elliptic problem with f = 1.
CounterexampleReport noncentered_counterexample(const std::vector<Real>& eps_list,
                                                const SolveOptions& opts = {});

/// Closed-form value of the counterexample solution.
Real counterexample_closed_form(Real eps, Real x);

}  // namespace perihom
