/// @file invariant_measure.hpp
/// @brief The periodic invariant measure m of the diffusion with generator
/// -a~ dd - b~ d: solve the double-divergence equation in its divergence
/// form, certify positivity and residual, and evaluate the centering defect.
#pragma once

#include <Eigen/Dense>

#include "perihom/coefficients.hpp"
#include "perihom/fields.hpp"

namespace perihom {

struct InvariantMeasureOptions {
    Real tol = 1e-10;       // residual tolerance (normalized, see below)
    int max_iter = 500;
    int max_dense_n = 4096;  // dense direct fallback cap
};

/// Classification thresholds for the centering defect |int b~_j m|.
struct CenteringPolicy {
    Real centered_tol = 1e-8;  // at or below: centered
    Real warn_tol = 1e-4;      // in (centered_tol, warn_tol]: warn; above: non-centered
};

enum class CenteringStatus { Centered, Marginal, NonCentered };

struct InvariantMeasure {
    ScalarField m;
    /// |L m|_inf / (4 pi^2 max(Lambda,1)): the defect of the divergence-form
    /// equation normalized by the operator scale.
    Real residual = 0.0;
    Real residual_raw = 0.0;  // |L m|_inf, unnormalized
    Real min_value = 0.0;
    Real max_value = 0.0;
    Eigen::VectorXd centering_defect;
    int iterations = 0;
    std::string solver;

    Real oscillation() const { return max_value - min_value; }
};

/// Solve -d_i(a~_ij d_j m - beta~_i m) = 0, mean(m) = 1, with
/// beta~ = b~ - div a~. The one-dimensional null space is fixed by a
/// rank-one normalization term, which realizes the augmented system
/// [L; mean-row] in square form. Throws ResolutionError when no solver
/// reaches the tolerance and NumericalError when the computed density is
/// not positive (both signal under-resolution).
InvariantMeasure solve_invariant_measure(const CoefficientSet& coeffs,
                                         const InvariantMeasureOptions& opts = {});

/// c_j = mean(b~_j m), j = 1..d (dealiased product).
Eigen::VectorXd centering_defect(const CoefficientSet& coeffs, const ScalarField& m);

CenteringStatus classify_centering(const Eigen::VectorXd& defect,
                                   const CenteringPolicy& policy = {});

/// d = 1 closed form by quadrature: m = (1/a~) [C0 E(y) + C1 E(y) J(y)] with
/// E(y) = exp(int_0^y b~/a~) and J(y) = int_0^y 1/E, the constants fixed by
/// periodicity of a~ m and mean(m) = 1. The centered branch is exactly
/// C1 = 0, which happens iff int_0^1 b~/a~ = 0.
ScalarField invariant_measure_1d_closed_form(const CoefficientSet& coeffs);

}  // namespace perihom
