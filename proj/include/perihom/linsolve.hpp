/// @file linsolve.hpp
/// @brief Matrix-free linear solvers for the spectral collocation operators:
/// preconditioned Richardson fixed-point, preconditioned BiCGSTAB, and a
/// dense fallback assembled column-by-column from the operator.
#pragma once

#include <functional>
#include <string>

#include <Eigen/Dense>

#include "perihom/common.hpp"

namespace perihom {

using ApplyFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct SolveResult {
    Eigen::VectorXd x;
    Real rel_residual = 0.0;  // |Ax-b| / |b| (2-norm)
    int iterations = 0;
    bool converged = false;
    std::string method;
};

/// x_{k+1} = x_k + M^{-1}(b - A x_k); geometric for M ~ A.
SolveResult richardson(const ApplyFn& op, const ApplyFn& precond, const Eigen::VectorXd& rhs,
                       Real tol, int max_iter);

/// Standard preconditioned BiCGSTAB (deterministic, no randomized restarts).
SolveResult bicgstab(const ApplyFn& op, const ApplyFn& precond, const Eigen::VectorXd& rhs,
                     Real tol, int max_iter);

/// Assemble the dense matrix by applying op to unit vectors, then LU-solve.
/// Guarded by `max_dense_n`; larger systems throw ResolutionError.
SolveResult dense_direct(const ApplyFn& op, const Eigen::VectorXd& rhs, int max_dense_n = 4096);

/// Cascade used by the field solvers: Richardson, then BiCGSTAB on
/// stagnation, then the dense direct fallback when the problem is small
/// enough. Throws ResolutionError when nothing converges.
SolveResult solve_cascade(const ApplyFn& op, const ApplyFn& precond, const Eigen::VectorXd& rhs,
                          Real tol, int max_iter, int max_dense_n = 4096);

}  // namespace perihom
