/// @file rect2d.hpp
/// @brief EXPERIMENTAL second-order conservative finite-difference solver for
/// -div(q(x/eps) grad u) = f m(x/eps) on an axis-aligned rectangle with
/// Dirichlet data. A rectangle is not C^{1,1}, so only the L2/H1-type
/// conclusions survive on it; every report from this module is flagged
/// experimental and carries only the L2 comparison.
#pragma once

#include <vector>

#include <Eigen/Dense>

#include "perihom/bvp1d.hpp"
#include "perihom/drift_transform.hpp"

namespace perihom {

struct Domain2D {
    Real x0 = 0.0, x1 = 1.0;
    Real y0 = 0.0, y1 = 1.0;
};

struct Rect2DProblem {
    Domain2D domain;
    Expression f;  // right-hand side in x1, x2 (empty = 0)
    Expression g;  // Dirichlet data in x1, x2 (empty = 0)
    std::vector<Real> eps_list;
};

struct Rect2DSolution {
    int nx = 0, ny = 0;  // intervals per axis
    Real hx = 0.0, hy = 0.0;
    Eigen::ArrayXd values;  // (nx+1)*(ny+1), row-major in x then y
};

struct Rect2DOptions {
    int mesh_per_period = 32;
    int min_intervals = 256;
    std::int64_t max_unknowns = std::int64_t(2048) * 2048;
    Real solver_tol = 1e-11;
};

/// One eps-solve; eps = 1 reproduces the unscaled coefficients exactly.
Rect2DSolution solve_eps_rect2d(const TransformedCoefficients& tc, const Rect2DProblem& prob,
                                Real eps, const Rect2DOptions& opts = {});

/// Constant-coefficient reference with the analytic homogenized tensor.
Rect2DSolution solve_homogenized_rect2d(const Eigen::Matrix2d& a_bar, const Rect2DProblem& prob,
                                        int nx, int ny, const Rect2DOptions& opts = {});

/// Discrete L2 distance between two solutions on the same grid.
Real l2_distance(const Rect2DSolution& a, const Rect2DSolution& b, const Domain2D& dom);

struct Rect2DSweepRow {
    Real eps = 0.0;
    int grid = 0;
    Real l2 = 0.0;
};

struct Rect2DReport {
    std::vector<Rect2DSweepRow> rows;
    RateFit l2_fit;
    bool experimental = true;
};

/// eps-sweep of the L2 error against the a_bar reference on each grid.
Rect2DReport rect2d_sweep(const TransformedCoefficients& tc, const Rect2DProblem& prob,
                          const Eigen::Matrix2d& a_bar, const Rect2DOptions& opts = {});

}  // namespace perihom
