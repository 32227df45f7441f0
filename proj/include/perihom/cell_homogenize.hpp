/// @file cell_homogenize.hpp
/// @brief Cell problems in divergence form (with q) and non-divergence form
/// (with a~, b~), the identification chi~ = chi, and the homogenized tensors
/// q_bar and a_bar with an ellipticity certificate.
#pragma once

#include <Eigen/Dense>

#include "perihom/drift_transform.hpp"

namespace perihom {

struct CellOptions {
    Real tol = 1e-10;   // normalized residual tolerance
    int max_iter = 500;
    int max_dense_n = 4096;
};

struct CellSolution {
    std::vector<ScalarField> chi;         // divergence-form correctors
    std::vector<ScalarField> chi_nondiv;  // non-divergence-form correctors
    Eigen::VectorXd residual_div;         // per problem, normalized inf-norm
    Eigen::VectorXd residual_nondiv;
    std::string solver_div, solver_nondiv;

    /// max_j |chi~^j - chi^j|_inf, the discrete form of the identification.
    Real identification_gap() const {
        Real g = 0.0;
        for (std::size_t j = 0; j < chi.size(); ++j)
            g = std::max(g, (chi[j].values() - chi_nondiv[j].values()).abs().maxCoeff());
        return g;
    }
};

struct HomogenizedTensor {
    Eigen::MatrixXd q_bar;         // int (I + grad chi) q (I + grad chi)^T
    Eigen::MatrixXd a_bar;         // symmetrization of q_bar
    Eigen::MatrixXd a_bar_direct;  // int (I + grad chi~) a~ (I + grad chi~)^T m
    Real lambda1_check = 0.0;      // smallest eigenvalue of a_bar
    Real cross_formula_gap = 0.0;  // max entrywise |a_bar - a_bar_direct|
};

/// -d_i(q_ik (d_k chi^j + delta_kj)) = 0, mean(chi^j) = 0.
ScalarField solve_cell_divergence(const MatrixField& q, int j, const CellOptions& opts = {});

/// -a~_ik d_i d_k chi~^j - b~_i d_i chi~^j = b~_j, mean(chi~^j) = 0.
ScalarField solve_cell_nondivergence(const CoefficientSet& coeffs, int j,
                                     const CellOptions& opts = {});

/// Solve all 2d cell problems for a transformed coefficient set.
CellSolution solve_cells(const TransformedCoefficients& tc, const CoefficientSet& coeffs,
                         const CellOptions& opts = {});

/// Assemble q_bar from (q, chi), a_bar as its symmetrization, evaluate the
/// direct formula from (a~, chi~, m), and certify entrywise agreement at
/// `cross_tol` (ConsistencyError beyond it). Products are formed on a
/// 2x-refined grid so the means carry no aliasing.
HomogenizedTensor homogenized_tensor(const MatrixField& q, const MatrixField& a_tilde,
                                     const ScalarField& m, const CellSolution& cell,
                                     Real cross_tol = 1e-8);

/// Convenience pipeline: cells plus tensor.
struct HomogenizationResult {
    CellSolution cells;
    HomogenizedTensor tensor;
};
HomogenizationResult homogenize(const TransformedCoefficients& tc, const CoefficientSet& coeffs,
                                const CellOptions& opts = {});

}  // namespace perihom
