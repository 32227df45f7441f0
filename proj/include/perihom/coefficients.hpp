/// @file coefficients.hpp
/// @brief The validated coefficient pair (a~, b~) with certified ellipticity
/// and boundedness constants.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "perihom/expression.hpp"
#include "perihom/fields.hpp"

namespace perihom {

/// Diffusion matrix a~ (symmetric, uniformly elliptic) and drift b~ on one
/// grid. lambda is the certified smallest pointwise eigenvalue of a~;
/// Lambda bounds |a~|_inf, |div a~|_inf and |b~|_inf.
struct CoefficientSet {
    MatrixField a_tilde;
    VectorField b_tilde;
    Real lambda = 0.0;
    Real Lambda = 0.0;

    int dim() const { return a_tilde.dim(); }
    const TorusGrid& grid() const { return a_tilde.grid(); }
};

/// Certify constants and invariants for a coefficient pair. Throws
/// NumericalError if the pointwise ellipticity fails.
CoefficientSet make_coefficient_set(MatrixField a_tilde, VectorField b_tilde);

/// Sample expression matrices/vectors onto a grid and certify.
CoefficientSet sample_coefficients(const std::vector<std::vector<Expression>>& a_exprs,
                                   const std::vector<Expression>& b_exprs,
                                   const TorusGrid& grid);

}  // namespace perihom
