#include "perihom/coefficients.hpp"

#include <cmath>

namespace perihom {

CoefficientSet make_coefficient_set(MatrixField a_tilde, VectorField b_tilde) {
    if (a_tilde.grid() != b_tilde.grid())
        throw ConfigError("a~ and b~ must live on the same grid");
    if (a_tilde.symmetry() != MatrixSymmetry::Symmetric)
        throw ConfigError("a~ must carry the symmetric flag");

    const int d = a_tilde.dim();
    const Real lambda = min_eigenvalue(a_tilde);
    if (lambda <= 0.0)
        throw NumericalError("a~ is not uniformly elliptic: smallest pointwise eigenvalue " +
                             std::to_string(lambda));

    Real sup = 0.0;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            sup = std::max(sup, a_tilde.comp(i, j).values().abs().maxCoeff());
    const VectorField div_a = row_divergence(a_tilde);
    for (int j = 0; j < d; ++j) sup = std::max(sup, div_a.comp(j).values().abs().maxCoeff());
    for (int j = 0; j < d; ++j) sup = std::max(sup, b_tilde.comp(j).values().abs().maxCoeff());

    CoefficientSet cs{std::move(a_tilde), std::move(b_tilde), lambda, sup};
    return cs;
}

CoefficientSet sample_coefficients(const std::vector<std::vector<Expression>>& a_exprs,
                                   const std::vector<Expression>& b_exprs,
                                   const TorusGrid& grid) {
    const int d = grid.dim();
    if (static_cast<int>(a_exprs.size()) != d)
        throw ConfigError("a~ expression matrix must be " + std::to_string(d) + "x" +
                          std::to_string(d));
    for (const auto& row : a_exprs)
        if (static_cast<int>(row.size()) != d)
            throw ConfigError("a~ expression matrix must be square");
    if (static_cast<int>(b_exprs.size()) != d)
        throw ConfigError("b~ needs " + std::to_string(d) + " component expressions");

    std::vector<ScalarField> a_comps;
    a_comps.reserve(d * d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) a_comps.push_back(sample_scalar(a_exprs[i][j], grid));
    std::vector<ScalarField> b_comps;
    b_comps.reserve(d);
    for (int j = 0; j < d; ++j) b_comps.push_back(sample_scalar(b_exprs[j], grid));

    return make_coefficient_set(MatrixField(grid, std::move(a_comps), MatrixSymmetry::Symmetric),
                                VectorField(grid, std::move(b_comps)));
}

}  // namespace perihom
