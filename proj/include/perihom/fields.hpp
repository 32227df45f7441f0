/// @file fields.hpp
/// @brief Periodic scalar/vector/matrix fields on a TorusGrid with spectral
/// calculus: means, Fourier-multiplier derivatives, torus Poisson solves,
/// dealiased products, and the pointwise symmetric matrix square root.
///
/// Fields are immutable after construction; the Fourier cache is populated
/// at most once under a mutex, so all operations are safe to call
/// concurrently on shared fields.
#pragma once

#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "perihom/fft.hpp"
#include "perihom/torus_grid.hpp"

namespace perihom {

using RealArray = Eigen::ArrayXd;

class ScalarField {
public:
    ScalarField(TorusGrid grid, RealArray values)
        : grid_(grid), values_(std::move(values)), cache_(std::make_shared<SpectrumCache>()) {
        if (values_.size() != grid_.node_count())
            throw ConfigError("field value count does not match grid " + grid_.describe());
    }

    static ScalarField zero(const TorusGrid& grid) {
        return ScalarField(grid, RealArray::Zero(grid.node_count()));
    }
    static ScalarField constant(const TorusGrid& grid, Real c) {
        return ScalarField(grid, RealArray::Constant(grid.node_count(), c));
    }

    const TorusGrid& grid() const { return grid_; }
    const RealArray& values() const { return values_; }
    Real operator[](std::int64_t i) const { return values_[i]; }
    std::int64_t size() const { return values_.size(); }

    /// Fourier coefficients of the trigonometric interpolant (lazy, cached).
    const ComplexArray& spectrum() const {
        std::call_once(cache_->flag, [this] {
            cache_->coeffs = fft_forward(grid_, values_.cast<std::complex<double>>());
        });
        return cache_->coeffs;
    }

private:
    struct SpectrumCache {
        std::once_flag flag;
        ComplexArray coeffs;
    };

    TorusGrid grid_;
    RealArray values_;
    std::shared_ptr<SpectrumCache> cache_;
};

/// d component fields on a shared grid.
class VectorField {
public:
    VectorField(TorusGrid grid, std::vector<ScalarField> comps)
        : grid_(grid), comps_(std::move(comps)) {
        if (static_cast<int>(comps_.size()) != grid_.dim())
            throw ConfigError("vector field needs one component per axis");
        for (const auto& c : comps_)
            if (c.grid() != grid_) throw ConfigError("vector field components on mismatched grids");
    }

    static VectorField zero(const TorusGrid& grid) {
        std::vector<ScalarField> c(grid.dim(), ScalarField::zero(grid));
        return VectorField(grid, std::move(c));
    }

    const TorusGrid& grid() const { return grid_; }
    const ScalarField& comp(int j) const { return comps_[j]; }
    int dim() const { return grid_.dim(); }

private:
    TorusGrid grid_;
    std::vector<ScalarField> comps_;
};

enum class MatrixSymmetry { None, Symmetric, Antisymmetric };

/// d x d component fields on a shared grid. The symmetry flag is a storage
/// contract: Symmetric stores and returns identical (i,j)/(j,i) components,
/// Antisymmetric returns exact negations.
class MatrixField {
public:
    MatrixField(TorusGrid grid, std::vector<ScalarField> comps,
                MatrixSymmetry sym = MatrixSymmetry::None)
        : grid_(grid), comps_(std::move(comps)), sym_(sym) {
        const int d = grid_.dim();
        if (static_cast<int>(comps_.size()) != d * d)
            throw ConfigError("matrix field needs d*d components");
        for (const auto& c : comps_)
            if (c.grid() != grid_) throw ConfigError("matrix field components on mismatched grids");
        if (sym_ == MatrixSymmetry::Symmetric) {
            // upper triangle is authoritative
            for (int i = 0; i < d; ++i)
                for (int j = i + 1; j < d; ++j) comps_[j * d + i] = comps_[i * d + j];
        } else if (sym_ == MatrixSymmetry::Antisymmetric) {
            for (int i = 0; i < d; ++i) {
                comps_[i * d + i] = ScalarField::zero(grid_);
                for (int j = i + 1; j < d; ++j)
                    comps_[j * d + i] = ScalarField(grid_, -comps_[i * d + j].values());
            }
        }
    }

    static MatrixField identity(const TorusGrid& grid) {
        const int d = grid.dim();
        std::vector<ScalarField> c;
        c.reserve(d * d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                c.push_back(i == j ? ScalarField::constant(grid, 1.0) : ScalarField::zero(grid));
        return MatrixField(grid, std::move(c), MatrixSymmetry::Symmetric);
    }

    const TorusGrid& grid() const { return grid_; }
    int dim() const { return grid_.dim(); }
    MatrixSymmetry symmetry() const { return sym_; }
    const ScalarField& comp(int i, int j) const { return comps_[i * grid_.dim() + j]; }

    /// Dense matrix at one node.
    Eigen::MatrixXd at(std::int64_t idx) const {
        const int d = grid_.dim();
        Eigen::MatrixXd m(d, d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) m(i, j) = comps_[i * d + j][idx];
        return m;
    }

private:
    TorusGrid grid_;
    std::vector<ScalarField> comps_;
    MatrixSymmetry sym_;
};

// ---------------------------------------------------------------------------
// Spectral calculus (free functions)
// ---------------------------------------------------------------------------

/// Arithmetic node average == spectrally exact torus integral for
/// band-limited integrands.
inline Real mean(const ScalarField& f) { return f.values().mean(); }

/// Fourier-multiplier partial derivative along `axis` (1-based per the public
/// API elsewhere; this core helper is 0-based). The Nyquist mode is zeroed.
ScalarField partial_derivative(const ScalarField& f, int axis);

/// Laplacian via Fourier multipliers (-4 pi^2 |k|^2, Nyquist axes included).
ScalarField laplacian(const ScalarField& f);

/// Solve Delta h = rhs on the torus with mean(h) = 0.
/// Rejects |mean(rhs)| > tol: the torus Poisson problem is only solvable for
/// mean-zero data. The mean is projected out of the right-hand side before
/// inversion so roundoff-level imbalance does not leak into mode zero.
ScalarField solve_poisson_torus(const ScalarField& rhs, Real tol = 1e-10);

/// Divergence of a vector field.
ScalarField divergence(const VectorField& v);

/// Row divergence of a matrix field: out_j = sum_i d_i M_ij.
VectorField row_divergence(const MatrixField& m);

/// Plain collocation product (value-space, same grid).
ScalarField multiply(const ScalarField& a, const ScalarField& b);

/// Product formed on a 2x-refined grid and truncated back, which removes the
/// aliasing a collocation product would fold into the retained modes.
ScalarField multiply_dealiased(const ScalarField& a, const ScalarField& b);

/// Spectrally exact mean of a product (via the dealiased product).
Real mean_product(const ScalarField& a, const ScalarField& b);

/// Zero every Fourier coefficient with a Nyquist component on any axis.
/// Smooth resolved fields carry only roundoff there, but derivative
/// compositions annihilate that plane, so elliptic solves restrict to its
/// complement to keep their discrete kernels one-dimensional.
ScalarField project_out_nyquist(const ScalarField& f);

/// Resample the trigonometric interpolant on a grid with `factor`-times the
/// modes per axis (zero padding with Nyquist splitting).
ScalarField upsample(const ScalarField& f, int factor);

/// Truncate a field on a refined grid back to `coarse` (inverse of upsample).
ScalarField truncate_to(const ScalarField& f, const TorusGrid& coarse);

/// Pointwise symmetric positive-definite square root via eigendecomposition.
/// Throws NumericalError naming the offending node if any pointwise
/// eigenvalue falls below `lambda`.
MatrixField pointwise_matrix_sqrt(const MatrixField& a, Real lambda);

/// Smallest pointwise eigenvalue of a symmetric matrix field over all nodes.
Real min_eigenvalue(const MatrixField& a);
/// Largest pointwise eigenvalue of a symmetric matrix field over all nodes.
Real max_eigenvalue(const MatrixField& a);

inline ScalarField operator+(const ScalarField& a, const ScalarField& b) {
    if (a.grid() != b.grid()) throw ConfigError("field sum on mismatched grids");
    return ScalarField(a.grid(), a.values() + b.values());
}
inline ScalarField operator-(const ScalarField& a, const ScalarField& b) {
    if (a.grid() != b.grid()) throw ConfigError("field difference on mismatched grids");
    return ScalarField(a.grid(), a.values() - b.values());
}
inline ScalarField operator*(Real c, const ScalarField& f) {
    return ScalarField(f.grid(), c * f.values());
}

}  // namespace perihom
