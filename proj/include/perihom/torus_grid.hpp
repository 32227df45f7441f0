/// @file torus_grid.hpp
/// @brief Uniform grid on the flat torus T^d = R^d / Z^d, d in {1,2,3}.
#pragma once

#include <array>
#include <string>

#include "perihom/common.hpp"

namespace perihom {

/// Uniform collocation grid with per-axis even sizes n_i >= 8.
/// Node coordinates along axis a are k / n_a, k = 0..n_a-1; storage is
/// row-major (last axis fastest).
class TorusGrid {
public:
    TorusGrid(int dim, std::array<int, 3> sizes) : dim_(dim), n_(sizes) {
        if (dim < 1 || dim > 3) throw ConfigError("grid dimension must be 1, 2, or 3");
        for (int a = 0; a < dim; ++a) {
            if (n_[a] < 8 || n_[a] % 2 != 0)
                throw ConfigError("grid size along axis " + std::to_string(a + 1) +
                                  " must be even and >= 8, got " + std::to_string(n_[a]));
        }
        for (int a = dim; a < 3; ++a) n_[a] = 1;
        total_ = 1;
        for (int a = 0; a < dim; ++a) total_ *= static_cast<std::int64_t>(n_[a]);
    }

    static TorusGrid line(int n) { return TorusGrid(1, {n, 1, 1}); }
    static TorusGrid square(int n) { return TorusGrid(2, {n, n, 1}); }
    static TorusGrid cube(int n) { return TorusGrid(3, {n, n, n}); }

    int dim() const { return dim_; }
    int size(int axis) const { return n_[axis]; }
    std::int64_t node_count() const { return total_; }

    /// Flat row-major index of the node with per-axis indices k[0..dim).
    std::int64_t flat_index(const std::array<int, 3>& k) const {
        std::int64_t idx = 0;
        for (int a = 0; a < dim_; ++a) idx = idx * n_[a] + k[a];
        return idx;
    }

    /// Per-axis indices of a flat row-major index.
    std::array<int, 3> unflatten(std::int64_t idx) const {
        std::array<int, 3> k{0, 0, 0};
        for (int a = dim_ - 1; a >= 0; --a) {
            k[a] = static_cast<int>(idx % n_[a]);
            idx /= n_[a];
        }
        return k;
    }

    /// Coordinate of node k along axis a, in [0,1).
    Real coord(int k, int axis) const { return static_cast<Real>(k) / n_[axis]; }

    /// Signed integer wavenumber for FFT bin j along axis a
    /// (j <= n/2 maps to j, else j - n; j == n/2 is the Nyquist bin).
    int wavenumber(int j, int axis) const {
        const int n = n_[axis];
        return (j <= n / 2) ? j : j - n;
    }

    bool operator==(const TorusGrid& o) const { return dim_ == o.dim_ && n_ == o.n_; }
    bool operator!=(const TorusGrid& o) const { return !(*this == o); }

    std::string describe() const {
        std::string s = std::to_string(n_[0]);
        for (int a = 1; a < dim_; ++a) s += "x" + std::to_string(n_[a]);
        return s;
    }

private:
    int dim_;
    std::array<int, 3> n_;
    std::int64_t total_;
};

}  // namespace perihom
