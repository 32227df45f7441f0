/// @file fft.hpp
/// @brief Multi-dimensional DFT on row-major torus arrays, built from the 1D
/// transforms in Eigen's FFT module.
///
/// Convention: forward() produces Fourier coefficients of the trigonometric
/// interpolant, i.e. c_k = (1/N) sum_x v(x) e^{-2 pi i k.x}, so that
/// v(x) = sum_k c_k e^{+2 pi i k.x} holds exactly on the grid.
#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include "perihom/torus_grid.hpp"

namespace perihom {

using ComplexArray = Eigen::ArrayXcd;

namespace detail {

/// Apply an in-place 1D transform along `axis` of a row-major dim-d array.
template <typename Transform>
void transform_axis(ComplexArray& data, const TorusGrid& grid, int axis, Transform&& tf) {
    const int n = grid.size(axis);
    // stride between consecutive entries along `axis`, and number of lines
    std::int64_t stride = 1;
    for (int a = axis + 1; a < grid.dim(); ++a) stride *= grid.size(a);
    const std::int64_t lines = grid.node_count() / n;

    std::vector<std::complex<double>> line(n), out(n);
    for (std::int64_t l = 0; l < lines; ++l) {
        // base index of this line: split l into (outer, inner) blocks
        const std::int64_t inner = l % stride;
        const std::int64_t outer = l / stride;
        const std::int64_t base = outer * stride * n + inner;
        for (int j = 0; j < n; ++j) line[j] = data[base + j * stride];
        tf(line, out);
        for (int j = 0; j < n; ++j) data[base + j * stride] = out[j];
    }
}

}  // namespace detail

/// values -> Fourier coefficients (normalized by 1/N).
inline ComplexArray fft_forward(const TorusGrid& grid, const ComplexArray& values) {
    ComplexArray data = values;
    Eigen::FFT<double> fft;
    for (int a = 0; a < grid.dim(); ++a) {
        detail::transform_axis(data, grid, a,
                               [&](std::vector<std::complex<double>>& in,
                                   std::vector<std::complex<double>>& out) { fft.fwd(out, in); });
    }
    data /= static_cast<double>(grid.node_count());
    return data;
}

/// Fourier coefficients -> values (unnormalized inverse).
inline ComplexArray fft_inverse(const TorusGrid& grid, const ComplexArray& coeffs) {
    // inv(x) = conj(fwd(conj(x))) without the 1/N factor
    ComplexArray data = coeffs.conjugate();
    Eigen::FFT<double> fft;
    for (int a = 0; a < grid.dim(); ++a) {
        detail::transform_axis(data, grid, a,
                               [&](std::vector<std::complex<double>>& in,
                                   std::vector<std::complex<double>>& out) { fft.fwd(out, in); });
    }
    return data.conjugate();
}

}  // namespace perihom
