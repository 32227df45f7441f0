#include "perihom/fields.hpp"

#include <cmath>
#include <limits>

namespace perihom {

namespace {

/// Multiply spectrum in place by a per-mode factor computed from the signed
/// wavenumbers. Fn: (k0,k1,k2) -> std::complex<double>.
template <typename Fn>
ComplexArray apply_multiplier(const ScalarField& f, Fn&& factor) {
    const TorusGrid& g = f.grid();
    ComplexArray coeffs = f.spectrum();
    const std::int64_t N = g.node_count();
    for (std::int64_t idx = 0; idx < N; ++idx) {
        const auto bins = g.unflatten(idx);
        int k[3] = {0, 0, 0};
        bool nyquist[3] = {false, false, false};
        for (int a = 0; a < g.dim(); ++a) {
            k[a] = g.wavenumber(bins[a], a);
            nyquist[a] = (bins[a] == g.size(a) / 2);
        }
        coeffs[idx] *= factor(k, nyquist);
    }
    return coeffs;
}

ScalarField from_spectrum(const TorusGrid& g, const ComplexArray& coeffs) {
    ComplexArray vals = fft_inverse(g, coeffs);
    return ScalarField(g, vals.real());
}

}  // namespace

ScalarField partial_derivative(const ScalarField& f, int axis) {
    const TorusGrid& g = f.grid();
    if (axis < 0 || axis >= g.dim()) throw ConfigError("derivative axis out of range");
    ComplexArray coeffs = apply_multiplier(f, [&](const int k[3], const bool nyq[3]) {
        if (nyq[axis]) return std::complex<double>(0.0, 0.0);  // odd-derivative convention
        return std::complex<double>(0.0, kTwoPi * k[axis]);
    });
    return from_spectrum(g, coeffs);
}

ScalarField laplacian(const ScalarField& f) {
    const TorusGrid& g = f.grid();
    ComplexArray coeffs = apply_multiplier(f, [&](const int k[3], const bool nyq[3]) {
        double k2 = 0.0;
        for (int a = 0; a < g.dim(); ++a)
            if (!nyq[a]) k2 += static_cast<double>(k[a]) * k[a];
        return std::complex<double>(-kTwoPi * kTwoPi * k2, 0.0);
    });
    return from_spectrum(g, coeffs);
}

ScalarField solve_poisson_torus(const ScalarField& rhs, Real tol) {
    const Real m = mean(rhs);
    if (std::abs(m) > tol)
        throw NumericalError("torus Poisson problem needs mean-zero data: |mean(rhs)| = " +
                             std::to_string(std::abs(m)) + " exceeds tol " + std::to_string(tol));
    const TorusGrid& g = rhs.grid();
    ComplexArray coeffs = rhs.spectrum();
    const std::int64_t N = g.node_count();
    for (std::int64_t idx = 0; idx < N; ++idx) {
        const auto bins = g.unflatten(idx);
        double k2 = 0.0;
        for (int a = 0; a < g.dim(); ++a) {
            const int k = g.wavenumber(bins[a], a);
            k2 += static_cast<double>(k) * k;
        }
        if (k2 == 0.0)
            coeffs[idx] = 0.0;  // mean-zero gauge; projects out residual imbalance
        else
            coeffs[idx] /= -kTwoPi * kTwoPi * k2;
    }
    return from_spectrum(g, coeffs);
}

ScalarField divergence(const VectorField& v) {
    ScalarField d = partial_derivative(v.comp(0), 0);
    for (int a = 1; a < v.dim(); ++a) d = d + partial_derivative(v.comp(a), a);
    return d;
}

VectorField row_divergence(const MatrixField& m) {
    const int d = m.dim();
    std::vector<ScalarField> out;
    out.reserve(d);
    for (int j = 0; j < d; ++j) {
        ScalarField s = partial_derivative(m.comp(0, j), 0);
        for (int i = 1; i < d; ++i) s = s + partial_derivative(m.comp(i, j), i);
        out.push_back(std::move(s));
    }
    return VectorField(m.grid(), std::move(out));
}

ScalarField multiply(const ScalarField& a, const ScalarField& b) {
    if (a.grid() != b.grid()) throw ConfigError("field product on mismatched grids");
    return ScalarField(a.grid(), a.values() * b.values());
}

ScalarField project_out_nyquist(const ScalarField& f) {
    const TorusGrid& g = f.grid();
    ComplexArray coeffs = f.spectrum();
    const std::int64_t N = g.node_count();
    for (std::int64_t idx = 0; idx < N; ++idx) {
        const auto bins = g.unflatten(idx);
        for (int a = 0; a < g.dim(); ++a)
            if (bins[a] == g.size(a) / 2) {
                coeffs[idx] = 0.0;
                break;
            }
    }
    return from_spectrum(g, coeffs);
}

ScalarField upsample(const ScalarField& f, int factor) {
    const TorusGrid& g = f.grid();
    if (factor == 1) return f;
    std::array<int, 3> sizes{1, 1, 1};
    for (int a = 0; a < g.dim(); ++a) sizes[a] = g.size(a) * factor;
    TorusGrid fine(g.dim(), sizes);

    const ComplexArray& coeffs = f.spectrum();
    ComplexArray big = ComplexArray::Zero(fine.node_count());
    const std::int64_t N = g.node_count();
    for (std::int64_t idx = 0; idx < N; ++idx) {
        const auto bins = g.unflatten(idx);
        // a coarse Nyquist bin splits into +/- n/2 on the fine grid, half each
        int k[3] = {0, 0, 0};
        int nyq_axes = 0;
        for (int a = 0; a < g.dim(); ++a) {
            k[a] = g.wavenumber(bins[a], a);
            if (bins[a] == g.size(a) / 2) ++nyq_axes;
        }
        const double split = std::pow(0.5, nyq_axes);
        // enumerate the +/- choices for each Nyquist axis
        const int combos = 1 << nyq_axes;
        for (int c = 0; c < combos; ++c) {
            std::array<int, 3> kk{0, 0, 0};
            int bit = 0;
            for (int a = 0; a < g.dim(); ++a) {
                if (bins[a] == g.size(a) / 2) {
                    kk[a] = ((c >> bit) & 1) ? -k[a] : k[a];
                    ++bit;
                } else {
                    kk[a] = k[a];
                }
            }
            std::array<int, 3> fbin{0, 0, 0};
            for (int a = 0; a < g.dim(); ++a)
                fbin[a] = kk[a] >= 0 ? kk[a] : kk[a] + fine.size(a);
            big[fine.flat_index(fbin)] += split * coeffs[idx];
        }
    }
    return ScalarField(fine, fft_inverse(fine, big).real());
}

ScalarField truncate_to(const ScalarField& f, const TorusGrid& coarse) {
    const TorusGrid& fine = f.grid();
    if (fine.dim() != coarse.dim()) throw ConfigError("truncate_to: dimension mismatch");
    const ComplexArray& coeffs = f.spectrum();
    ComplexArray small = ComplexArray::Zero(coarse.node_count());
    const std::int64_t N = coarse.node_count();
    for (std::int64_t idx = 0; idx < N; ++idx) {
        const auto bins = coarse.unflatten(idx);
        int k[3] = {0, 0, 0};
        int nyq_axes = 0;
        for (int a = 0; a < coarse.dim(); ++a) {
            k[a] = coarse.wavenumber(bins[a], a);
            if (bins[a] == coarse.size(a) / 2) ++nyq_axes;
        }
        // gather both fine bins for each coarse Nyquist axis
        const int combos = 1 << nyq_axes;
        std::complex<double> acc = 0.0;
        for (int c = 0; c < combos; ++c) {
            std::array<int, 3> fbin{0, 0, 0};
            int bit = 0;
            bool ok = true;
            for (int a = 0; a < coarse.dim(); ++a) {
                int kk = k[a];
                if (bins[a] == coarse.size(a) / 2) {
                    kk = ((c >> bit) & 1) ? -k[a] : k[a];
                    ++bit;
                }
                if (std::abs(kk) > fine.size(a) / 2) {
                    ok = false;
                    break;
                }
                fbin[a] = kk >= 0 ? kk : kk + fine.size(a);
            }
            if (ok) acc += coeffs[fine.flat_index(fbin)];
        }
        small[idx] = acc;
    }
    return ScalarField(coarse, fft_inverse(coarse, small).real());
}

ScalarField multiply_dealiased(const ScalarField& a, const ScalarField& b) {
    if (a.grid() != b.grid()) throw ConfigError("field product on mismatched grids");
    ScalarField fa = upsample(a, 2);
    ScalarField fb = upsample(b, 2);
    ScalarField prod(fa.grid(), fa.values() * fb.values());
    return truncate_to(prod, a.grid());
}

Real mean_product(const ScalarField& a, const ScalarField& b) {
    if (a.grid() != b.grid()) throw ConfigError("mean_product on mismatched grids");
    ScalarField fa = upsample(a, 2);
    ScalarField fb = upsample(b, 2);
    return (fa.values() * fb.values()).mean();
}

MatrixField pointwise_matrix_sqrt(const MatrixField& a, Real lambda) {
    if (a.symmetry() != MatrixSymmetry::Symmetric)
        throw ConfigError("pointwise_matrix_sqrt needs the symmetric flag");
    if (lambda <= 0.0) throw ConfigError("pointwise_matrix_sqrt needs lambda > 0");
    const TorusGrid& g = a.grid();
    const int d = g.dim();
    const std::int64_t N = g.node_count();
    std::vector<RealArray> out(d * d, RealArray::Zero(N));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    for (std::int64_t idx = 0; idx < N; ++idx) {
        Eigen::MatrixXd m = a.at(idx);
        es.compute(m);
        if (es.eigenvalues().minCoeff() < lambda) {
            const auto k = g.unflatten(idx);
            std::string node = "(" + std::to_string(k[0]);
            for (int ax = 1; ax < d; ++ax) node += "," + std::to_string(k[ax]);
            node += ")";
            throw NumericalError("ellipticity violation: eigenvalue " +
                                 std::to_string(es.eigenvalues().minCoeff()) + " < " +
                                 std::to_string(lambda) + " at node " + node);
        }
        Eigen::MatrixXd s = es.eigenvectors() *
                            es.eigenvalues().array().sqrt().matrix().asDiagonal() *
                            es.eigenvectors().transpose();
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) out[i * d + j][idx] = 0.5 * (s(i, j) + s(j, i));
    }
    std::vector<ScalarField> comps;
    comps.reserve(d * d);
    for (auto& v : out) comps.emplace_back(g, std::move(v));
    return MatrixField(g, std::move(comps), MatrixSymmetry::Symmetric);
}

Real min_eigenvalue(const MatrixField& a) {
    const std::int64_t N = a.grid().node_count();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    Real lo = std::numeric_limits<Real>::infinity();
    for (std::int64_t idx = 0; idx < N; ++idx) {
        es.compute(a.at(idx), Eigen::EigenvaluesOnly);
        lo = std::min(lo, es.eigenvalues().minCoeff());
    }
    return lo;
}

Real max_eigenvalue(const MatrixField& a) {
    const std::int64_t N = a.grid().node_count();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    Real hi = -std::numeric_limits<Real>::infinity();
    for (std::int64_t idx = 0; idx < N; ++idx) {
        es.compute(a.at(idx), Eigen::EigenvaluesOnly);
        hi = std::max(hi, es.eigenvalues().maxCoeff());
    }
    return hi;
}

}  // namespace perihom
