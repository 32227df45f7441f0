/// @file trig_interp.hpp
/// @brief Evaluate the trigonometric interpolant of a sampled torus field at
/// arbitrary points. Modes below a relative threshold are dropped, so DSL
/// trig polynomials evaluate exactly through their few true modes, and the
/// hot path stays cheap enough for SDE stepping.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "perihom/fields.hpp"

namespace perihom {

namespace fastmath {

inline constexpr int kSinCosTableBits = 12;
inline constexpr int kSinCosTableSize = 1 << kSinCosTableBits;

struct SinCosTable {
    std::array<double, kSinCosTableSize> c{}, s{};
    SinCosTable() {
        for (int j = 0; j < kSinCosTableSize; ++j) {
            const double a = kTwoPi * j / kSinCosTableSize;
            c[j] = std::cos(a);
            s[j] = std::sin(a);
        }
    }
};

/// cos(2 pi t) and sin(2 pi t) via table plus series correction,
/// accurate to ~1e-15 for any finite t.
inline void sincos_turn(double t, double& cos_out, double& sin_out) {
    static const SinCosTable table;
    double u = t - std::floor(t);
    if (u >= 1.0) u = 0.0;  // guards the t = -tiny case where floor rounds
    const double scaled = u * kSinCosTableSize;
    int j = static_cast<int>(scaled);
    if (j >= kSinCosTableSize) j = kSinCosTableSize - 1;
    const double phi = (scaled - j) * (kTwoPi / kSinCosTableSize);
    const double phi2 = phi * phi;
    const double cp = 1.0 - 0.5 * phi2 + (1.0 / 24.0) * phi2 * phi2;
    const double sp = phi * (1.0 - (1.0 / 6.0) * phi2);
    const double cb = table.c[j], sb = table.s[j];
    cos_out = cb * cp - sb * sp;
    sin_out = sb * cp + cb * sp;
}

}  // namespace fastmath

/// One retained Fourier mode in real form: A cos(2 pi k.y) + B sin(2 pi k.y).
struct TrigMode {
    std::array<int, 3> k{0, 0, 0};
    double cos_amp = 0.0;
    double sin_amp = 0.0;
};

class TrigInterpolant {
public:
    TrigInterpolant() = default;

    explicit TrigInterpolant(const ScalarField& f, double rel_threshold = 1e-13)
        : dim_(f.grid().dim()) {
        const TorusGrid& g = f.grid();
        const ComplexArray& coeffs = f.spectrum();
        const std::int64_t N = g.node_count();

        double max_mag = 0.0;
        for (std::int64_t i = 0; i < N; ++i) max_mag = std::max(max_mag, std::abs(coeffs[i]));
        const double cut = rel_threshold * max_mag;

        for (std::int64_t idx = 0; idx < N; ++idx) {
            const auto bins = g.unflatten(idx);
            std::array<int, 3> k{0, 0, 0};
            // negating a bin index fixes 0 and Nyquist components, so a bin is
            // its own conjugate partner iff every component is 0 or Nyquist
            bool self_paired = true;
            int lead = 0;  // first component that is neither 0 nor Nyquist
            for (int a = 0; a < dim_; ++a) {
                k[a] = g.wavenumber(bins[a], a);
                if (bins[a] != 0 && bins[a] != g.size(a) / 2) {
                    self_paired = false;
                    if (lead == 0) lead = k[a];
                }
            }
            if (std::abs(coeffs[idx]) <= cut) continue;
            if (k[0] == 0 && k[1] == 0 && k[2] == 0) {
                dc_ = coeffs[idx].real();
                continue;
            }
            // keep one representative per conjugate pair
            if (!self_paired && lead < 0) continue;
            TrigMode m;
            m.k = k;
            if (self_paired) {
                // Nyquist-only bin: the symmetric interpolant keeps the cosine
                m.cos_amp = coeffs[idx].real();
                m.sin_amp = 0.0;
            } else {
                m.cos_amp = 2.0 * coeffs[idx].real();
                m.sin_amp = -2.0 * coeffs[idx].imag();
            }
            modes_.push_back(m);
            for (int a = 0; a < dim_; ++a) kmax_[a] = std::max(kmax_[a], std::abs(k[a]));
        }
        for (int a = 0; a < dim_; ++a)
            if (kmax_[a] > kMaxHarmonic)
                throw ConfigError("trig interpolant harmonic ladder capped at " +
                                  std::to_string(kMaxHarmonic) + " per axis");
        if (dim_ == 1)
            std::sort(modes_.begin(), modes_.end(),
                      [](const TrigMode& a, const TrigMode& b) { return a.k[0] < b.k[0]; });
    }

    bool is_constant() const { return modes_.empty(); }
    double constant_value() const { return dc_; }
    int mode_count() const { return static_cast<int>(modes_.size()); }

    double eval(const double* y) const {
        if (modes_.empty()) return dc_;

        // per-axis harmonic ladders cos/sin(2 pi k y_a), k = 0..kmax
        double c[3][kMaxHarmonic + 1], s[3][kMaxHarmonic + 1];
        for (int a = 0; a < dim_; ++a) {
            const int K = kmax_[a];
            c[a][0] = 1.0;
            s[a][0] = 0.0;
            if (K == 0) continue;
            double c1, s1;
            fastmath::sincos_turn(y[a], c1, s1);
            c[a][1] = c1;
            s[a][1] = s1;
            for (int k = 1; k < K; ++k) {
                c[a][k + 1] = c[a][k] * c1 - s[a][k] * s1;
                s[a][k + 1] = s[a][k] * c1 + c[a][k] * s1;
            }
        }

        double acc = dc_;
        for (const TrigMode& m : modes_) {
            // combine axes by angle addition; negative k flips the sine
            double ck = c[0][std::abs(m.k[0])];
            double sk = (m.k[0] >= 0) ? s[0][m.k[0]] : -s[0][-m.k[0]];
            for (int a = 1; a < dim_; ++a) {
                if (m.k[a] == 0) continue;
                const double ca = c[a][std::abs(m.k[a])];
                const double sa = (m.k[a] >= 0) ? s[a][m.k[a]] : -s[a][-m.k[a]];
                const double cn = ck * ca - sk * sa;
                sk = sk * ca + ck * sa;
                ck = cn;
            }
            acc += m.cos_amp * ck + m.sin_amp * sk;
        }
        return acc;
    }

    double eval1(double y) const { return eval(&y); }

    /// Lockstep evaluation of n <= kMaxLanes points of a 1D interpolant;
    /// the harmonic ladder runs across lanes so the loops vectorize.
    void eval1_block(const double* y, double* out, int n) const {
        if (dim_ != 1 || n > kMaxLanes) throw ConfigError("eval1_block: bad arguments");
        if (modes_.empty()) {
            for (int p = 0; p < n; ++p) out[p] = dc_;
            return;
        }
        double c1[kMaxLanes], s1[kMaxLanes], ck[kMaxLanes], sk[kMaxLanes], acc[kMaxLanes];
        for (int p = 0; p < n; ++p) {
            fastmath::sincos_turn(y[p], c1[p], s1[p]);
            ck[p] = c1[p];
            sk[p] = s1[p];
            acc[p] = dc_;
        }
        int k = 1;
        for (const TrigMode& m : modes_) {  // 1D modes are sorted ascending
            while (k < m.k[0]) {
                for (int p = 0; p < n; ++p) {
                    const double cn = ck[p] * c1[p] - sk[p] * s1[p];
                    sk[p] = sk[p] * c1[p] + ck[p] * s1[p];
                    ck[p] = cn;
                }
                ++k;
            }
            const double A = m.cos_amp, B = m.sin_amp;
            for (int p = 0; p < n; ++p) acc[p] += A * ck[p] + B * sk[p];
        }
        for (int p = 0; p < n; ++p) out[p] = acc[p];
    }

    static constexpr int kMaxLanes = 64;

private:
    static constexpr int kMaxHarmonic = 256;

    int dim_ = 1;
    double dc_ = 0.0;
    std::array<int, 3> kmax_{0, 0, 0};
    std::vector<TrigMode> modes_;
};

/// Periodic multilinear interpolation of the raw samples (the lower-order
/// coefficient lookup offered as a fallback to the spectral default).
class LinearInterpolant {
public:
    LinearInterpolant() = default;
    explicit LinearInterpolant(const ScalarField& f) : grid_(f.grid()), values_(f.values()) {}

    double eval(const double* y) const {
        const int d = grid_.dim();
        int base[3] = {0, 0, 0};
        double w[3] = {0.0, 0.0, 0.0};
        for (int a = 0; a < d; ++a) {
            const int n = grid_.size(a);
            double u = y[a] - std::floor(y[a]);
            const double scaled = u * n;
            base[a] = static_cast<int>(scaled) % n;
            w[a] = scaled - static_cast<int>(scaled);
        }
        double acc = 0.0;
        const int corners = 1 << d;
        for (int cidx = 0; cidx < corners; ++cidx) {
            std::array<int, 3> node{0, 0, 0};
            double weight = 1.0;
            for (int a = 0; a < d; ++a) {
                const bool hi = (cidx >> a) & 1;
                node[a] = hi ? (base[a] + 1) % grid_.size(a) : base[a];
                weight *= hi ? w[a] : 1.0 - w[a];
            }
            acc += weight * values_[grid_.flat_index(node)];
        }
        return acc;
    }

private:
    TorusGrid grid_ = TorusGrid::line(8);
    RealArray values_;
};

}  // namespace perihom
