#include "perihom/invariant_measure.hpp"

#include <cmath>

#include "perihom/linsolve.hpp"
#include "perihom/trig_interp.hpp"

namespace perihom {

namespace {

/// 6-point Gauss-Legendre rule on [-1, 1].
constexpr double kGaussNode[3] = {0.23861918608319690863, 0.66120938646626451366,
                                  0.93246951420315202781};
constexpr double kGaussWeight[3] = {0.46791393457269104739, 0.36076157304813860757,
                                    0.17132449237917034504};

/// Integrate fn over [a, b] with one 6-point Gauss panel.
template <typename Fn>
double gauss_panel(Fn&& fn, double a, double b) {
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double acc = 0.0;
    for (int q = 0; q < 3; ++q) {
        acc += kGaussWeight[q] *
               (fn(mid - half * kGaussNode[q]) + fn(mid + half * kGaussNode[q]));
    }
    return acc * half;
}

/// The divergence-form operator L m = -d_i(a~_ij d_j m - beta~_i m) applied
/// spectrally with collocation products.
struct MeasureOperator {
    const CoefficientSet& coeffs;
    VectorField beta_tilde;

    explicit MeasureOperator(const CoefficientSet& cs)
        : coeffs(cs), beta_tilde(make_beta_tilde(cs)) {}

    static VectorField make_beta_tilde(const CoefficientSet& cs) {
        VectorField div_a = row_divergence(cs.a_tilde);
        std::vector<ScalarField> comps;
        comps.reserve(cs.dim());
        for (int j = 0; j < cs.dim(); ++j)
            comps.push_back(cs.b_tilde.comp(j) - div_a.comp(j));
        return VectorField(cs.grid(), std::move(comps));
    }

    ScalarField apply(const ScalarField& m) const {
        const int d = coeffs.dim();
        std::vector<ScalarField> grad;
        grad.reserve(d);
        for (int j = 0; j < d; ++j) grad.push_back(partial_derivative(m, j));
        ScalarField out = ScalarField::zero(m.grid());
        for (int i = 0; i < d; ++i) {
            RealArray flux = RealArray::Zero(m.size());
            for (int j = 0; j < d; ++j)
                flux += coeffs.a_tilde.comp(i, j).values() * grad[j].values();
            flux -= beta_tilde.comp(i).values() * m.values();
            out = out - partial_derivative(ScalarField(m.grid(), std::move(flux)), i);
        }
        return out;
    }
};

}  // namespace

InvariantMeasure solve_invariant_measure(const CoefficientSet& coeffs,
                                         const InvariantMeasureOptions& opts) {
    const TorusGrid& g = coeffs.grid();
    const std::int64_t N = g.node_count();
    MeasureOperator L(coeffs);

    // Square system (P L P + c P0 + c (I-P)) m = c 1, with P0 m = mean(m) 1
    // and P the Nyquist-free projector: any solution has mean exactly 1,
    // no Nyquist content, and L m = 0 on the resolved modes (range(L) is
    // mean-free, and the penalty pins the spurious Nyquist kernel of the
    // composed spectral derivatives).
    const Real c0 = 0.5 * (coeffs.lambda + max_eigenvalue(coeffs.a_tilde));
    const Real c = c0 * kTwoPi * kTwoPi;

    ApplyFn op = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
        ScalarField f(g, v.array());
        ScalarField fp = project_out_nyquist(f);
        ScalarField Lv = project_out_nyquist(L.apply(fp));
        const Real mv = v.mean();
        return Lv.values().matrix() + Eigen::VectorXd::Constant(N, c * mv) +
               c * (f.values() - fp.values()).matrix();
    };
    // preconditioner: modes k != 0 get (c0 4pi^2|k|^2)^-1, mode 0 gets 1/c
    ApplyFn precond = [&](const Eigen::VectorXd& r) -> Eigen::VectorXd {
        ScalarField rf(g, r.array());
        const Real rmean = rf.values().mean();
        ScalarField centered(g, rf.values() - rmean);
        ScalarField h = solve_poisson_torus(centered, 1e-6);
        return (-1.0 / c0) * h.values().matrix() +
               Eigen::VectorXd::Constant(N, rmean / c);
    };

    const Eigen::VectorXd rhs = Eigen::VectorXd::Constant(N, c);

    SolveResult sol;
    if (g.dim() == 1 && N <= opts.max_dense_n) {
        sol = dense_direct(op, rhs, opts.max_dense_n);
    } else {
        sol = bicgstab(op, precond, rhs, 0.01 * opts.tol, opts.max_iter);
        if (!sol.converged && N <= opts.max_dense_n) sol = dense_direct(op, rhs, opts.max_dense_n);
    }

    InvariantMeasure out{ScalarField(g, sol.x.array()), 0.0, 0.0, 0.0, 0.0,
                         Eigen::VectorXd(), sol.iterations, sol.method};

    // exact unit mean, then certify the equation residual a posteriori
    const Real mval = out.m.values().mean();
    if (!(std::isfinite(mval)) || std::abs(mval) < 1e-12)
        throw ResolutionError("invariant measure solve produced a degenerate mean; "
                              "the augmented system is singular at this resolution");
    out.m = ScalarField(g, out.m.values() / mval);

    out.residual_raw = L.apply(out.m).values().abs().maxCoeff();
    const Real scale = kTwoPi * kTwoPi * std::max<Real>(coeffs.Lambda, 1.0);
    out.residual = out.residual_raw / scale;
    if (!(out.residual <= opts.tol))
        throw ResolutionError("invariant measure residual " + std::to_string(out.residual) +
                              " exceeds tolerance " + std::to_string(opts.tol) +
                              " (method " + sol.method + "); refine the grid");

    out.min_value = out.m.values().minCoeff();
    out.max_value = out.m.values().maxCoeff();
    if (out.min_value <= 0.0)
        throw NumericalError("computed invariant measure is not positive (min " +
                             std::to_string(out.min_value) +
                             "); the continuum density is positive, so this grid "
                             "under-resolves the coefficients");

    out.centering_defect = centering_defect(coeffs, out.m);
    return out;
}

Eigen::VectorXd centering_defect(const CoefficientSet& coeffs, const ScalarField& m) {
    if (std::abs(mean(m) - 1.0) > 1e-10)
        throw ConfigError("centering defect needs a unit-mean density");
    const int d = coeffs.dim();
    Eigen::VectorXd c(d);
    for (int j = 0; j < d; ++j) c[j] = mean_product(coeffs.b_tilde.comp(j), m);
    return c;
}

CenteringStatus classify_centering(const Eigen::VectorXd& defect, const CenteringPolicy& policy) {
    const Real mag = defect.cwiseAbs().maxCoeff();
    if (mag <= policy.centered_tol) return CenteringStatus::Centered;
    if (mag <= policy.warn_tol) return CenteringStatus::Marginal;
    return CenteringStatus::NonCentered;
}

ScalarField invariant_measure_1d_closed_form(const CoefficientSet& coeffs) {
    if (coeffs.dim() != 1) throw ConfigError("closed form requires d = 1");
    const TorusGrid& g = coeffs.grid();
    const int n = g.size(0);
    const RealArray& a = coeffs.a_tilde.comp(0, 0).values();
    const RealArray& b = coeffs.b_tilde.comp(0).values();
    if (a.minCoeff() <= 0.0) throw NumericalError("closed form requires a~ > 0");

    // r = b~/a~ split into mean + periodic part; P = periodic antiderivative
    ScalarField r(g, b / a);
    const Real rbar = mean(r);
    ComplexArray rcoef = r.spectrum();
    ComplexArray pcoef = ComplexArray::Zero(n);
    for (int j = 1; j < n; ++j) {
        const int k = g.wavenumber(j, 0);
        if (j == n / 2) continue;  // Nyquist: no odd antiderivative
        pcoef[j] = rcoef[j] / std::complex<double>(0.0, kTwoPi * k);
    }
    ScalarField P(g, fft_inverse(g, pcoef).real());
    TrigInterpolant P_interp(P, 1e-15);
    const Real P0 = P_interp.eval1(0.0);

    auto int_r = [&](double y) { return rbar * y + P_interp.eval1(y) - P0; };
    auto inv_E = [&](double y) { return std::exp(-int_r(y)); };

    // J(y) = int_0^y 1/E via cumulative Gauss panels on the grid spacing
    RealArray J(n + 1);
    J[0] = 0.0;
    const double h = 1.0 / n;
    for (int i = 0; i < n; ++i) J[i + 1] = J[i] + gauss_panel(inv_E, i * h, (i + 1) * h);

    // periodicity of a~ m fixes C1/C0; centering is exactly C1 = 0
    const double C0 = 1.0;
    const double C1 = C0 * (std::exp(-rbar) - 1.0) / J[n];

    RealArray mv(n);
    for (int i = 0; i < n; ++i) {
        const double y = i * h;
        const double E = std::exp(int_r(y));
        mv[i] = (C0 * E + C1 * E * J[i]) / a[i];
    }
    const double Z = mv.mean();  // spectrally exact: m is smooth and periodic
    return ScalarField(g, mv / Z);
}

}  // namespace perihom
