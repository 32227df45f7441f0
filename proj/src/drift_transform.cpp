#include "perihom/drift_transform.hpp"

#include <cmath>

namespace perihom {

namespace {

MatrixField weight_matrix(const MatrixField& a_tilde, const ScalarField& m) {
    const int d = a_tilde.dim();
    std::vector<ScalarField> comps;
    comps.reserve(d * d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) comps.push_back(multiply_dealiased(a_tilde.comp(i, j), m));
    return MatrixField(a_tilde.grid(), std::move(comps), MatrixSymmetry::Symmetric);
}

VectorField weight_vector(const VectorField& b_tilde, const ScalarField& m) {
    const int d = b_tilde.dim();
    std::vector<ScalarField> comps;
    comps.reserve(d);
    for (int j = 0; j < d; ++j) comps.push_back(multiply_dealiased(b_tilde.comp(j), m));
    return VectorField(b_tilde.grid(), std::move(comps));
}

}  // namespace

VectorField build_beta(const CoefficientSet& coeffs, const InvariantMeasure& measure,
                       const TransformOptions& opts) {
    const CenteringStatus status = classify_centering(measure.centering_defect, opts.centering);
    if (status == CenteringStatus::NonCentered && !opts.force_noncentered) {
        throw CenteringError(
            "centering condition violated: max_j |int b~_j m| = " +
            std::to_string(measure.centering_defect.cwiseAbs().maxCoeff()) +
            " > " + std::to_string(opts.centering.warn_tol) +
            "; the large drift does not homogenize into enhanced diffusion "
            "(pass the force flag to build the transform anyway)");
    }

    MatrixField a = weight_matrix(coeffs.a_tilde, measure.m);
    VectorField b = weight_vector(coeffs.b_tilde, measure.m);
    VectorField div_a = row_divergence(a);

    std::vector<ScalarField> comps;
    comps.reserve(coeffs.dim());
    for (int j = 0; j < coeffs.dim(); ++j) comps.push_back(b.comp(j) - div_a.comp(j));
    return VectorField(coeffs.grid(), std::move(comps));
}

FluxTensor build_flux_tensor(const VectorField& beta, const TransformOptions& opts) {
    const TorusGrid& g = beta.grid();
    const int d = g.dim();

    std::vector<ScalarField> f;
    f.reserve(d);
    for (int j = 0; j < d; ++j) f.push_back(solve_poisson_torus(beta.comp(j), opts.poisson_tol));

    // phi_ij = d_i f^j - d_j f^i; the antisymmetric flag stores exact negations
    std::vector<ScalarField> comps(static_cast<std::size_t>(d) * d, ScalarField::zero(g));
    std::vector<std::vector<ScalarField>> df(d);  // df[j][i] = d_i f^j
    for (int j = 0; j < d; ++j) {
        df[j].reserve(d);
        for (int i = 0; i < d; ++i) df[j].push_back(partial_derivative(f[j], i));
    }
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j) comps[i * d + j] = df[j][i] - df[i][j];
    MatrixField phi(g, std::move(comps), MatrixSymmetry::Antisymmetric);

    FluxTensor out{std::move(f), std::move(phi), 0.0, 0.0};

    // d_l phi_lj = beta_j
    VectorField div_phi = row_divergence(out.phi);
    for (int j = 0; j < d; ++j) {
        const Real err = (div_phi.comp(j).values() - beta.comp(j).values()).abs().maxCoeff();
        out.identity_inf = std::max(out.identity_inf, err);
    }
    // Delta(div f) = div beta = 0, which makes div f constant; the second
    // derivative amplifies roundoff by (2 pi k)^2, so certify relative to
    // the operator scale
    Real beta_sup = 0.0;
    for (int j = 0; j < d; ++j)
        beta_sup = std::max(beta_sup, beta.comp(j).values().abs().maxCoeff());
    ScalarField divf = ScalarField::zero(g);
    for (int j = 0; j < d; ++j) divf = divf + partial_derivative(out.f_potentials[j], j);
    out.harmonic_div_f = laplacian(divf).values().abs().maxCoeff() /
                         (kTwoPi * kTwoPi * std::max<Real>(beta_sup, 1.0));

    if (out.identity_inf > opts.div_tol)
        throw NumericalError("flux tensor identity d_l phi_lj = beta_j fails: " +
                             std::to_string(out.identity_inf) + " > " +
                             std::to_string(opts.div_tol));
    if (out.harmonic_div_f > opts.div_tol)
        throw NumericalError("div f is not harmonic to tolerance: " +
                             std::to_string(out.harmonic_div_f));
    return out;
}

QAssembly build_q(const MatrixField& a, const MatrixField& phi, const InvariantMeasure& measure,
                  Real lambda, Real Lambda) {
    if (a.grid() != phi.grid()) throw ConfigError("q assembly on mismatched grids");
    if (a.symmetry() != MatrixSymmetry::Symmetric ||
        phi.symmetry() != MatrixSymmetry::Antisymmetric)
        throw ConfigError("q assembly needs symmetric a and antisymmetric phi");

    const int d = a.dim();
    std::vector<ScalarField> comps;
    comps.reserve(d * d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) comps.push_back(a.comp(i, j) + phi.comp(i, j));

    QAssembly out{MatrixField(a.grid(), std::move(comps), MatrixSymmetry::None), 0.0, 0.0};
    out.lambda1 = lambda * measure.min_value;

    Real phi_sup = 0.0;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            phi_sup = std::max(phi_sup, phi.comp(i, j).values().abs().maxCoeff());
    out.Lambda1 = phi_sup + Lambda * measure.max_value;

    // pointwise certificate: sym(q) = a, so scan a's eigenvalues
    const Real eig_min = min_eigenvalue(a);
    if (eig_min < out.lambda1 - 1e-12)
        throw NumericalError("ellipticity certificate failed: min eig(sym q) = " +
                             std::to_string(eig_min) + " < lambda1 = " +
                             std::to_string(out.lambda1) + "; inconsistent inputs");
    return out;
}

TransformedCoefficients transform(const CoefficientSet& coeffs, const InvariantMeasure& measure,
                                  const TransformOptions& opts) {
    const CenteringStatus status = classify_centering(measure.centering_defect, opts.centering);

    VectorField beta = build_beta(coeffs, measure, opts);

    Real mean_beta_max = 0.0;
    for (int j = 0; j < coeffs.dim(); ++j)
        mean_beta_max = std::max(mean_beta_max, std::abs(mean(beta.comp(j))));
    if (mean_beta_max > opts.mean_tol && !opts.force_noncentered)
        throw NumericalError("beta is not mean-zero: " + std::to_string(mean_beta_max));
    // div beta is the non-divergence-form residual of the measure equation;
    // certify it against the same operator scale as the measure residual
    const Real div_scale = kTwoPi * kTwoPi * std::max<Real>(coeffs.Lambda, 1.0);
    const Real div_beta_inf = divergence(beta).values().abs().maxCoeff() / div_scale;
    if (div_beta_inf > opts.div_tol)
        throw NumericalError("beta is not divergence-free: |div beta|_inf / scale = " +
                             std::to_string(div_beta_inf) + " > " +
                             std::to_string(opts.div_tol) + "; refine the measure solve");

    // When forced past a violated centering condition, project the mean out
    // of beta so the Poisson problems stay solvable; downstream outputs are
    // flagged invalid for homogenization either way.
    VectorField beta_solv = beta;
    if (mean_beta_max > opts.poisson_tol) {
        std::vector<ScalarField> comps;
        for (int j = 0; j < coeffs.dim(); ++j) {
            const Real mb = mean(beta.comp(j));
            comps.push_back(ScalarField(beta.grid(), beta.comp(j).values() - mb));
        }
        beta_solv = VectorField(beta.grid(), std::move(comps));
    }

    FluxTensor flux = build_flux_tensor(beta_solv, opts);
    MatrixField a = weight_matrix(coeffs.a_tilde, measure.m);
    VectorField b = weight_vector(coeffs.b_tilde, measure.m);
    QAssembly qa = build_q(a, flux.phi, measure, coeffs.lambda, coeffs.Lambda);

    TransformedCoefficients tc{std::move(a),
                               std::move(b),
                               std::move(beta),
                               std::move(flux.f_potentials),
                               std::move(flux.phi),
                               std::move(qa.q),
                               qa.lambda1,
                               qa.Lambda1,
                               measure.m,
                               status != CenteringStatus::NonCentered,
                               mean_beta_max,
                               div_beta_inf,
                               flux.identity_inf,
                               flux.harmonic_div_f};
    return tc;
}

}  // namespace perihom
