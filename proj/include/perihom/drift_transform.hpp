/// @file drift_transform.hpp
/// @brief The two-step transformation to divergence form without drift:
/// weight the coefficients by the invariant measure, build the mean-zero
/// divergence-free drift beta, absorb it into the antisymmetric flux tensor
/// phi via torus Poisson potentials, and assemble q = a + phi.
#pragma once

#include "perihom/coefficients.hpp"
#include "perihom/invariant_measure.hpp"

namespace perihom {

struct TransformOptions {
    CenteringPolicy centering;
    bool force_noncentered = false;  // build anyway, mark outputs invalid
    Real mean_tol = 1e-8;  // certificate: |mean(beta_j)|
    // certificates: |div beta|_inf relative to the operator scale
    // 4 pi^2 max(Lambda, 1), and |d_l phi_lj - beta_j|_inf absolute
    Real div_tol = 1e-8;
    Real poisson_tol = 1e-8;         // solvability guard for the potentials
};

struct TransformedCoefficients {
    MatrixField a;                     // a~ m, symmetric
    VectorField b;                     // b~ m
    VectorField beta;                  // b_j - d_i a_ij
    std::vector<ScalarField> f_potentials;  // Delta f^j = beta_j, mean zero
    MatrixField phi;                   // d_i f^j - d_j f^i, antisymmetric
    MatrixField q;                     // a + phi
    Real lambda1 = 0.0;                // lambda inf m
    Real Lambda1 = 0.0;                // max |phi|_inf + Lambda sup m
    ScalarField m;                     // the weighting density
    bool homogenization_valid = true;  // false when forced past centering

    // certificates
    Real mean_beta_max = 0.0;      // max_j |mean(beta_j)|
    Real div_beta_inf = 0.0;       // |div beta|_inf / (4 pi^2 max(Lambda,1))
    Real flux_identity_inf = 0.0;  // max_j |d_l phi_lj - beta_j|_inf
    Real harmonic_div_f = 0.0;     // |Delta(div f)|_inf

    const TorusGrid& grid() const { return q.grid(); }
    int dim() const { return q.dim(); }
};

/// Step 1: beta_j = b~_j m - d_i(a~_ij m). Refuses non-centered coefficients
/// unless opts.force_noncentered (CenteringError), and certifies the key
/// properties mean(beta) = 0 and div(beta) = 0.
VectorField build_beta(const CoefficientSet& coeffs, const InvariantMeasure& measure,
                       const TransformOptions& opts = {});

struct FluxTensor {
    std::vector<ScalarField> f_potentials;
    MatrixField phi;
    Real identity_inf = 0.0;   // |d_l phi_lj - beta_j|_inf over j
    Real harmonic_div_f = 0.0; // |Delta(div f)|_inf
};

/// Step 2: solve Delta f^j = beta_j, phi_ij = d_i f^j - d_j f^i, and verify
/// the divergence identity d_l phi_lj = beta_j.
FluxTensor build_flux_tensor(const VectorField& beta, const TransformOptions& opts = {});

struct QAssembly {
    MatrixField q;
    Real lambda1 = 0.0;
    Real Lambda1 = 0.0;
};

/// Step 3: q = a + phi with the ellipticity certificate
/// xi' sym(q) xi >= lambda1 |xi|^2, lambda1 = lambda inf m.
QAssembly build_q(const MatrixField& a, const MatrixField& phi, const InvariantMeasure& measure,
                  Real lambda, Real Lambda);

/// Full pipeline: the three steps plus bookkeeping.
TransformedCoefficients transform(const CoefficientSet& coeffs, const InvariantMeasure& measure,
                                  const TransformOptions& opts = {});

}  // namespace perihom
