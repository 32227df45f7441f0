/// @file sde.hpp
/// @brief Monte Carlo cross-validation: Euler-Maruyama paths of the unscaled
/// diffusion dX = b~(X) dt + sqrt(2) sigma(X) dW with sigma sigma = a~, and
/// the long-time diffusivity estimate D = Cov(X_T - X_0)/(2T) that must
/// reproduce the homogenized tensor a_bar.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "perihom/coefficients.hpp"
#include "perihom/invariant_measure.hpp"

namespace perihom {

enum class CoefficientLookup { Trigonometric, Multilinear };

struct SDEConfig {
    Real dt = 1e-3;
    Real horizon = 50.0;   // T
    std::int64_t paths = 100000;
    std::uint64_t seed = 0;
    CoefficientLookup lookup = CoefficientLookup::Trigonometric;
    Real burn_in = 2.0;    // equilibration time before X_0 is recorded
    int threads = 0;       // 0: hardware concurrency

    void validate() const {
        if (!(dt > 0.0)) throw ConfigError("sde: dt must be positive");
        if (!(horizon >= 10.0)) throw ConfigError("sde: horizon T must be >= 10");
        if (paths < 1000) throw ConfigError("sde: need at least 10^3 paths");
    }
};

struct PathEnsemble {
    Eigen::MatrixXd start;  // paths x d, unwrapped coordinates
    Eigen::MatrixXd end;    // paths x d
    Real horizon = 0.0;
    std::uint64_t seed = 0;
};

/// Simulate all paths. Coefficients are looked up by periodic interpolation
/// of the sampled fields (exact for DSL trig polynomials). Positions live in
/// R^d; the torus enters only through the coefficient lookup. A non-finite
/// state aborts with the seed and step in the message.
PathEnsemble simulate_paths(const CoefficientSet& coeffs, const MatrixField& sigma,
                            const SDEConfig& cfg);

struct DiffusivityEstimate {
    Eigen::MatrixXd D;        // displacement covariance / (2T)
    Eigen::MatrixXd stderr_;  // delete-1 jackknife standard errors, same shape
    Eigen::VectorXd mean_drift;         // (mean displacement)/T
    Eigen::VectorXd mean_drift_stderr;
    std::int64_t paths = 0;
    Real horizon = 0.0;
};

/// Sample covariance of the displacements over 2T with jackknife errors.
/// Refuses fewer than 100 paths.
DiffusivityEstimate estimate_diffusivity(const PathEnsemble& ensemble);

/// Convenience: build sigma = sqrt(a~), simulate, estimate.
DiffusivityEstimate run_sde_validation(const CoefficientSet& coeffs, const SDEConfig& cfg);

}  // namespace perihom
