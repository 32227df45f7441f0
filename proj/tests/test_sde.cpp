#include <doctest.h>

#include <cmath>

#include "perihom/cell_homogenize.hpp"
#include "perihom/sde.hpp"

using namespace perihom;

namespace {

CoefficientSet coeffs_1d(const std::string& a, const std::string& b, int n = 256) {
    TorusGrid g = TorusGrid::line(n);
    return sample_coefficients({{parse_expression(a, 1)}}, {parse_expression(b, 1)}, g);
}

CoefficientSet coeffs_2d(const std::string& b1, const std::string& b2, int n = 64) {
    TorusGrid g = TorusGrid::square(n);
    auto e = [](const std::string& s) { return parse_expression(s, 2); };
    return sample_coefficients({{e("1"), e("0")}, {e("0"), e("1")}}, {e(b1), e(b2)}, g);
}

SDEConfig quick_config(std::int64_t paths, Real T, Real dt = 1e-3) {
    SDEConfig cfg;
    cfg.paths = paths;
    cfg.horizon = T;
    cfg.dt = dt;
    cfg.seed = 99;
    return cfg;
}

}  // namespace

TEST_CASE("config validation") {
    SDEConfig cfg;
    cfg.horizon = 5.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.horizon = 50.0;
    cfg.paths = 10;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.paths = 10000;
    cfg.dt = -1.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("deterministic drift with zero noise transports exactly") {
    // sigma = 0 is outside the elliptic contract, so drive the integrator
    // directly with a zero sigma field and b = c
    CoefficientSet cs = coeffs_1d("1", "0.5", 64);
    TorusGrid g = cs.grid();
    MatrixField sigma0(g, {ScalarField::zero(g)}, MatrixSymmetry::Symmetric);
    SDEConfig cfg = quick_config(1000, 10.0, 1e-2);
    cfg.burn_in = 0.0;
    cfg.horizon = 10.0;
    PathEnsemble ens = simulate_paths(cs, sigma0, cfg);
    // X_T - X_0 = c T exactly (the drift is constant)
    const Eigen::ArrayXd disp = (ens.end - ens.start).col(0).array();
    CHECK((disp - 0.5 * 10.0).abs().maxCoeff() <= 1e-10);
}

TEST_CASE("fixed seed reproduces endpoints bit-for-bit across thread counts") {
    CoefficientSet cs = coeffs_2d("0", "cos(2*pi*y1)");
    MatrixField sigma = pointwise_matrix_sqrt(cs.a_tilde, 0.9);
    SDEConfig cfg = quick_config(2000, 10.0, 1e-2);
    cfg.burn_in = 0.5;

    cfg.threads = 1;
    PathEnsemble a = simulate_paths(cs, sigma, cfg);
    cfg.threads = 2;
    PathEnsemble b = simulate_paths(cs, sigma, cfg);
    CHECK((a.end - b.end).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.start - b.start).cwiseAbs().maxCoeff() == 0.0);

    // different seed, different paths
    cfg.seed = 100;
    PathEnsemble c = simulate_paths(cs, sigma, cfg);
    CHECK((a.end - c.end).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("Brownian motion: D = I within 3 standard errors") {
    CoefficientSet cs = coeffs_2d("0", "0", 16);
    SDEConfig cfg = quick_config(20000, 10.0, 1e-2);
    cfg.burn_in = 0.1;
    DiffusivityEstimate est = run_sde_validation(cs, cfg);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            const double expect = (i == j) ? 1.0 : 0.0;
            CHECK(std::abs(est.D(i, j) - expect) <= 3.0 * est.stderr_(i, j) + 1e-12);
        }
    CHECK(est.mean_drift.cwiseAbs().maxCoeff() <=
          3.0 * est.mean_drift_stderr.maxCoeff());
    CHECK(est.stderr_.minCoeff() > 0.0);
}

TEST_CASE("estimator refuses tiny ensembles and reports symmetric D") {
    PathEnsemble ens;
    ens.start = Eigen::MatrixXd::Zero(50, 1);
    ens.end = Eigen::MatrixXd::Random(50, 1);
    ens.horizon = 10.0;
    CHECK_THROWS_AS(estimate_diffusivity(ens), ConfigError);
}

TEST_CASE("harmonic 1D diffusivity approaches sqrt(3) (reduced-size run)") {
    CoefficientSet cs = coeffs_1d("2+sin(2*pi*y1)", "0");
    SDEConfig cfg = quick_config(20000, 20.0);
    DiffusivityEstimate est = run_sde_validation(cs, cfg);
    // generous band: this is the smoke test, the acceptance suite runs the
    // full-size configuration
    CHECK(std::abs(est.D(0, 0) - std::sqrt(3.0)) <=
          std::max(4.0 * est.stderr_(0, 0), 0.05 * std::sqrt(3.0)));
}

TEST_CASE("halving dt moves D by no more than two standard errors") {
    CoefficientSet cs = coeffs_1d("2+sin(2*pi*y1)", "0");
    SDEConfig cfg = quick_config(10000, 50.0, 1e-3);
    DiffusivityEstimate coarse = run_sde_validation(cs, cfg);
    cfg.dt = 5e-4;
    DiffusivityEstimate fine = run_sde_validation(cs, cfg);
    const double se = std::max(coarse.stderr_(0, 0), fine.stderr_(0, 0));
    CHECK(std::abs(coarse.D(0, 0) - fine.D(0, 0)) <= 2.0 * se);
}

TEST_CASE("multilinear lookup stays close to the trigonometric default") {
    CoefficientSet cs = coeffs_1d("2+sin(2*pi*y1)", "0");
    SDEConfig cfg = quick_config(5000, 10.0, 1e-2);
    cfg.burn_in = 0.5;
    DiffusivityEstimate trig = run_sde_validation(cs, cfg);
    cfg.lookup = CoefficientLookup::Multilinear;
    DiffusivityEstimate lin = run_sde_validation(cs, cfg);
    CHECK(std::abs(trig.D(0, 0) - lin.D(0, 0)) <=
          3.0 * (trig.stderr_(0, 0) + lin.stderr_(0, 0)) + 0.02);
}
