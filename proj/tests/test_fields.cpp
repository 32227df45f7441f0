#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "perihom/expression.hpp"
#include "perihom/fields.hpp"
#include "perihom/trig_interp.hpp"

using namespace perihom;

namespace {

ScalarField sample(const std::string& src, const TorusGrid& g) {
    return sample_scalar(parse_expression(src, g.dim()), g);
}

}  // namespace

TEST_CASE("mean: trig modes integrate to zero, constants to themselves") {
    TorusGrid g = TorusGrid::line(64);
    CHECK(mean(ScalarField::constant(g, 1.0)) == 1.0);
    CHECK(mean(sample("cos(2*pi*y1)", g)) == doctest::Approx(0.0).epsilon(1e-15));

    // spectral quadrature against an adaptive 1D oracle
    ScalarField f = sample("exp(sin(2*pi*y1)/(2*pi))", TorusGrid::line(256));
    const double oracle = oracles::integrate(
        [](double y) { return std::exp(std::sin(2.0 * M_PI * y) / (2.0 * M_PI)); }, 0.0, 1.0);
    CHECK(mean(f) == doctest::Approx(oracle).epsilon(1e-13));
}

TEST_CASE("spectral derivative") {
    TorusGrid g = TorusGrid::line(64);
    ScalarField c = sample("3", g);
    CHECK(partial_derivative(c, 0).values().abs().maxCoeff() <= 1e-14);

    ScalarField s = sample("sin(2*pi*y1)", g);
    ScalarField ds = partial_derivative(s, 0);
    ScalarField expect = sample("2*pi*cos(2*pi*y1)", g);
    CHECK((ds.values() - expect.values()).abs().maxCoeff() <= 1e-12);

    TorusGrid g2 = TorusGrid::square(32);
    ScalarField f = sample("sin(2*pi*y1)*cos(2*pi*y2)", g2);
    ScalarField d12 = partial_derivative(partial_derivative(f, 0), 1);
    ScalarField d21 = partial_derivative(partial_derivative(f, 1), 0);
    CHECK((d12.values() - d21.values()).abs().maxCoeff() <= 1e-12);
}

TEST_CASE("torus Poisson solve") {
    TorusGrid g = TorusGrid::line(64);
    ScalarField zero = ScalarField::zero(g);
    CHECK(solve_poisson_torus(zero).values().abs().maxCoeff() == 0.0);

    ScalarField rhs = sample("cos(2*pi*y1)", g);
    ScalarField h = solve_poisson_torus(rhs);
    ScalarField expect =
        ScalarField(g, -rhs.values() / (4.0 * kPi * kPi));
    CHECK((h.values() - expect.values()).abs().maxCoeff() <= 1e-14);

    TorusGrid g2 = TorusGrid::square(32);
    ScalarField rhs2 = sample("sin(2*pi*y1)*cos(2*pi*y2)", g2);
    ScalarField h2 = solve_poisson_torus(rhs2);
    CHECK((h2.values() + rhs2.values() / (8.0 * kPi * kPi)).abs().maxCoeff() <= 1e-14);

    CHECK_THROWS_AS(solve_poisson_torus(ScalarField::constant(g, 0.5), 1e-10), NumericalError);
}

TEST_CASE("Poisson plug-back at n = 128") {
    TorusGrid g = TorusGrid::line(128);
    // smooth, mean-zero by construction
    ScalarField f = sample("exp(sin(2*pi*y1))*cos(2*pi*y1)", g);
    ScalarField rhs(g, f.values() - mean(f));
    ScalarField h = solve_poisson_torus(rhs, 1e-8);
    CHECK((laplacian(h).values() - rhs.values()).abs().maxCoeff() <= 1e-10);
    CHECK(std::abs(mean(h)) <= 1e-14);
}

TEST_CASE("Parseval identity") {
    TorusGrid g = TorusGrid::square(32);
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 5; ++trial) {
        Expression e = oracles::random_expression(rng, 5, 2);
        ScalarField f = sample_scalar(e, g);
        const double value_side = f.values().square().mean();
        const double fourier_side = f.spectrum().abs2().sum();
        CHECK(value_side == doctest::Approx(fourier_side).epsilon(1e-12));
    }
}

TEST_CASE("dealiased products and upsampling") {
    TorusGrid g = TorusGrid::line(32);
    ScalarField a = sample("cos(2*pi*y1)", g);
    ScalarField b = sample("sin(2*pi*y1)", g);
    // cos*sin = sin(4 pi y)/2, band-limited: dealiased == collocation here
    ScalarField p = multiply_dealiased(a, b);
    ScalarField expect = sample("sin(4*pi*y1)/2", g);
    CHECK((p.values() - expect.values()).abs().maxCoeff() <= 1e-14);

    // the mean of a product of two high modes must not alias into the mean
    ScalarField hi = sample("cos(2*pi*15*y1)", g);
    CHECK(std::abs(mean_product(hi, hi) - 0.5) <= 1e-13);

    ScalarField up = upsample(a, 2);
    CHECK(up.grid().size(0) == 64);
    ScalarField expect_up = sample("cos(2*pi*y1)", TorusGrid::line(64));
    CHECK((up.values() - expect_up.values()).abs().maxCoeff() <= 1e-13);

    // Nyquist mode upsampling keeps node values and splits the bin
    ScalarField nyq = sample("cos(2*pi*16*y1)", g);
    ScalarField nyq_up = upsample(nyq, 2);
    ScalarField nyq_fine = sample("cos(2*pi*16*y1)", TorusGrid::line(64));
    CHECK((nyq_up.values() - nyq_fine.values()).abs().maxCoeff() <= 1e-12);
}

TEST_CASE("pointwise matrix sqrt") {
    TorusGrid g = TorusGrid::square(16);
    MatrixField eye = MatrixField::identity(g);
    MatrixField s = pointwise_matrix_sqrt(eye, 0.5);
    CHECK((s.comp(0, 0).values() - 1.0).abs().maxCoeff() <= 1e-14);
    CHECK(s.comp(0, 1).values().abs().maxCoeff() <= 1e-14);

    // diag(4, 9) -> diag(2, 3)
    std::vector<ScalarField> comps = {ScalarField::constant(g, 4.0), ScalarField::zero(g),
                                      ScalarField::zero(g), ScalarField::constant(g, 9.0)};
    MatrixField diag(g, comps, MatrixSymmetry::Symmetric);
    MatrixField sq = pointwise_matrix_sqrt(diag, 1.0);
    CHECK((sq.comp(0, 0).values() - 2.0).abs().maxCoeff() <= 1e-14);
    CHECK((sq.comp(1, 1).values() - 3.0).abs().maxCoeff() <= 1e-14);

    // 1D: scalar square root, and sigma*sigma = a pointwise
    TorusGrid g1 = TorusGrid::line(64);
    ScalarField a = sample("2+sin(2*pi*y1)", g1);
    MatrixField am(g1, {a}, MatrixSymmetry::Symmetric);
    MatrixField sig = pointwise_matrix_sqrt(am, 0.9);
    CHECK((sig.comp(0, 0).values() - a.values().sqrt()).abs().maxCoeff() <= 1e-14);
    CHECK((sig.comp(0, 0).values().square() - a.values()).abs().maxCoeff() <= 1e-12);

    // ellipticity violation names the node
    std::vector<ScalarField> bad = {sample("sin(2*pi*y1)", g1)};
    MatrixField badm(g1, bad, MatrixSymmetry::Symmetric);
    CHECK_THROWS_AS(pointwise_matrix_sqrt(badm, 0.1), NumericalError);
}

TEST_CASE("matrix symmetry storage contracts") {
    TorusGrid g = TorusGrid::square(16);
    ScalarField a = sample("sin(2*pi*y1)", g);
    std::vector<ScalarField> comps = {ScalarField::zero(g), a, ScalarField::zero(g),
                                      ScalarField::zero(g)};
    MatrixField anti(g, comps, MatrixSymmetry::Antisymmetric);
    CHECK((anti.comp(0, 1).values() + anti.comp(1, 0).values()).abs().maxCoeff() == 0.0);
    CHECK(anti.comp(0, 0).values().abs().maxCoeff() == 0.0);

    MatrixField sym(g, {ScalarField::constant(g, 2.0), a, ScalarField::zero(g),
                        ScalarField::constant(g, 3.0)},
                    MatrixSymmetry::Symmetric);
    CHECK((sym.comp(0, 1).values() - sym.comp(1, 0).values()).abs().maxCoeff() == 0.0);
}

TEST_CASE("trig interpolant reproduces fields off-grid") {
    TorusGrid g = TorusGrid::line(64);
    ScalarField f = sample("2+sin(2*pi*y1)-0.3*cos(4*pi*y1)", g);
    TrigInterpolant itp(f);
    CHECK(itp.mode_count() == 2);
    for (double y : {0.013, 0.37, 0.777, 1.4, -0.2}) {
        const double expect = 2.0 + std::sin(2.0 * M_PI * y) - 0.3 * std::cos(4.0 * M_PI * y);
        CHECK(itp.eval1(y) == doctest::Approx(expect).epsilon(1e-13));
    }

    // block evaluation matches scalar evaluation
    double ys[8], out[8];
    for (int i = 0; i < 8; ++i) ys[i] = 0.1 * i + 0.01;
    itp.eval1_block(ys, out, 8);
    for (int i = 0; i < 8; ++i) CHECK(out[i] == doctest::Approx(itp.eval1(ys[i])).epsilon(1e-14));

    // 2D
    TorusGrid g2 = TorusGrid::square(32);
    ScalarField f2 = sample("cos(2*pi*y1)*sin(2*pi*y2)+0.5", g2);
    TrigInterpolant itp2(f2);
    const double p[2] = {0.21, 0.68};
    CHECK(itp2.eval(p) == doctest::Approx(std::cos(2 * M_PI * 0.21) * std::sin(2 * M_PI * 0.68) +
                                          0.5)
                              .epsilon(1e-13));

    // smooth non-polynomial field: interpolant is exact at nodes
    ScalarField f3 = sample("exp(sin(2*pi*y1))", g);
    TrigInterpolant itp3(f3);
    for (int k = 0; k < 64; k += 7)
        CHECK(itp3.eval1(k / 64.0) == doctest::Approx(f3[k]).epsilon(1e-12));
}

TEST_CASE("fast sincos table") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    double worst = 0.0;
    for (int i = 0; i < 20000; ++i) {
        const double t = u(rng);
        double c, s;
        fastmath::sincos_turn(t, c, s);
        worst = std::max(worst, std::abs(c - std::cos(2.0 * M_PI * t)));
        worst = std::max(worst, std::abs(s - std::sin(2.0 * M_PI * t)));
    }
    CHECK(worst <= 2e-14);
}
