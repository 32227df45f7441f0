#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "perihom/invariant_measure.hpp"

using namespace perihom;

namespace {

CoefficientSet coeffs_1d(const std::string& a, const std::string& b, int n = 256) {
    TorusGrid g = TorusGrid::line(n);
    return sample_coefficients({{parse_expression(a, 1)}}, {parse_expression(b, 1)}, g);
}

CoefficientSet coeffs_2d(const std::string& a11, const std::string& a12, const std::string& a22,
                         const std::string& b1, const std::string& b2, int n = 128) {
    TorusGrid g = TorusGrid::square(n);
    auto e = [](const std::string& s) { return parse_expression(s, 2); };
    return sample_coefficients({{e(a11), e(a12)}, {e(a12), e(a22)}}, {e(b1), e(b2)}, g);
}

}  // namespace

TEST_CASE("identity coefficients: m = 1, zero defect") {
    CoefficientSet cs = coeffs_2d("1", "0", "1", "0", "0", 16);
    InvariantMeasure im = solve_invariant_measure(cs);
    CHECK((im.m.values() - 1.0).abs().maxCoeff() <= 1e-12);
    CHECK(im.centering_defect.cwiseAbs().maxCoeff() <= 1e-13);
    CHECK(im.min_value > 0.0);
    CHECK(std::abs(mean(im.m) - 1.0) <= 1e-14);
}

TEST_CASE("cosine drift: m = exp(sin(2 pi y)/(2 pi))/Z") {
    CoefficientSet cs = coeffs_1d("1", "cos(2*pi*y1)");
    InvariantMeasure im = solve_invariant_measure(cs);

    const double Z = oracles::integrate(
        [](double y) { return std::exp(std::sin(2.0 * M_PI * y) / (2.0 * M_PI)); }, 0.0, 1.0);
    double worst = 0.0;
    for (int k = 0; k < 256; ++k) {
        const double y = k / 256.0;
        const double expect = std::exp(std::sin(2.0 * M_PI * y) / (2.0 * M_PI)) / Z;
        worst = std::max(worst, std::abs(im.m[k] - expect));
    }
    CHECK(worst <= 1e-10);

    // centering defect vanishes by the exact antiderivative of cos e^{sin}
    CHECK(im.centering_defect.cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("constant drift fails centering with m = 1 and defect 1") {
    CoefficientSet cs = coeffs_1d("1", "1");
    InvariantMeasure im = solve_invariant_measure(cs);
    CHECK((im.m.values() - 1.0).abs().maxCoeff() <= 1e-11);
    CHECK(im.centering_defect[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(classify_centering(im.centering_defect) == CenteringStatus::NonCentered);
}

TEST_CASE("1D closed form") {
    SUBCASE("a = 1, b = 0") {
        CoefficientSet cs = coeffs_1d("1", "0");
        ScalarField m = invariant_measure_1d_closed_form(cs);
        CHECK((m.values() - 1.0).abs().maxCoeff() <= 1e-13);
    }
    SUBCASE("harmonic: m = sqrt(3)/(2 + sin)") {
        CoefficientSet cs = coeffs_1d("2+sin(2*pi*y1)", "0");
        ScalarField m = invariant_measure_1d_closed_form(cs);
        // int 1/(2+sin) = 1/sqrt(3) by the quadrature oracle
        const double I = oracles::integrate(
            [](double y) { return 1.0 / (2.0 + std::sin(2.0 * M_PI * y)); }, 0.0, 1.0);
        CHECK(I == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-12));
        double worst = 0.0;
        for (int k = 0; k < 256; ++k) {
            const double y = k / 256.0;
            const double expect = std::sqrt(3.0) / (2.0 + std::sin(2.0 * M_PI * y));
            worst = std::max(worst, std::abs(m[k] - expect));
        }
        CHECK(worst <= 1e-12);
    }
    SUBCASE("general branch reproduces m = 1 for b = 1") {
        CoefficientSet cs = coeffs_1d("1", "1");
        ScalarField m = invariant_measure_1d_closed_form(cs);
        CHECK((m.values() - 1.0).abs().maxCoeff() <= 1e-11);
    }
}

TEST_CASE("solver matches the 1D closed form for every coefficient pair") {
    const std::pair<std::string, std::string> pairs[] = {
        {"1", "cos(2*pi*y1)"},
        {"2+sin(2*pi*y1)", "0"},
        {"2+sin(2*pi*y1)", "cos(2*pi*y1)"},
        {"1+0.5*cos(2*pi*y1)^2", "sin(2*pi*y1)"},
        {"1", "1"},
    };
    for (const auto& [a, b] : pairs) {
        CAPTURE(a);
        CAPTURE(b);
        CoefficientSet cs = coeffs_1d(a, b);
        InvariantMeasure im = solve_invariant_measure(cs);
        ScalarField closed = invariant_measure_1d_closed_form(cs);
        CHECK((im.m.values() - closed.values()).abs().maxCoeff() <= 1e-8);
    }
}

TEST_CASE("coefficient scaling invariance") {
    CoefficientSet cs = coeffs_1d("2+sin(2*pi*y1)", "cos(2*pi*y1)");
    CoefficientSet scaled = coeffs_1d("3.7*(2+sin(2*pi*y1))", "3.7*cos(2*pi*y1)");
    InvariantMeasure im = solve_invariant_measure(cs);
    InvariantMeasure ims = solve_invariant_measure(scaled);
    CHECK((im.m.values() - ims.m.values()).abs().maxCoeff() <= 1e-12);
}

TEST_CASE("laminated 2D reduces to the 1D solution") {
    CoefficientSet cs2 = coeffs_2d("1", "0", "1", "cos(2*pi*y1)", "cos(2*pi*y1)", 64);
    InvariantMeasure im2 = solve_invariant_measure(cs2);

    // no variation along y2
    const TorusGrid& g = cs2.grid();
    double var2 = 0.0;
    for (int k1 = 0; k1 < g.size(0); ++k1) {
        double lo = 1e300, hi = -1e300;
        for (int k2 = 0; k2 < g.size(1); ++k2) {
            const double v = im2.m[g.flat_index({k1, k2, 0})];
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        var2 = std::max(var2, hi - lo);
    }
    CHECK(var2 <= 1e-10);

    // the y1-slice matches the 1D solver
    CoefficientSet cs1 = coeffs_1d("1", "cos(2*pi*y1)", 64);
    InvariantMeasure im1 = solve_invariant_measure(cs1);
    double gap = 0.0;
    for (int k1 = 0; k1 < g.size(0); ++k1)
        gap = std::max(gap, std::abs(im2.m[g.flat_index({k1, 0, 0})] - im1.m[k1]));
    CHECK(gap <= 1e-9);
}

TEST_CASE("laminated centering equivalence: defect = 0 iff the 1D integrals vanish") {
    // passing example: b = (cos, cos)
    CoefficientSet pass = coeffs_2d("1", "0", "1", "cos(2*pi*y1)", "cos(2*pi*y1)", 64);
    InvariantMeasure imp = solve_invariant_measure(pass);
    // laminated criterion: int b1/a11 = 0 and int (b2/a11) exp(int_0^s b1/a11) = 0
    const double i1 = oracles::integrate(
        [](double s) { return std::cos(2.0 * M_PI * s); }, 0.0, 1.0);
    const double i2 = oracles::integrate(
        [](double s) {
            return std::cos(2.0 * M_PI * s) *
                   std::exp(std::sin(2.0 * M_PI * s) / (2.0 * M_PI));
        },
        0.0, 1.0);
    CHECK(std::abs(i1) <= 1e-12);
    CHECK(std::abs(i2) <= 1e-12);
    CHECK(imp.centering_defect.cwiseAbs().maxCoeff() <= 1e-10);

    // failing example: b = (cos, sin): the second integral is positive
    CoefficientSet fail = coeffs_2d("1", "0", "1", "cos(2*pi*y1)", "sin(2*pi*y1)", 64);
    InvariantMeasure imf = solve_invariant_measure(fail);
    const double i2f = oracles::integrate(
        [](double s) {
            return std::sin(2.0 * M_PI * s) *
                   std::exp(std::sin(2.0 * M_PI * s) / (2.0 * M_PI));
        },
        0.0, 1.0);
    CHECK(i2f > 1e-3);
    CHECK(imf.centering_defect[1] > 1e-3);
    CHECK((imf.centering_defect[1] > 0) == (i2f > 0));  // consistent sign
    CHECK(std::abs(imf.centering_defect[0]) <= 1e-10);
    CHECK(classify_centering(imf.centering_defect) == CenteringStatus::NonCentered);
}

TEST_CASE("centering defect operation") {
    CoefficientSet cs = coeffs_2d("1", "0", "1", "0", "cos(2*pi*y1)", 32);
    ScalarField m = ScalarField::constant(cs.grid(), 1.0);
    Eigen::VectorXd c = centering_defect(cs, m);
    CHECK(c.cwiseAbs().maxCoeff() <= 1e-14);

    CoefficientSet zero = coeffs_2d("1", "0", "1", "0", "0", 32);
    CHECK(centering_defect(zero, m).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("residual and positivity are certified") {
    CoefficientSet cs = coeffs_1d("1", "cos(2*pi*y1)");
    InvariantMeasure im = solve_invariant_measure(cs);
    CHECK(im.residual <= 1e-10);
    CHECK(im.min_value > 0.5);
    CHECK(im.max_value < 1.5);

    // under-resolution must be reported, not silently absorbed
    InvariantMeasureOptions strict;
    strict.tol = 1e-30;
    CHECK_THROWS_AS(solve_invariant_measure(cs, strict), ResolutionError);
}
