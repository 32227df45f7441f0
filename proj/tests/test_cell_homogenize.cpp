#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "perihom/cell_homogenize.hpp"

using namespace perihom;

namespace {

CoefficientSet coeffs_2d(const std::string& b1, const std::string& b2, int n = 128) {
    TorusGrid g = TorusGrid::square(n);
    auto e = [](const std::string& s) { return parse_expression(s, 2); };
    return sample_coefficients({{e("1"), e("0")}, {e("0"), e("1")}}, {e(b1), e(b2)}, g);
}

CoefficientSet coeffs_1d(const std::string& a, const std::string& b, int n = 256) {
    TorusGrid g = TorusGrid::line(n);
    return sample_coefficients({{parse_expression(a, 1)}}, {parse_expression(b, 1)}, g);
}

struct Setup {
    CoefficientSet cs;
    InvariantMeasure im;
    TransformedCoefficients tc;
};

Setup make_setup(CoefficientSet cs) {
    InvariantMeasure im = solve_invariant_measure(cs);
    TransformedCoefficients tc = transform(cs, im);
    return {std::move(cs), std::move(im), std::move(tc)};
}

ScalarField sample2(const std::string& src, const TorusGrid& g) {
    return sample_scalar(parse_expression(src, g.dim()), g);
}

}  // namespace

TEST_CASE("q = I gives zero correctors and a_bar = I") {
    Setup s = make_setup(coeffs_2d("0", "0", 32));
    HomogenizationResult h = homogenize(s.tc, s.cs);
    for (int j = 0; j < 2; ++j) {
        CHECK(h.cells.chi[j].values().abs().maxCoeff() <= 1e-10);
        CHECK(h.cells.chi_nondiv[j].values().abs().maxCoeff() <= 1e-10);
    }
    CHECK((h.tensor.a_bar - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(h.tensor.lambda1_check == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("constant q from the harmonic 1D case forces chi = 0 and a_bar = sqrt(3)") {
    Setup s = make_setup(coeffs_1d("2+sin(2*pi*y1)", "0"));
    // q = a~ m is the constant sqrt(3)
    CHECK((s.tc.q.comp(0, 0).values() - std::sqrt(3.0)).abs().maxCoeff() <= 1e-9);
    HomogenizationResult h = homogenize(s.tc, s.cs);
    CHECK(h.cells.chi[0].values().abs().maxCoeff() <= 1e-8);
    CHECK(h.tensor.a_bar(0, 0) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-8));

    // independent oracle: the 1D effective coefficient is 1/int(1/a~)
    const double harmonic_mean = 1.0 / oracles::integrate(
        [](double y) { return 1.0 / (2.0 + std::sin(2.0 * M_PI * y)); }, 0.0, 1.0);
    CHECK(h.tensor.a_bar(0, 0) == doctest::Approx(harmonic_mean).epsilon(1e-9));
}

TEST_CASE("shear cell problems have the analytic correctors") {
    Setup s = make_setup(coeffs_2d("0", "cos(2*pi*y1)"));
    ScalarField chi1 = solve_cell_divergence(s.tc.q, 1);
    ScalarField chi2 = solve_cell_divergence(s.tc.q, 2);
    CHECK(chi1.values().abs().maxCoeff() <= 1e-10);
    ScalarField expect = sample2("cos(2*pi*y1)/(4*pi^2)", s.cs.grid());
    CHECK((chi2.values() - expect.values()).abs().maxCoeff() <= 1e-10);

    // the non-divergence form coincides (a~ = I)
    ScalarField chit2 = solve_cell_nondivergence(s.cs, 2);
    CHECK((chit2.values() - expect.values()).abs().maxCoeff() <= 1e-10);
    CHECK(std::abs(mean(chi2)) <= 1e-12);
    CHECK(std::abs(mean(chit2)) <= 1e-12);
}

TEST_CASE("1D centered cell problem: chi' = c/m~ - 1") {
    Setup s = make_setup(coeffs_1d("1", "cos(2*pi*y1)"));
    ScalarField chit = solve_cell_nondivergence(s.cs, 1);

    // oracle: c = 1/int(1/m~), m~ = exp(sin/2pi)/Z
    const double Z = oracles::integrate(
        [](double y) { return std::exp(std::sin(2.0 * M_PI * y) / (2.0 * M_PI)); }, 0.0, 1.0);
    const double invint = oracles::integrate(
        [&](double y) { return Z * std::exp(-std::sin(2.0 * M_PI * y) / (2.0 * M_PI)); }, 0.0,
        1.0);
    const double c = 1.0 / invint;
    ScalarField dchit = partial_derivative(chit, 0);
    double worst = 0.0;
    for (int k = 0; k < 256; ++k) {
        const double y = k / 256.0;
        const double mt = std::exp(std::sin(2.0 * M_PI * y) / (2.0 * M_PI)) / Z;
        worst = std::max(worst, std::abs(dchit[k] - (c / mt - 1.0)));
    }
    CHECK(worst <= 1e-9);
}

TEST_CASE("chi~ = chi identification for centered cases") {
    for (const auto& pair :
         {std::pair<std::string, std::string>{"0", "cos(2*pi*y1)"},
          {"cos(2*pi*y1)", "cos(2*pi*y1)"},
          {"sin(2*pi*y2)", "cos(2*pi*y1)"}}) {
        CAPTURE(pair.first);
        CAPTURE(pair.second);
        Setup s = make_setup(coeffs_2d(pair.first, pair.second));
        HomogenizationResult h = homogenize(s.tc, s.cs);
        CHECK(h.cells.identification_gap() <= 1e-7);
    }
    Setup s1 = make_setup(coeffs_1d("2+sin(2*pi*y1)", "cos(2*pi*y1)", 128));
    HomogenizationResult h1 = homogenize(s1.tc, s1.cs);
    CHECK(h1.cells.identification_gap() <= 1e-7);
}

TEST_CASE("shear homogenized tensor: diag(1, 1 + 1/(8 pi^2))") {
    Setup s = make_setup(coeffs_2d("0", "cos(2*pi*y1)"));
    HomogenizationResult h = homogenize(s.tc, s.cs);
    Eigen::Matrix2d expect = Eigen::Matrix2d::Identity();
    expect(1, 1) += 1.0 / (8.0 * kPi * kPi);
    CHECK((h.tensor.a_bar - expect).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK(h.tensor.cross_formula_gap <= 1e-8);
    // a_bar is symmetric by construction and elliptic
    CHECK(h.tensor.a_bar(0, 1) == h.tensor.a_bar(1, 0));
    CHECK(h.tensor.lambda1_check >= s.tc.lambda1 - 1e-10);
}

TEST_CASE("both tensor formulas agree for a genuinely varying measure") {
    Setup s = make_setup(coeffs_2d("cos(2*pi*y1)", "cos(2*pi*y1)"));
    HomogenizationResult h = homogenize(s.tc, s.cs);
    CHECK(h.tensor.cross_formula_gap <= 1e-8);
    CHECK(h.tensor.lambda1_check >= s.tc.lambda1 - 1e-10);
    CHECK((h.tensor.a_bar - h.tensor.a_bar.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("coordinate relabeling permutes a_bar") {
    Setup s = make_setup(coeffs_2d("0", "cos(2*pi*y1)"));
    HomogenizationResult h = homogenize(s.tc, s.cs);
    // swap axes: b' = (cos(2 pi y2), 0)
    TorusGrid g = TorusGrid::square(128);
    auto e = [](const std::string& src) { return parse_expression(src, 2); };
    CoefficientSet swapped = sample_coefficients({{e("1"), e("0")}, {e("0"), e("1")}},
                                                 {e("cos(2*pi*y2)"), e("0")}, g);
    Setup s2 = make_setup(std::move(swapped));
    HomogenizationResult h2 = homogenize(s2.tc, s2.cs);

    Eigen::Matrix2d P;
    P << 0, 1, 1, 0;
    Eigen::Matrix2d permuted = P * h.tensor.a_bar * P.transpose();
    CHECK((h2.tensor.a_bar - permuted).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("constant a~ with zero drift returns a_bar = a~ exactly") {
    TorusGrid g = TorusGrid::square(32);
    auto e = [](const std::string& s_) { return parse_expression(s_, 2); };
    CoefficientSet cs = sample_coefficients({{e("3"), e("1")}, {e("1"), e("2")}},
                                            {e("0"), e("0")}, g);
    Setup s = make_setup(std::move(cs));
    HomogenizationResult h = homogenize(s.tc, s.cs);
    Eigen::Matrix2d expect;
    expect << 3, 1, 1, 2;
    CHECK((h.tensor.a_bar - expect).cwiseAbs().maxCoeff() <= 1e-11);
}
