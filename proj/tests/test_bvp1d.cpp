#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "perihom/bvp1d.hpp"
#include "perihom/cell_homogenize.hpp"

using namespace perihom;

namespace {

struct Setup {
    CoefficientSet cs;
    InvariantMeasure im;
    TransformedCoefficients tc;
};

Setup setup_1d(const std::string& a, const std::string& b, int n = 256) {
    TorusGrid g = TorusGrid::line(n);
    CoefficientSet cs =
        sample_coefficients({{parse_expression(a, 1)}}, {parse_expression(b, 1)}, g);
    InvariantMeasure im = solve_invariant_measure(cs);
    TransformedCoefficients tc = transform(cs, im);
    return {std::move(cs), std::move(im), std::move(tc)};
}

BVProblem linear_problem() {
    BVProblem prob;  // f = 0, g = (0, 1)
    prob.g0 = 0.0;
    prob.g1 = 1.0;
    return prob;
}

double mtilde(double y) {
    static const double Z = oracles::integrate(
        [](double s) { return std::exp(std::sin(2.0 * M_PI * s) / (2.0 * M_PI)); }, 0.0, 1.0);
    return std::exp(std::sin(2.0 * M_PI * y) / (2.0 * M_PI)) / Z;
}

}  // namespace

TEST_CASE("constant coefficients reproduce u(x) = x exactly") {
    Setup s = setup_1d("1", "0");
    DiscreteSolution u = solve_eps_1d(s.tc, linear_problem(), 0.25);
    CHECK((u.values - u.nodes).abs().maxCoeff() <= 1e-13);
    CHECK((u.deriv - 1.0).abs().maxCoeff() <= 2e-12);
    CHECK(u.values[0] == 0.0);
    CHECK(u.values[u.values.size() - 1] == 1.0);
}

TEST_CASE("cosine-drift problem matches the closed form u' = c_eps / m~(x/eps)") {
    Setup s = setup_1d("1", "cos(2*pi*y1)");
    const double eps = 1.0 / 16;
    DiscreteSolution u = solve_eps_1d(s.tc, linear_problem(), eps);

    const double c_eps =
        1.0 / oracles::integrate_osc([&](double x) { return 1.0 / mtilde(x / eps); }, 0.0, 1.0);
    double worst = 0.0;
    for (Eigen::Index i = 0; i < u.nodes.size(); ++i)
        worst = std::max(worst, std::abs(u.deriv[i] - c_eps / mtilde(u.nodes[i] / eps)));
    CHECK(worst <= 1e-9);

    // and the solution itself against quadrature of the closed-form slope
    const double mid = oracles::integrate_osc(
        [&](double x) { return c_eps / mtilde(x / eps); }, 0.0, 0.5);
    const Eigen::Index imid = (u.nodes.size() - 1) / 2;
    CHECK(u.values[imid] == doctest::Approx(mid).epsilon(1e-10));
}

TEST_CASE("homogenized solve: parabola for constant load") {
    BVProblem prob;
    prob.f = parse_expression("1", 1);
    Eigen::ArrayXd nodes = Eigen::ArrayXd::LinSpaced(257, 0.0, 1.0);
    SUBCASE("a_bar = 1: u = x(1-x)/2") {
        HomogenizedSolution u = solve_homogenized_1d(1.0, prob, nodes);
        double worst = 0.0;
        for (Eigen::Index i = 0; i < nodes.size(); ++i)
            worst = std::max(worst,
                             std::abs(u.sol.values[i] - 0.5 * nodes[i] * (1.0 - nodes[i])));
        CHECK(worst <= 1e-13);
    }
    SUBCASE("a_bar = sqrt(3): u = x(1-x)/(2 sqrt(3))") {
        HomogenizedSolution u = solve_homogenized_1d(std::sqrt(3.0), prob, nodes);
        double worst = 0.0;
        for (Eigen::Index i = 0; i < nodes.size(); ++i)
            worst = std::max(
                worst, std::abs(u.sol.values[i] -
                                nodes[i] * (1.0 - nodes[i]) / (2.0 * std::sqrt(3.0))));
        CHECK(worst <= 1e-13);
        CHECK(u.second.maxCoeff() == doctest::Approx(-1.0 / std::sqrt(3.0)));
    }
    SUBCASE("f = 0 linear data") {
        BVProblem lin = linear_problem();
        HomogenizedSolution u = solve_homogenized_1d(2.0, lin, nodes);
        CHECK((u.sol.values - nodes).abs().maxCoeff() <= 1e-14);
    }
}

TEST_CASE("Dirichlet corrector") {
    SUBCASE("q = 1: Phi = x for every eps") {
        Setup s = setup_1d("1", "0");
        CorrectorSolution phi = dirichlet_corrector_1d(s.tc, 0.125, Domain1D{});
        CHECK(phi.sup_deviation <= 1e-13);
        CHECK((phi.sol.deriv - 1.0).abs().maxCoeff() <= 1e-12);
    }
    SUBCASE("constant q cancels") {
        Setup s = setup_1d("2+sin(2*pi*y1)", "0");  // q = sqrt(3) constant
        CorrectorSolution phi = dirichlet_corrector_1d(s.tc, 0.125, Domain1D{});
        CHECK(phi.sup_deviation <= 1e-10);
    }
    SUBCASE("oscillating q: deviation is O(eps) with the oscillation constant") {
        Setup s = setup_1d("1", "cos(2*pi*y1)");  // q = m~
        const double eps = 1.0 / 16;
        CorrectorSolution phi = dirichlet_corrector_1d(s.tc, eps, Domain1D{});
        // |Phi - x| <= eps * osc where osc bounds the antiderivative of
        // 1/m~ minus its mean over one period
        const double inv_mean =
            oracles::integrate([](double y) { return 1.0 / mtilde(y); }, 0.0, 1.0);
        double osc = 0.0;
        for (int k = 0; k <= 64; ++k) {
            const double y = k / 64.0;
            const double dev = oracles::integrate(
                [&](double t) { return 1.0 / mtilde(t) - inv_mean; }, 0.0, y);
            osc = std::max(osc, std::abs(dev));
        }
        CHECK(phi.sup_deviation <= 1.05 * eps * osc / inv_mean + 1e-12);
        CHECK(phi.sup_deviation >= 0.2 * eps * osc / inv_mean);
    }
}

TEST_CASE("error norms vanish on identical inputs") {
    Setup s = setup_1d("1", "0");
    BVProblem prob = linear_problem();
    DiscreteSolution u = solve_eps_1d(s.tc, prob, 0.25);
    HomogenizedSolution uh = solve_homogenized_1d(1.0, prob, u.nodes);
    CorrectorSolution phi = dirichlet_corrector_1d(s.tc, 0.25, prob.domain);
    ErrorRecord err = error_norms(u, uh, phi);
    CHECK(err.l2 <= 1e-12);
    CHECK(err.linf <= 1e-12);
    CHECK(err.h1_raw <= 1e-11);
    CHECK(err.h1_corrected <= 1e-11);
}

TEST_CASE("corrected H1 error halves with eps (closed-form quadrature check)") {
    Setup s = setup_1d("1", "cos(2*pi*y1)");
    BVProblem prob;
    prob.f = parse_expression("1", 1);
    const double a_bar = 1.0 / oracles::integrate(
        [](double y) { return 1.0 / mtilde(y); }, 0.0, 1.0);

    auto corrected = [&](double eps) {
        DiscreteSolution u = solve_eps_1d(s.tc, prob, eps);
        HomogenizedSolution uh = solve_homogenized_1d(a_bar, prob, u.nodes);
        CorrectorSolution phi = dirichlet_corrector_1d(s.tc, eps, prob.domain);
        return error_norms(u, uh, phi);
    };
    ErrorRecord e32 = corrected(1.0 / 32);
    ErrorRecord e64 = corrected(1.0 / 64);
    CHECK(e32.h1_corrected / e64.h1_corrected == doctest::Approx(2.0).epsilon(0.15));
    // raw H1 error does not decay: the gradients oscillate at O(1)
    CHECK(e64.h1_raw >= 0.5 * e32.h1_raw);
    CHECK(e64.h1_raw > 10.0 * e64.h1_corrected);
}

TEST_CASE("rate fitting") {
    std::vector<Real> eps = {1.0 / 8, 1.0 / 16, 1.0 / 32, 1.0 / 64, 1.0 / 128};
    SUBCASE("exact first order") {
        std::vector<Real> err;
        for (Real e : eps) err.push_back(e);
        RateFit f = fit_rate(eps, err);
        CHECK(f.slope == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(f.max_log_residual <= 1e-12);
    }
    SUBCASE("exact second order") {
        std::vector<Real> err;
        for (Real e : eps) err.push_back(e * e);
        CHECK(fit_rate(eps, err).slope == doctest::Approx(2.0).epsilon(1e-12));
    }
    SUBCASE("zero errors are excluded with a note") {
        std::vector<Real> err = {0.0, 1.0 / 16, 1.0 / 32, 1.0 / 64, 1.0 / 128};
        RateFit f = fit_rate(eps, err);
        CHECK(f.used_indices.size() == 4);
        CHECK(!f.note.empty());
    }
    SUBCASE("too few pairs throws") {
        std::vector<Real> e2 = {0.5, 0.25, 0.125};
        std::vector<Real> r2 = {1, 2, 3};
        CHECK_THROWS_AS(fit_rate(e2, r2), ConfigError);
    }
    SUBCASE("pre-asymptotic exclusion") {
        std::vector<Real> err;
        for (Real e : eps) err.push_back(e);
        err[0] *= 3.0;  // contaminate the largest eps
        RateFit f = fit_rate(eps, err, true);
        CHECK(f.used_indices.size() == 4);
        CHECK(f.slope == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(f.note.find("pre-asymptotic") != std::string::npos);
    }
}

TEST_CASE("full rate sweep on the cosine-drift problem") {
    Setup s = setup_1d("1", "cos(2*pi*y1)");
    BVProblem prob;
    prob.f = parse_expression("1", 1);
    prob.eps_list = {1.0 / 8, 1.0 / 16, 1.0 / 32, 1.0 / 64, 1.0 / 128};

    HomogenizationResult h = homogenize(s.tc, s.cs);
    RateReport rep = rate_sweep(s.tc, prob, h.tensor.a_bar(0, 0));

    CHECK(rep.l2.slope >= 0.9);
    CHECK(rep.linf.slope >= 0.9);
    CHECK(rep.h1_corrected.slope >= 0.9);
    CHECK(rep.h1_raw.slope <= 0.2);
    const auto& last = rep.rows.back();
    CHECK(last.err.h1_raw >= 10.0 * last.err.h1_corrected);

    // uniform Lipschitz: the gradient sup stabilizes
    CHECK(rep.lipschitz.grad_sup_spread < 0.10);
    // sharpness: the C^{0,1/2} seminorm of u' grows like eps^{-1/2}
    CHECK(rep.lipschitz.holder_growth_exponent == doctest::Approx(0.5).epsilon(0.2));
}

TEST_CASE("Lipschitz scan on the linear-data problem") {
    Setup s = setup_1d("1", "cos(2*pi*y1)");
    BVProblem prob = linear_problem();
    std::vector<Real> eps = {1.0 / 16, 1.0 / 32, 1.0 / 64, 1.0 / 128};
    LipschitzScan scan = lipschitz_scan(s.tc, prob, eps);

    // closed form: |u'|_inf = c_eps max(1/m~); c_eps converges as eps -> 0
    const double inv_mean =
        oracles::integrate([](double y) { return 1.0 / mtilde(y); }, 0.0, 1.0);
    double inv_max = 0.0;
    for (int k = 0; k < 512; ++k) inv_max = std::max(inv_max, 1.0 / mtilde(k / 512.0));
    const double limit = inv_max / inv_mean;
    for (const auto& row : scan.rows)
        CHECK(row.grad_sup == doctest::Approx(limit).epsilon(0.03));
    CHECK(scan.grad_sup_spread < 0.05);
    CHECK(scan.holder_growth_exponent == doctest::Approx(0.5).epsilon(0.2));
}

TEST_CASE("mesh budget refusal names the required size") {
    Setup s = setup_1d("1", "0");
    SolveOptions opts;
    opts.max_intervals = 1000;
    CHECK_THROWS_AS(solve_eps_1d(s.tc, linear_problem(), 1.0 / 64, opts), ResolutionError);
}

TEST_CASE("non-centered counterexample") {
    std::vector<Real> eps = {0.5, 0.25, 0.1, 0.05, 0.02, 0.01};
    CounterexampleReport rep = noncentered_counterexample(eps);
    for (const auto& row : rep.rows) {
        CAPTURE(row.eps);
        CHECK(row.closed_form_gap <= 1e-10);
        CHECK(row.sup_norm <= row.eps);
    }
    CHECK(rep.sup_bounded_by_eps);

    // spec spot values
    CHECK(counterexample_closed_form(0.01, 0.5) == doctest::Approx(-0.005).epsilon(1e-10));
    CHECK(counterexample_closed_form(0.5, 0.0) == 0.0);

    // eps -> 0: |u_eps|_inf / eps stays bounded (the limit of the closed form)
    for (const auto& row : rep.rows) CHECK(row.sup_norm / row.eps <= 1.0);
}
