#include "perihom/bvp1d.hpp"

#include <cmath>
#include <limits>

namespace perihom {

namespace {

constexpr double kGaussNode[3] = {0.23861918608319690863, 0.66120938646626451366,
                                  0.93246951420315202781};
constexpr double kGaussWeight[3] = {0.46791393457269104739, 0.36076157304813860757,
                                    0.17132449237917034504};

/// 6-point Gauss-Legendre on [a, b].
template <typename Fn>
double gauss_panel(Fn&& fn, double a, double b) {
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double acc = 0.0;
    for (int q = 0; q < 3; ++q)
        acc += kGaussWeight[q] *
               (fn(mid - half * kGaussNode[q]) + fn(mid + half * kGaussNode[q]));
    return acc * half;
}

/// Fill the 6 Gauss abscissae of [a, b] in ascending order.
void gauss_points(double a, double b, double* pts) {
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    pts[0] = mid - half * kGaussNode[2];
    pts[1] = mid - half * kGaussNode[1];
    pts[2] = mid - half * kGaussNode[0];
    pts[3] = mid + half * kGaussNode[0];
    pts[4] = mid + half * kGaussNode[1];
    pts[5] = mid + half * kGaussNode[2];
}

const double kGaussW6[6] = {kGaussWeight[2], kGaussWeight[1], kGaussWeight[0],
                            kGaussWeight[0], kGaussWeight[1], kGaussWeight[2]};

Eigen::ArrayXd uniform_nodes(const Domain1D& dom, std::int64_t intervals) {
    Eigen::ArrayXd nodes(intervals + 1);
    const double h = (dom.x1 - dom.x0) / intervals;
    for (std::int64_t i = 0; i <= intervals; ++i) nodes[i] = dom.x0 + i * h;
    nodes[intervals] = dom.x1;
    return nodes;
}

std::int64_t intervals_for(const Domain1D& dom, Real eps, const SolveOptions& opts) {
    const double len = dom.x1 - dom.x0;
    if (len <= 0.0) throw ConfigError("domain must satisfy x0 < x1");
    const std::int64_t m =
        static_cast<std::int64_t>(std::ceil(len / eps * opts.mesh_per_period));
    if (m > opts.max_intervals)
        throw ResolutionError("eps = " + std::to_string(eps) + " needs " + std::to_string(m) +
                              " mesh intervals, above the budget of " +
                              std::to_string(opts.max_intervals) +
                              "; raise max_intervals or lower mesh_per_period");
    return std::max<std::int64_t>(m, 8);
}

/// Composite Simpson on a uniform mesh (3/8 rule tail when the interval
/// count is odd).
double integrate_uniform(const Eigen::ArrayXd& vals, double h) {
    const std::int64_t m = vals.size() - 1;
    if (m < 3) {  // trapezoid, only for degenerate meshes
        double acc = 0.0;
        for (std::int64_t i = 0; i < m; ++i) acc += 0.5 * h * (vals[i] + vals[i + 1]);
        return acc;
    }
    std::int64_t even_part = m;
    double tail = 0.0;
    if (m % 2 != 0) {
        even_part = m - 3;
        const std::int64_t i = even_part;
        tail = 3.0 * h / 8.0 * (vals[i] + 3.0 * vals[i + 1] + 3.0 * vals[i + 2] + vals[i + 3]);
    }
    double acc = vals[0] + vals[even_part];
    for (std::int64_t i = 1; i < even_part; i += 2) acc += 4.0 * vals[i];
    for (std::int64_t i = 2; i < even_part; i += 2) acc += 2.0 * vals[i];
    return acc * h / 3.0 + tail;
}

struct FValue {
    bool zero = true;
    Expression expr;

    double operator()(double x) const {
        if (zero) return 0.0;
        Eigen::VectorXd p(1);
        p[0] = x;
        return evaluate(expr, p);
    }
};

FValue make_f(const BVProblem& prob) {
    FValue f;
    if (!prob.f.empty()) {
        f.zero = false;
        f.expr = prob.f;
    }
    return f;
}

}  // namespace

void validate_eps_list(const std::vector<Real>& eps) {
    if (eps.empty()) throw ConfigError("eps list is empty");
    for (std::size_t i = 0; i < eps.size(); ++i) {
        if (!(eps[i] > 0.0 && eps[i] < 1.0))
            throw ConfigError("eps values must lie in (0,1)");
        if (i > 0 && !(eps[i] < eps[i - 1]))
            throw ConfigError("eps list must be strictly decreasing");
    }
}

DiscreteSolution solve_eps_1d(const TransformedCoefficients& tc, const BVProblem& prob, Real eps,
                              const SolveOptions& opts) {
    if (tc.dim() != 1) throw ConfigError("solve_eps_1d needs 1D transformed coefficients");
    const std::int64_t M = intervals_for(prob.domain, eps, opts);
    Eigen::ArrayXd nodes = uniform_nodes(prob.domain, M);

    TrigInterpolant q_itp(tc.q.comp(0, 0));
    TrigInterpolant m_itp(tc.m);
    FValue f = make_f(prob);

    auto fm = [&](double x) { return f.zero ? 0.0 : f(x) * m_itp.eval1(x / eps); };
    auto invq = [&](double x) { return 1.0 / q_itp.eval1(x / eps); };

    // cumulative F = int f m, G = int 1/q, H = int F/q on the nodes;
    // F at interior Gauss points comes from a nested panel
    Eigen::ArrayXd F(M + 1), G(M + 1), H(M + 1);
    F[0] = G[0] = H[0] = 0.0;
    double pts[6];
    for (std::int64_t i = 0; i < M; ++i) {
        const double a = nodes[i], b = nodes[i + 1];
        gauss_points(a, b, pts);
        const double half = 0.5 * (b - a);
        double dF = 0.0, dG = 0.0, dH = 0.0;
        for (int qn = 0; qn < 6; ++qn) {
            const double s = pts[qn];
            const double iq = invq(s);
            dG += kGaussW6[qn] * iq;
            if (!f.zero) {
                dF += kGaussW6[qn] * fm(s);
                const double Fs = F[i] + gauss_panel(fm, a, s);
                dH += kGaussW6[qn] * Fs * iq;
            }
        }
        F[i + 1] = F[i] + half * dF;
        G[i + 1] = G[i] + half * dG;
        H[i + 1] = H[i] + half * dH;
    }

    const double C = (prob.g1 - prob.g0 + H[M]) / G[M];
    DiscreteSolution out;
    out.nodes = std::move(nodes);
    out.values = prob.g0 + C * G - H;
    out.deriv.resize(M + 1);
    for (std::int64_t i = 0; i <= M; ++i) out.deriv[i] = (C - F[i]) * invq(out.nodes[i]);
    out.values[M] = prob.g1;  // pin the right boundary against quadrature roundoff
    return out;
}

HomogenizedSolution solve_homogenized_1d(Real a_bar, const BVProblem& prob,
                                         const Eigen::ArrayXd& nodes) {
    if (!(a_bar > 0.0)) throw ConfigError("a_bar must be positive");
    const std::int64_t M = nodes.size() - 1;
    FValue f = make_f(prob);

    Eigen::ArrayXd F0(M + 1), P(M + 1);
    F0[0] = P[0] = 0.0;
    double pts[6];
    for (std::int64_t i = 0; i < M; ++i) {
        const double a = nodes[i], b = nodes[i + 1];
        if (f.zero) {
            F0[i + 1] = 0.0;
            P[i + 1] = 0.0;
            continue;
        }
        gauss_points(a, b, pts);
        const double half = 0.5 * (b - a);
        double dF = 0.0, dP = 0.0;
        for (int qn = 0; qn < 6; ++qn) {
            const double s = pts[qn];
            dF += kGaussW6[qn] * f(s);
            const double F0s = F0[i] + gauss_panel(f, a, s);
            dP += kGaussW6[qn] * F0s;
        }
        F0[i + 1] = F0[i] + half * dF;
        P[i + 1] = P[i] + half * dP;
    }

    const double len = prob.domain.x1 - prob.domain.x0;
    const double c = (prob.g1 - prob.g0 + P[M] / a_bar) / len;

    HomogenizedSolution out;
    out.a_bar = a_bar;
    out.sol.nodes = nodes;
    out.sol.values = prob.g0 + c * (nodes - prob.domain.x0) - P / a_bar;
    out.sol.deriv = c - F0 / a_bar;
    out.second.resize(M + 1);
    for (std::int64_t i = 0; i <= M; ++i) out.second[i] = -f(nodes[i]) / a_bar;
    out.sol.values[M] = prob.g1;
    return out;
}

CorrectorSolution dirichlet_corrector_1d(const TransformedCoefficients& tc, Real eps,
                                         const Domain1D& domain, const SolveOptions& opts) {
    if (tc.dim() != 1) throw ConfigError("dirichlet_corrector_1d needs 1D coefficients");
    const std::int64_t M = intervals_for(domain, eps, opts);
    Eigen::ArrayXd nodes = uniform_nodes(domain, M);
    TrigInterpolant q_itp(tc.q.comp(0, 0));
    auto invq = [&](double x) { return 1.0 / q_itp.eval1(x / eps); };

    Eigen::ArrayXd G(M + 1);
    G[0] = 0.0;
    for (std::int64_t i = 0; i < M; ++i)
        G[i + 1] = G[i] + gauss_panel(invq, nodes[i], nodes[i + 1]);

    const double len = domain.x1 - domain.x0;
    CorrectorSolution out;
    out.sol.nodes = nodes;
    out.sol.values = domain.x0 + len * G / G[M];
    out.sol.deriv.resize(M + 1);
    for (std::int64_t i = 0; i <= M; ++i)
        out.sol.deriv[i] = len * invq(nodes[i]) / G[M];
    out.sup_deviation = (out.sol.values - nodes).abs().maxCoeff();
    return out;
}

ErrorRecord error_norms(const DiscreteSolution& u_eps, const HomogenizedSolution& u_hom,
                        const CorrectorSolution& corrector) {
    const std::int64_t M = u_eps.nodes.size() - 1;
    if (u_hom.sol.nodes.size() != u_eps.nodes.size() ||
        corrector.sol.nodes.size() != u_eps.nodes.size())
        throw ConfigError("error_norms needs a common mesh");
    const double h = (u_eps.nodes[M] - u_eps.nodes[0]) / M;

    const Eigen::ArrayXd e = u_eps.values - u_hom.sol.values;
    const Eigen::ArrayXd de = u_eps.deriv - u_hom.sol.deriv;

    ErrorRecord out;
    out.linf = e.abs().maxCoeff();
    out.l2 = std::sqrt(std::max(0.0, integrate_uniform(e.square(), h)));
    out.h1_raw = std::sqrt(std::max(0.0, integrate_uniform(e.square(), h) +
                                             integrate_uniform(de.square(), h)));

    // w = u_eps - u - (Phi - x) u'; w' needs u'' of the homogenized solution
    const Eigen::ArrayXd corr = corrector.sol.values - corrector.sol.nodes;
    const Eigen::ArrayXd dcorr = corrector.sol.deriv - 1.0;
    const Eigen::ArrayXd w = e - corr * u_hom.sol.deriv;
    const Eigen::ArrayXd dw = de - dcorr * u_hom.sol.deriv - corr * u_hom.second;
    out.h1_corrected = std::sqrt(std::max(0.0, integrate_uniform(w.square(), h) +
                                                   integrate_uniform(dw.square(), h)));
    return out;
}

RateFit fit_rate(const std::vector<Real>& eps, const std::vector<Real>& errs,
                 bool drop_preasymptotic) {
    if (eps.size() != errs.size()) throw ConfigError("fit_rate: mismatched lists");

    std::vector<int> used;
    for (int i = 0; i < static_cast<int>(eps.size()); ++i) {
        if (errs[i] < 0.0) throw ConfigError("fit_rate: negative error value");
        if (errs[i] > 0.0) used.push_back(i);
    }
    RateFit fit;
    if (used.size() < eps.size()) fit.note = "excluded exact-zero errors; ";
    if (used.size() < 4)
        throw ConfigError("fit_rate needs at least 4 positive (eps, err) pairs, got " +
                          std::to_string(used.size()));

    auto run = [&](const std::vector<int>& idx, RateFit& f) {
        const int n = static_cast<int>(idx.size());
        Eigen::MatrixXd A(n, 2);
        Eigen::VectorXd y(n);
        for (int r = 0; r < n; ++r) {
            A(r, 0) = std::log(eps[idx[r]]);
            A(r, 1) = 1.0;
            y[r] = std::log(errs[idx[r]]);
        }
        Eigen::Vector2d c = A.colPivHouseholderQr().solve(y);
        f.slope = c[0];
        f.intercept = c[1];
        f.max_log_residual = (A * c - y).cwiseAbs().maxCoeff();
        f.used_indices = idx;
    };

    run(used, fit);
    if (drop_preasymptotic && used.size() > 4) {
        // largest eps comes first (lists are strictly decreasing)
        const int first = used.front();
        Eigen::Vector2d c(fit.slope, fit.intercept);
        const double res0 =
            std::abs(fit.slope * std::log(eps[first]) + fit.intercept - std::log(errs[first]));
        if (res0 > 0.1) {
            std::vector<int> trimmed(used.begin() + 1, used.end());
            RateFit refit;
            refit.note = fit.note + "excluded pre-asymptotic eps = " + std::to_string(eps[first]);
            run(trimmed, refit);
            return refit;
        }
    }
    return fit;
}

namespace {

Real holder_half_seminorm(const Eigen::ArrayXd& nodes, const Eigen::ArrayXd& vals, int window) {
    const std::int64_t n = nodes.size();
    Real best = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
        const std::int64_t jmax = std::min<std::int64_t>(n - 1, i + window);
        for (std::int64_t j = i + 1; j <= jmax; ++j) {
            const Real num = std::abs(vals[j] - vals[i]);
            const Real den = std::sqrt(nodes[j] - nodes[i]);
            if (den > 0.0) best = std::max(best, num / den);
        }
    }
    return best;
}

}  // namespace

LipschitzScan lipschitz_scan(const TransformedCoefficients& tc, const BVProblem& prob,
                             const std::vector<Real>& eps_list, const SolveOptions& opts) {
    validate_eps_list(eps_list);
    LipschitzScan out;
    Real lo = std::numeric_limits<Real>::infinity(), hi = 0.0;
    for (Real eps : eps_list) {
        DiscreteSolution u = solve_eps_1d(tc, prob, eps, opts);
        LipschitzRow row;
        row.eps = eps;
        row.grad_sup = u.deriv.abs().maxCoeff();
        // the seminorm of an eps-oscillation saturates within a few periods
        row.holder_half = holder_half_seminorm(u.nodes, u.deriv, 6 * opts.mesh_per_period);
        lo = std::min(lo, row.grad_sup);
        hi = std::max(hi, row.grad_sup);
        out.rows.push_back(row);
    }
    out.grad_sup_spread = (lo > 0.0) ? hi / lo - 1.0 : std::numeric_limits<Real>::infinity();

    if (eps_list.size() >= 4) {
        std::vector<Real> sem;
        for (const auto& r : out.rows) sem.push_back(r.holder_half);
        RateFit f = fit_rate(eps_list, sem, false);
        out.holder_growth_exponent = -f.slope;  // seminorm ~ eps^{-exponent}
    }
    return out;
}

RateReport rate_sweep(const TransformedCoefficients& tc, const BVProblem& prob, Real a_bar,
                      const SolveOptions& opts) {
    validate_eps_list(prob.eps_list);
    RateReport rep;
    rep.a_bar = a_bar;

    std::vector<Real> l2s, linfs, h1s, h1cs;
    for (Real eps : prob.eps_list) {
        DiscreteSolution u = solve_eps_1d(tc, prob, eps, opts);
        HomogenizedSolution uh = solve_homogenized_1d(a_bar, prob, u.nodes);
        CorrectorSolution phi = dirichlet_corrector_1d(tc, eps, prob.domain, opts);
        ErrorRecord err = error_norms(u, uh, phi);

        SweepRow row;
        row.eps = eps;
        row.err = err;
        row.grad_sup = u.deriv.abs().maxCoeff();
        row.holder_half = holder_half_seminorm(u.nodes, u.deriv, 6 * opts.mesh_per_period);
        rep.rows.push_back(row);

        l2s.push_back(err.l2);
        linfs.push_back(err.linf);
        h1s.push_back(err.h1_raw);
        h1cs.push_back(err.h1_corrected);
    }

    if (prob.eps_list.size() >= 4) {
        rep.l2 = fit_rate(prob.eps_list, l2s, true);
        rep.linf = fit_rate(prob.eps_list, linfs, true);
        rep.h1_raw = fit_rate(prob.eps_list, h1s, false);
        rep.h1_corrected = fit_rate(prob.eps_list, h1cs, true);
    }
    rep.lipschitz = lipschitz_scan(tc, prob, prob.eps_list, opts);
    return rep;
}

Real counterexample_closed_form(Real eps, Real x) {
    return eps * (x - (-std::expm1(-x / eps)) / (-std::expm1(-1.0 / eps)));
}

CounterexampleReport noncentered_counterexample(const std::vector<Real>& eps_list,
                                                const SolveOptions& opts) {
    CounterexampleReport rep;
    rep.note =
        "limit u = 0 is not a solution of any uniformly elliptic problem with f = 1: "
        "homogenization fails without the centering condition";

    for (Real eps : eps_list) {
        if (!(eps > 0.0 && eps < 1.0)) throw ConfigError("eps values must lie in (0,1)");
        const Domain1D dom{0.0, 1.0};
        const std::int64_t M = intervals_for(dom, eps, opts);
        Eigen::ArrayXd nodes = uniform_nodes(dom, M);

        // u'' + (1/eps) u' = 1: integrating factor e^{x/eps} gives
        // u'(x) = C e^{-x/eps} + K(x), K(x) = int_0^x e^{(s-x)/eps} ds,
        // evaluated by a shift-stable panel recurrence.
        auto f_rhs = [](double) { return 1.0; };
        Eigen::ArrayXd K(M + 1);
        K[0] = 0.0;
        double pts[6];
        for (std::int64_t i = 0; i < M; ++i) {
            const double a = nodes[i], b = nodes[i + 1];
            const double decay = std::exp(-(b - a) / eps);
            auto kernel = [&](double s) { return std::exp((s - b) / eps) * f_rhs(s); };
            K[i + 1] = K[i] * decay + gauss_panel(kernel, a, b);
        }
        // u(x) = C eps (1 - e^{-x/eps}) + Q(x), Q = int_0^x K
        Eigen::ArrayXd Q(M + 1);
        Q[0] = 0.0;
        for (std::int64_t i = 0; i < M; ++i) {
            const double a = nodes[i], b = nodes[i + 1];
            gauss_points(a, b, pts);
            const double half = 0.5 * (b - a);
            double dQ = 0.0;
            for (int qn = 0; qn < 6; ++qn) {
                const double s = pts[qn];
                const double decay = std::exp(-(s - a) / eps);
                auto kernel = [&](double t) { return std::exp((t - s) / eps) * f_rhs(t); };
                const double Ks = K[i] * decay + gauss_panel(kernel, a, s);
                dQ += kGaussW6[qn] * Ks;
            }
            Q[i + 1] = Q[i] + half * dQ;
        }
        const double C = -Q[M] / (eps * (-std::expm1(-1.0 / eps)));
        Eigen::ArrayXd u(M + 1);
        for (std::int64_t i = 0; i <= M; ++i)
            u[i] = C * eps * (-std::expm1(-nodes[i] / eps)) + Q[i];

        CounterexampleRow row;
        row.eps = eps;
        row.sup_norm = u.abs().maxCoeff();
        Real gap = 0.0;
        for (std::int64_t i = 0; i <= M; ++i)
            gap = std::max(gap, std::abs(u[i] - counterexample_closed_form(eps, nodes[i])));
        row.closed_form_gap = gap;
        if (row.sup_norm > eps) rep.sup_bounded_by_eps = false;
        rep.rows.push_back(row);
    }
    return rep;
}

}  // namespace perihom
