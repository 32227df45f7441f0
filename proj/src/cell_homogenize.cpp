#include "perihom/cell_homogenize.hpp"

#include <cmath>
#include <limits>

#include "perihom/linsolve.hpp"

namespace perihom {

namespace {

/// (-c0 Delta)^{-1} restricted to mean-zero data.
ApplyFn laplace_precond(const TorusGrid& g, Real c0) {
    return [&g, c0](const Eigen::VectorXd& r) -> Eigen::VectorXd {
        ScalarField rf(g, r.array() - r.array().mean());
        ScalarField h = solve_poisson_torus(rf, 1e-6);
        return (-1.0 / c0) * h.values().matrix();
    };
}

Real sup_abs(const MatrixField& m) {
    Real s = 0.0;
    for (int i = 0; i < m.dim(); ++i)
        for (int j = 0; j < m.dim(); ++j)
            s = std::max(s, m.comp(i, j).values().abs().maxCoeff());
    return s;
}

struct CellOutcome {
    ScalarField chi;
    Real residual = 0.0;  // |A chi - rhs|_inf / scale
    std::string method = "trivial";
};

CellOutcome cell_divergence_impl(const MatrixField& q, int j, const CellOptions& opts) {
    const TorusGrid& g = q.grid();
    const int d = g.dim();
    if (j < 1 || j > d) throw ConfigError("cell index out of range");
    const int jc = j - 1;

    // rhs = d_i q_ij; operator A chi = -d_i(q_ik d_k chi)
    ScalarField rhs = ScalarField::zero(g);
    for (int i = 0; i < d; ++i) rhs = rhs + partial_derivative(q.comp(i, jc), i);

    const Real scale = kTwoPi * kTwoPi * std::max<Real>(sup_abs(q), 1.0);
    if (rhs.values().abs().maxCoeff() <= opts.tol * scale) {
        // constant-coefficient column: chi = 0
        return {ScalarField::zero(g), rhs.values().abs().maxCoeff() / scale, "trivial"};
    }

    // the composed first derivatives annihilate the Nyquist plane, so the
    // solve runs on its complement with a penalty pinning that plane
    auto apply_raw = [&](const ScalarField& chi) -> ScalarField {
        std::vector<ScalarField> grad;
        grad.reserve(d);
        for (int k = 0; k < d; ++k) grad.push_back(partial_derivative(chi, k));
        ScalarField out = ScalarField::zero(g);
        for (int i = 0; i < d; ++i) {
            RealArray flux = RealArray::Zero(chi.size());
            for (int k = 0; k < d; ++k) flux += q.comp(i, k).values() * grad[k].values();
            out = out - partial_derivative(ScalarField(g, std::move(flux)), i);
        }
        return out;
    };
    auto apply = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
        ScalarField chi(g, v.array());
        ScalarField chip = project_out_nyquist(chi);
        ScalarField out = apply_raw(chip);
        return out.values().matrix() +
               scale * (chi.values() - chip.values()).matrix();
    };

    // sym(q) spectrum sets the preconditioner strength
    Real lo, hi;
    {
        std::vector<ScalarField> sym_comps;
        for (int i = 0; i < d; ++i)
            for (int k = 0; k < d; ++k)
                sym_comps.push_back(
                    ScalarField(g, 0.5 * (q.comp(i, k).values() + q.comp(k, i).values())));
        MatrixField sym_q(g, std::move(sym_comps), MatrixSymmetry::Symmetric);
        lo = min_eigenvalue(sym_q);
        hi = max_eigenvalue(sym_q);
    }
    const Real c0 = 0.5 * (lo + hi);

    SolveResult sol = solve_cascade(apply, laplace_precond(g, c0), rhs.values().matrix(),
                                    0.01 * opts.tol, opts.max_iter, opts.max_dense_n);

    ScalarField chi(g, sol.x.array() - sol.x.array().mean());
    const Real res =
        (apply_raw(chi).values() - rhs.values()).abs().maxCoeff() / scale;
    if (res > opts.tol)
        throw ResolutionError("divergence-form cell residual " + std::to_string(res) +
                              " exceeds tolerance (method " + sol.method + ")");
    return {std::move(chi), res, sol.method};
}

CellOutcome cell_nondivergence_impl(const CoefficientSet& coeffs, int j,
                                    const CellOptions& opts) {
    const TorusGrid& g = coeffs.grid();
    const int d = g.dim();
    if (j < 1 || j > d) throw ConfigError("cell index out of range");
    const ScalarField& rhs_field = coeffs.b_tilde.comp(j - 1);

    const Real scale = kTwoPi * kTwoPi * std::max<Real>(coeffs.Lambda, 1.0);
    if (rhs_field.values().abs().maxCoeff() <= opts.tol * scale)
        return {ScalarField::zero(g), rhs_field.values().abs().maxCoeff() / scale, "trivial"};

    // A chi = -a~_ik d_i d_k chi - b~_i d_i chi
    auto apply_raw = [&](const ScalarField& chi) -> RealArray {
        std::vector<ScalarField> grad;
        grad.reserve(d);
        for (int i = 0; i < d; ++i) grad.push_back(partial_derivative(chi, i));
        RealArray out = RealArray::Zero(chi.size());
        for (int i = 0; i < d; ++i) {
            for (int k = i; k < d; ++k) {
                ScalarField dik = partial_derivative(grad[i], k);
                const Real w = (k == i) ? 1.0 : 2.0;  // symmetric a~ pairs (i,k),(k,i)
                out -= w * coeffs.a_tilde.comp(i, k).values() * dik.values();
            }
            out -= coeffs.b_tilde.comp(i).values() * grad[i].values();
        }
        return out;
    };
    // constants and the Nyquist plane are both null directions of the
    // spectral discretization: project them out and penalize the latter
    auto apply_proj = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
        ScalarField chi(g, v.array());
        ScalarField chip = project_out_nyquist(chi);
        RealArray out = apply_raw(chip);
        out -= out.mean();
        return out.matrix() + scale * (chi.values() - chip.values()).matrix();
    };

    Eigen::VectorXd rhs_proj = rhs_field.values().matrix();
    rhs_proj.array() -= rhs_proj.array().mean();

    const Real c0 = 0.5 * (coeffs.lambda + max_eigenvalue(coeffs.a_tilde));
    SolveResult sol = solve_cascade(apply_proj, laplace_precond(g, c0), rhs_proj, 0.01 * opts.tol,
                                    opts.max_iter, opts.max_dense_n);

    ScalarField chi(g, sol.x.array() - sol.x.array().mean());
    // certify against the unprojected equation: the continuum solution
    // satisfies it pointwise, so a resolved grid must too
    const Real res = (apply_raw(chi) - rhs_field.values()).abs().maxCoeff() / scale;
    if (res > opts.tol)
        throw ResolutionError("non-divergence cell residual " + std::to_string(res) +
                              " exceeds tolerance (method " + sol.method + ")");
    return {std::move(chi), res, sol.method};
}

}  // namespace

ScalarField solve_cell_divergence(const MatrixField& q, int j, const CellOptions& opts) {
    return cell_divergence_impl(q, j, opts).chi;
}

ScalarField solve_cell_nondivergence(const CoefficientSet& coeffs, int j,
                                     const CellOptions& opts) {
    return cell_nondivergence_impl(coeffs, j, opts).chi;
}

CellSolution solve_cells(const TransformedCoefficients& tc, const CoefficientSet& coeffs,
                         const CellOptions& opts) {
    const int d = tc.dim();
    CellSolution out;
    out.residual_div = Eigen::VectorXd::Zero(d);
    out.residual_nondiv = Eigen::VectorXd::Zero(d);
    for (int j = 1; j <= d; ++j) {
        CellOutcome div = cell_divergence_impl(tc.q, j, opts);
        CellOutcome nondiv = cell_nondivergence_impl(coeffs, j, opts);
        out.residual_div[j - 1] = div.residual;
        out.residual_nondiv[j - 1] = nondiv.residual;
        out.solver_div = div.method;
        out.solver_nondiv = nondiv.method;
        out.chi.push_back(std::move(div.chi));
        out.chi_nondiv.push_back(std::move(nondiv.chi));
    }
    return out;
}

HomogenizedTensor homogenized_tensor(const MatrixField& q, const MatrixField& a_tilde,
                                     const ScalarField& m, const CellSolution& cell,
                                     Real cross_tol) {
    const TorusGrid& g = q.grid();
    const int d = g.dim();
    if (static_cast<int>(cell.chi.size()) != d || static_cast<int>(cell.chi_nondiv.size()) != d)
        throw ConfigError("cell solution dimension mismatch");

    // all products on the 2x grid: the means then carry no aliasing
    auto up = [](const ScalarField& f) { return upsample(f, 2).values(); };

    std::vector<RealArray> grad_chi(d * d), grad_chit(d * d);  // [j*d+k] = d_k chi^j
    for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k) {
            grad_chi[j * d + k] = up(partial_derivative(cell.chi[j], k));
            grad_chit[j * d + k] = up(partial_derivative(cell.chi_nondiv[j], k));
        }
    std::vector<RealArray> qv(d * d), av(d * d);
    for (int i = 0; i < d; ++i)
        for (int k = 0; k < d; ++k) {
            qv[i * d + k] = up(q.comp(i, k));
            av[i * d + k] = up(a_tilde.comp(i, k));
        }
    RealArray mv = up(m);

    HomogenizedTensor out;
    out.q_bar = Eigen::MatrixXd::Zero(d, d);
    out.a_bar_direct = Eigen::MatrixXd::Zero(d, d);

    const std::int64_t NF = mv.size();
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            RealArray acc = RealArray::Zero(NF);
            RealArray acc_dir = RealArray::Zero(NF);
            for (int k = 0; k < d; ++k) {
                RealArray left = grad_chi[i * d + k];
                RealArray left_t = grad_chit[i * d + k];
                if (k == i) {
                    left += 1.0;
                    left_t += 1.0;
                }
                for (int l = 0; l < d; ++l) {
                    RealArray right = grad_chi[j * d + l];
                    RealArray right_t = grad_chit[j * d + l];
                    if (l == j) {
                        right += 1.0;
                        right_t += 1.0;
                    }
                    acc += left * qv[k * d + l] * right;
                    acc_dir += left_t * av[k * d + l] * right_t;
                }
            }
            out.q_bar(i, j) = acc.mean();
            out.a_bar_direct(i, j) = (acc_dir * mv).mean();
        }
    }

    out.a_bar = 0.5 * (out.q_bar + out.q_bar.transpose());
    out.cross_formula_gap = (out.a_bar - out.a_bar_direct).cwiseAbs().maxCoeff();
    if (out.cross_formula_gap > cross_tol)
        throw ConsistencyError(
            "homogenized tensor formulas disagree: |a_bar - a_bar_direct|_max = " +
            std::to_string(out.cross_formula_gap) + " > " + std::to_string(cross_tol));

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(out.a_bar, Eigen::EigenvaluesOnly);
    out.lambda1_check = es.eigenvalues().minCoeff();
    return out;
}

HomogenizationResult homogenize(const TransformedCoefficients& tc, const CoefficientSet& coeffs,
                                const CellOptions& opts) {
    HomogenizationResult out{solve_cells(tc, coeffs, opts), {}};
    out.tensor = homogenized_tensor(tc.q, coeffs.a_tilde, tc.m, out.cells);
    return out;
}

}  // namespace perihom
