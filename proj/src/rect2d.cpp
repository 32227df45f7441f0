#include "perihom/rect2d.hpp"

#include <cmath>
#include <functional>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>

#include "perihom/trig_interp.hpp"

namespace perihom {

namespace {

using QEval = std::function<void(double, double, double*)>;  // fills q[4] row-major
using PointFn = std::function<double(double, double)>;

double eval_or_zero(const Expression& e, double x, double y) {
    if (e.empty()) return 0.0;
    Eigen::VectorXd p(2);
    p[0] = x;
    p[1] = y;
    return evaluate(e, p);
}

/// Conservative 9-point assembly and BiCGSTAB/ILUT solve.
Rect2DSolution solve_fd(const QEval& q_at, const PointFn& rhs_at, const PointFn& g_at,
                        const Domain2D& dom, int nx, int ny, Real tol) {
    const std::int64_t nxl = nx + 1, nyl = ny + 1;
    const std::int64_t N = nxl * nyl;
    const double hx = (dom.x1 - dom.x0) / nx;
    const double hy = (dom.y1 - dom.y0) / ny;
    auto id = [&](std::int64_t i, std::int64_t j) { return i * nyl + j; };
    auto X = [&](std::int64_t i) { return dom.x0 + i * hx; };
    auto Y = [&](std::int64_t j) { return dom.y0 + j * hy; };

    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(N) * 9);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(N);

    double q[4];
    for (std::int64_t i = 0; i < nxl; ++i) {
        for (std::int64_t j = 0; j < nyl; ++j) {
            const std::int64_t row = id(i, j);
            if (i == 0 || j == 0 || i == nx || j == ny) {
                trips.emplace_back(row, row, 1.0);
                b[row] = g_at(X(i), Y(j));
                continue;
            }

            double coef[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};  // [di+1][dj+1]
            auto add = [&](int di, int dj, double c) { coef[di + 1][dj + 1] += c; };

            // x-faces at (i +/- 1/2, j)
            for (int s = 0; s < 2; ++s) {
                const double sign = s == 0 ? 1.0 : -1.0;  // + for right face
                const std::int64_t ib = s == 0 ? i : i - 1;
                q_at(X(ib) + 0.5 * hx, Y(j), q);
                const double A = q[0], B = q[1];
                // -sign/hx * [ A (u[ib+1,j]-u[ib,j])/hx + B (u[ib,j+1]+u[ib+1,j+1]
                //              -u[ib,j-1]-u[ib+1,j-1])/(4 hy) ]
                const int base = s == 0 ? 0 : -1;
                add(base + 1, 0, -sign * A / (hx * hx));
                add(base, 0, sign * A / (hx * hx));
                add(base, 1, -sign * B / (4.0 * hx * hy));
                add(base + 1, 1, -sign * B / (4.0 * hx * hy));
                add(base, -1, sign * B / (4.0 * hx * hy));
                add(base + 1, -1, sign * B / (4.0 * hx * hy));
            }
            // y-faces at (i, j +/- 1/2)
            for (int s = 0; s < 2; ++s) {
                const double sign = s == 0 ? 1.0 : -1.0;
                const std::int64_t jb = s == 0 ? j : j - 1;
                q_at(X(i), Y(jb) + 0.5 * hy, q);
                const double C = q[2], D = q[3];
                const int base = s == 0 ? 0 : -1;
                add(0, base + 1, -sign * D / (hy * hy));
                add(0, base, sign * D / (hy * hy));
                add(1, base, -sign * C / (4.0 * hx * hy));
                add(1, base + 1, -sign * C / (4.0 * hx * hy));
                add(-1, base, sign * C / (4.0 * hx * hy));
                add(-1, base + 1, sign * C / (4.0 * hx * hy));
            }

            for (int di = -1; di <= 1; ++di)
                for (int dj = -1; dj <= 1; ++dj) {
                    const double c = coef[di + 1][dj + 1];
                    if (c == 0.0) continue;
                    const std::int64_t col = id(i + di, j + dj);
                    // Dirichlet neighbors move to the right-hand side
                    const std::int64_t ii = i + di, jj = j + dj;
                    if (ii == 0 || jj == 0 || ii == nx || jj == ny)
                        b[row] -= c * g_at(X(ii), Y(jj));
                    else
                        trips.emplace_back(row, col, c);
                }
            b[row] += rhs_at(X(i), Y(j));
        }
    }

    Eigen::SparseMatrix<double> A(N, N);
    A.setFromTriplets(trips.begin(), trips.end());
    A.makeCompressed();

    Eigen::BiCGSTAB<Eigen::SparseMatrix<double>, Eigen::IncompleteLUT<double>> solver;
    solver.preconditioner().setFillfactor(8);
    solver.preconditioner().setDroptol(1e-4);
    solver.setTolerance(tol);
    solver.setMaxIterations(4000);
    solver.compute(A);
    if (solver.info() != Eigen::Success)
        throw NumericalError("rect2d: preconditioner setup failed");
    Eigen::VectorXd u = solver.solve(b);
    if (solver.info() != Eigen::Success && solver.error() > 100 * tol)
        throw NumericalError("rect2d: BiCGSTAB stalled at relative residual " +
                             std::to_string(solver.error()));

    Rect2DSolution out;
    out.nx = nx;
    out.ny = ny;
    out.hx = hx;
    out.hy = hy;
    out.values = u.array();
    // pin the Dirichlet rows exactly
    for (std::int64_t i = 0; i < nxl; ++i)
        for (std::int64_t j = 0; j < nyl; ++j)
            if (i == 0 || j == 0 || i == nx || j == ny) out.values[id(i, j)] = g_at(X(i), Y(j));
    return out;
}

int grid_for(Real eps, const Domain2D& dom, const Rect2DOptions& opts) {
    const double len = std::max(dom.x1 - dom.x0, dom.y1 - dom.y0);
    int n = opts.min_intervals;
    while (n * eps < opts.mesh_per_period * len) n *= 2;
    if (static_cast<std::int64_t>(n + 1) * (n + 1) > opts.max_unknowns)
        throw ResolutionError("rect2d: eps = " + std::to_string(eps) + " needs a " +
                              std::to_string(n) + "^2 grid, beyond the memory budget of " +
                              std::to_string(opts.max_unknowns) + " unknowns");
    return n;
}

}  // namespace

Rect2DSolution solve_eps_rect2d(const TransformedCoefficients& tc, const Rect2DProblem& prob,
                                Real eps, const Rect2DOptions& opts) {
    if (tc.dim() != 2) throw ConfigError("solve_eps_rect2d needs 2D transformed coefficients");
    if (!(eps > 0.0 && eps <= 1.0)) throw ConfigError("eps must lie in (0, 1]");

    TrigInterpolant q11(tc.q.comp(0, 0)), q12(tc.q.comp(0, 1)), q21(tc.q.comp(1, 0)),
        q22(tc.q.comp(1, 1));
    TrigInterpolant m_itp(tc.m);

    QEval q_at = [&](double x, double y, double* q) {
        const double p[2] = {x / eps, y / eps};
        q[0] = q11.eval(p);
        q[1] = q12.eval(p);
        q[2] = q21.eval(p);
        q[3] = q22.eval(p);
    };
    PointFn rhs_at = [&](double x, double y) {
        const double p[2] = {x / eps, y / eps};
        return eval_or_zero(prob.f, x, y) * m_itp.eval(p);
    };
    PointFn g_at = [&](double x, double y) { return eval_or_zero(prob.g, x, y); };

    const int n = grid_for(eps, prob.domain, opts);
    return solve_fd(q_at, rhs_at, g_at, prob.domain, n, n, opts.solver_tol);
}

Rect2DSolution solve_homogenized_rect2d(const Eigen::Matrix2d& a_bar, const Rect2DProblem& prob,
                                        int nx, int ny, const Rect2DOptions& opts) {
    QEval q_at = [&](double, double, double* q) {
        q[0] = a_bar(0, 0);
        q[1] = a_bar(0, 1);
        q[2] = a_bar(1, 0);
        q[3] = a_bar(1, 1);
    };
    PointFn rhs_at = [&](double x, double y) { return eval_or_zero(prob.f, x, y); };
    PointFn g_at = [&](double x, double y) { return eval_or_zero(prob.g, x, y); };
    return solve_fd(q_at, rhs_at, g_at, prob.domain, nx, ny, opts.solver_tol);
}

Real l2_distance(const Rect2DSolution& a, const Rect2DSolution& b, const Domain2D&) {
    if (a.nx != b.nx || a.ny != b.ny) throw ConfigError("l2_distance needs a common grid");
    const std::int64_t nxl = a.nx + 1, nyl = a.ny + 1;
    double acc = 0.0;
    for (std::int64_t i = 0; i < nxl; ++i) {
        const double wi = (i == 0 || i == a.nx) ? 0.5 : 1.0;
        for (std::int64_t j = 0; j < nyl; ++j) {
            const double wj = (j == 0 || j == a.ny) ? 0.5 : 1.0;
            const double d = a.values[i * nyl + j] - b.values[i * nyl + j];
            acc += wi * wj * d * d;
        }
    }
    return std::sqrt(acc * a.hx * a.hy);
}

Rect2DReport rect2d_sweep(const TransformedCoefficients& tc, const Rect2DProblem& prob,
                          const Eigen::Matrix2d& a_bar, const Rect2DOptions& opts) {
    validate_eps_list(prob.eps_list);
    Rect2DReport rep;
    std::vector<Real> errs;
    for (Real eps : prob.eps_list) {
        Rect2DSolution u = solve_eps_rect2d(tc, prob, eps, opts);
        Rect2DSolution ref = solve_homogenized_rect2d(a_bar, prob, u.nx, u.ny, opts);
        Rect2DSweepRow row;
        row.eps = eps;
        row.grid = u.nx;
        row.l2 = l2_distance(u, ref, prob.domain);
        rep.rows.push_back(row);
        errs.push_back(row.l2);
    }
    if (prob.eps_list.size() >= 4) rep.l2_fit = fit_rate(prob.eps_list, errs, false);
    return rep;
}

}  // namespace perihom
