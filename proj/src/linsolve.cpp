#include "perihom/linsolve.hpp"

#include <cmath>
#include <limits>

namespace perihom {

namespace {

Real rel_res(const ApplyFn& op, const Eigen::VectorXd& x, const Eigen::VectorXd& b) {
    const Real bn = b.norm();
    if (bn == 0.0) return (op(x)).norm();
    return (op(x) - b).norm() / bn;
}

}  // namespace

SolveResult richardson(const ApplyFn& op, const ApplyFn& precond, const Eigen::VectorXd& rhs,
                       Real tol, int max_iter) {
    SolveResult r;
    r.method = "richardson";
    const Real bn = rhs.norm();
    if (bn == 0.0) {
        r.x = Eigen::VectorXd::Zero(rhs.size());
        r.converged = true;
        return r;
    }
    Eigen::VectorXd x = Eigen::VectorXd::Zero(rhs.size());
    Real prev = std::numeric_limits<Real>::infinity();
    for (int it = 0; it < max_iter; ++it) {
        Eigen::VectorXd res = rhs - op(x);
        const Real rn = res.norm() / bn;
        r.iterations = it;
        r.rel_residual = rn;
        if (rn <= tol) {
            r.converged = true;
            r.x = std::move(x);
            return r;
        }
        // stagnation or divergence: hand off to the next method
        if (it > 10 && rn > 0.9 * prev) break;
        prev = rn;
        x += precond(res);
    }
    r.x = std::move(x);
    r.converged = false;
    return r;
}

SolveResult bicgstab(const ApplyFn& op, const ApplyFn& precond, const Eigen::VectorXd& rhs,
                     Real tol, int max_iter) {
    SolveResult out;
    out.method = "bicgstab";
    const Eigen::Index n = rhs.size();
    const Real bn = rhs.norm();
    if (bn == 0.0) {
        out.x = Eigen::VectorXd::Zero(n);
        out.converged = true;
        return out;
    }

    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd r = rhs;
    Eigen::VectorXd r0 = r;
    Real rho = 1.0, alpha = 1.0, omega = 1.0;
    Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd p = Eigen::VectorXd::Zero(n);

    for (int it = 1; it <= max_iter; ++it) {
        const Real rho_new = r0.dot(r);
        if (std::abs(rho_new) < 1e-300) break;  // breakdown
        const Real beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        p = r + beta * (p - omega * v);
        Eigen::VectorXd phat = precond(p);
        v = op(phat);
        const Real r0v = r0.dot(v);
        if (std::abs(r0v) < 1e-300) break;
        alpha = rho / r0v;
        Eigen::VectorXd s = r - alpha * v;
        if (s.norm() / bn <= tol) {
            x += alpha * phat;
            out.x = std::move(x);
            out.iterations = it;
            out.rel_residual = rel_res(op, out.x, rhs);
            out.converged = out.rel_residual <= 10 * tol;
            return out;
        }
        Eigen::VectorXd shat = precond(s);
        Eigen::VectorXd t = op(shat);
        const Real tt = t.squaredNorm();
        if (tt < 1e-300) break;
        omega = t.dot(s) / tt;
        x += alpha * phat + omega * shat;
        r = s - omega * t;
        out.iterations = it;
        if (r.norm() / bn <= tol) {
            out.x = std::move(x);
            out.rel_residual = rel_res(op, out.x, rhs);
            out.converged = out.rel_residual <= 10 * tol;
            return out;
        }
        if (std::abs(omega) < 1e-300) break;
    }
    out.x = std::move(x);
    out.rel_residual = rel_res(op, out.x, rhs);
    out.converged = out.rel_residual <= tol;
    return out;
}

SolveResult dense_direct(const ApplyFn& op, const Eigen::VectorXd& rhs, int max_dense_n) {
    const Eigen::Index n = rhs.size();
    if (n > max_dense_n)
        throw ResolutionError("dense fallback refused: system size " + std::to_string(n) +
                              " exceeds cap " + std::to_string(max_dense_n) +
                              "; refine the iterative solve or reduce the grid");
    Eigen::MatrixXd A(n, n);
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        e[j] = 1.0;
        A.col(j) = op(e);
        e[j] = 0.0;
    }
    SolveResult r;
    r.method = "dense";
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
    r.x = lu.solve(rhs);
    r.rel_residual = rel_res(op, r.x, rhs);
    r.converged = std::isfinite(r.rel_residual);
    return r;
}

SolveResult solve_cascade(const ApplyFn& op, const ApplyFn& precond, const Eigen::VectorXd& rhs,
                          Real tol, int max_iter, int max_dense_n) {
    SolveResult r = richardson(op, precond, rhs, tol, max_iter);
    if (r.converged) return r;
    SolveResult k = bicgstab(op, precond, rhs, tol, max_iter);
    if (k.converged) return k;
    if (rhs.size() <= max_dense_n) {
        SolveResult d = dense_direct(op, rhs, max_dense_n);
        if (d.converged) return d;
    }
    throw ResolutionError(
        "linear solve did not converge (richardson rel res " + std::to_string(r.rel_residual) +
        ", bicgstab rel res " + std::to_string(k.rel_residual) +
        "); the grid is too coarse for the requested tolerance");
}

}  // namespace perihom
