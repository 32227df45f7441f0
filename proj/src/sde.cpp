#include "perihom/sde.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>

#include "perihom/rng.hpp"
#include "perihom/trig_interp.hpp"

namespace perihom {

namespace {

constexpr int kBlock = 16;        // paths advanced in lockstep per work item
constexpr int kPoolPerPath = 24;  // normals buffered per path (divisible by d = 1..3)
constexpr double kBlowupBound = 1e100;

/// One sampled coefficient entry with a constant fast path.
struct Lookup {
    bool constant = true;
    double value = 0.0;
    CoefficientLookup kind = CoefficientLookup::Trigonometric;
    TrigInterpolant trig;
    LinearInterpolant lin;

    static Lookup make(const ScalarField& f, CoefficientLookup kind) {
        Lookup lk;
        lk.kind = kind;
        lk.trig = TrigInterpolant(f);
        if (lk.trig.is_constant()) {
            lk.constant = true;
            lk.value = lk.trig.constant_value();
        } else {
            lk.constant = false;
            if (kind == CoefficientLookup::Multilinear) lk.lin = LinearInterpolant(f);
        }
        return lk;
    }

    double eval(const double* y) const {
        if (constant) return value;
        return kind == CoefficientLookup::Trigonometric ? trig.eval(y) : lin.eval(y);
    }
};

/// Per-block Gaussian pool: Philox blocks and Box-Muller pairs are produced
/// in bulk per path, in a fixed per-path order, so the stream consumed by
/// path p never depends on scheduling. The rounds run lane-SoA so the
/// integer and transcendental loops vectorize; the (seed, stream, block)
/// mapping is bit-identical to the scalar Philox4x32 class.
struct NormalPool {
    std::uint32_t key0, key1;
    std::uint32_t ctr2[kBlock], ctr3[kBlock];
    std::uint64_t block = 0;
    double pool[kBlock][kPoolPerPath];
    int cursor = kPoolPerPath;
    int lanes = 0;

    NormalPool(std::uint64_t seed, std::int64_t first_path, int lanes_)
        : key0(static_cast<std::uint32_t>(seed)),
          key1(static_cast<std::uint32_t>(seed >> 32)),
          lanes(lanes_) {
        for (int p = 0; p < lanes; ++p) {
            const std::uint64_t stream = static_cast<std::uint64_t>(first_path + p);
            ctr2[p] = static_cast<std::uint32_t>(stream);
            ctr3[p] = static_cast<std::uint32_t>(stream >> 32);
        }
    }

    void next_uniform_lanes(double* u0, double* u1) {
        constexpr std::uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
        constexpr std::uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
        std::uint32_t x0[kBlock], x1[kBlock], x2[kBlock], x3[kBlock];
        const std::uint32_t b_lo = static_cast<std::uint32_t>(block);
        const std::uint32_t b_hi = static_cast<std::uint32_t>(block >> 32);
        ++block;
        for (int p = 0; p < lanes; ++p) {
            x0[p] = b_lo;
            x1[p] = b_hi;
            x2[p] = ctr2[p];
            x3[p] = ctr3[p];
        }
        std::uint32_t k0 = key0, k1 = key1;
        for (int round = 0; round < 10; ++round) {
            for (int p = 0; p < lanes; ++p) {
                const std::uint64_t p0 = static_cast<std::uint64_t>(M0) * x0[p];
                const std::uint64_t p1 = static_cast<std::uint64_t>(M1) * x2[p];
                const std::uint32_t y0 =
                    static_cast<std::uint32_t>(p1 >> 32) ^ x1[p] ^ k0;
                const std::uint32_t y1 = static_cast<std::uint32_t>(p1);
                const std::uint32_t y2 =
                    static_cast<std::uint32_t>(p0 >> 32) ^ x3[p] ^ k1;
                const std::uint32_t y3 = static_cast<std::uint32_t>(p0);
                x0[p] = y0;
                x1[p] = y1;
                x2[p] = y2;
                x3[p] = y3;
            }
            k0 += W0;
            k1 += W1;
        }
        for (int p = 0; p < lanes; ++p) {
            const std::uint64_t w0 =
                (static_cast<std::uint64_t>(x0[p]) << 32 | x1[p]) >> 11;
            const std::uint64_t w1 =
                (static_cast<std::uint64_t>(x2[p]) << 32 | x3[p]) >> 11;
            u0[p] = (static_cast<double>(w0) + 1.0) * 0x1.0p-53;
            u1[p] = (static_cast<double>(w1) + 1.0) * 0x1.0p-53;
        }
    }

    void refill() {
        double u0[kBlock], u1[kBlock], r[kBlock], c[kBlock], s[kBlock];
        for (int pair = 0; pair < kPoolPerPath / 2; ++pair) {
            next_uniform_lanes(u0, u1);
            for (int p = 0; p < lanes; ++p) r[p] = std::sqrt(-2.0 * std::log(u0[p]));
            for (int p = 0; p < lanes; ++p) fastmath::sincos_turn(u1[p], c[p], s[p]);
            for (int p = 0; p < lanes; ++p) {
                pool[p][2 * pair] = r[p] * c[p];
                pool[p][2 * pair + 1] = r[p] * s[p];
            }
        }
        cursor = 0;
    }

    /// d normals per lane; out[p*d + k].
    void draw(double* out, int d) {
        if (cursor + d > kPoolPerPath) refill();
        for (int p = 0; p < lanes; ++p)
            for (int k = 0; k < d; ++k) out[p * d + k] = pool[p][cursor + k];
        cursor += d;
    }

    /// One uniform in [0, 1) per lane (used for the initial positions).
    void draw_uniform(double* out) {
        double u1[kBlock];
        next_uniform_lanes(out, u1);
        for (int p = 0; p < lanes; ++p) out[p] -= std::floor(out[p]);  // (0,1] -> [0,1)
    }
};

struct Blowup {
    std::int64_t path = -1;
    std::int64_t step = -1;
};

/// Advance a block of paths by `steps`; positions are unwrapped, the
/// interpolants handle periodic reduction internally.
void advance_block(double X[][3], int lanes, int d, std::int64_t steps, double dt,
                   const std::vector<Lookup>& drift, const std::vector<Lookup>& sig,
                   bool sigma_diag_const, const double* sigma_const, NormalPool& pool,
                   std::int64_t step_offset, Blowup& blowup) {
    const double sqrt2dt = std::sqrt(2.0 * dt);
    double xi[kBlock * 3], bval[3][kBlock], sval[9][kBlock];

    bool drift_zero = true;
    for (int k = 0; k < d; ++k)
        if (!(drift[k].constant && drift[k].value == 0.0)) drift_zero = false;

    for (std::int64_t step = 0; step < steps; ++step) {
        pool.draw(xi, d);

        if (d == 1) {
            if (!sig[0].constant && sig[0].kind == CoefficientLookup::Trigonometric) {
                double y[kBlock];
                for (int p = 0; p < lanes; ++p) y[p] = X[p][0];
                sig[0].trig.eval1_block(y, sval[0], lanes);
            } else {
                for (int p = 0; p < lanes; ++p) sval[0][p] = sig[0].eval(&X[p][0]);
            }
            if (!drift_zero)
                for (int p = 0; p < lanes; ++p) bval[0][p] = drift[0].eval(&X[p][0]);
            for (int p = 0; p < lanes; ++p) {
                double x = X[p][0];
                if (!drift_zero) x += bval[0][p] * dt;
                x += sqrt2dt * sval[0][p] * xi[p];
                X[p][0] = x;
            }
        } else {
            for (int p = 0; p < lanes; ++p) {
                const double* y = X[p];
                double upd[3] = {0.0, 0.0, 0.0};
                for (int i = 0; i < d; ++i) {
                    double diff = 0.0;
                    for (int k = 0; k < d; ++k) {
                        const double sik = sigma_diag_const ? sigma_const[i * d + k]
                                                            : sig[i * d + k].eval(y);
                        diff += sik * xi[p * d + k];
                    }
                    upd[i] = (drift_zero ? 0.0 : drift[i].eval(y) * dt) + sqrt2dt * diff;
                }
                for (int i = 0; i < d; ++i) X[p][i] += upd[i];
            }
        }

        if ((step & 63) == 0 || step == steps - 1) {
            for (int p = 0; p < lanes; ++p)
                for (int i = 0; i < d; ++i)
                    if (!(std::abs(X[p][i]) < kBlowupBound)) {
                        blowup.path = p;
                        blowup.step = step_offset + step;
                        return;
                    }
        }
    }
}

}  // namespace

PathEnsemble simulate_paths(const CoefficientSet& coeffs, const MatrixField& sigma,
                            const SDEConfig& cfg) {
    cfg.validate();
    if (sigma.grid() != coeffs.grid()) throw ConfigError("sigma and coefficients on one grid");
    const int d = coeffs.dim();

    std::vector<Lookup> drift, sig;
    for (int k = 0; k < d; ++k) drift.push_back(Lookup::make(coeffs.b_tilde.comp(k), cfg.lookup));
    for (int i = 0; i < d; ++i)
        for (int k = 0; k < d; ++k) sig.push_back(Lookup::make(sigma.comp(i, k), cfg.lookup));

    bool sigma_all_const = true;
    double sigma_const[9] = {0};
    for (int i = 0; i < d * d; ++i) {
        if (!sig[i].constant) sigma_all_const = false;
        else sigma_const[i] = sig[i].value;
    }

    const std::int64_t steps_burn = std::llround(cfg.burn_in / cfg.dt);
    const std::int64_t steps_main = std::llround(cfg.horizon / cfg.dt);

    PathEnsemble ens;
    ens.start = Eigen::MatrixXd::Zero(cfg.paths, d);
    ens.end = Eigen::MatrixXd::Zero(cfg.paths, d);
    ens.horizon = cfg.horizon;
    ens.seed = cfg.seed;

    const std::int64_t nblocks = (cfg.paths + kBlock - 1) / kBlock;
    std::atomic<std::int64_t> next_block{0};
    std::atomic<bool> failed{false};
    std::string failure_msg;
    std::mutex failure_mutex;

    auto worker = [&]() {
        for (;;) {
            const std::int64_t blk = next_block.fetch_add(1);
            if (blk >= nblocks || failed.load()) return;
            const std::int64_t first = blk * kBlock;
            const int lanes = static_cast<int>(std::min<std::int64_t>(kBlock, cfg.paths - first));

            NormalPool pool(cfg.seed, first, lanes);
            double X[kBlock][3] = {};
            // initial positions uniform on the cell, from the same streams
            for (int i = 0; i < d; ++i) {
                double u[kBlock];
                pool.draw_uniform(u);
                for (int p = 0; p < lanes; ++p) X[p][i] = u[p];
            }

            Blowup blowup;
            advance_block(X, lanes, d, steps_burn, cfg.dt, drift, sig, sigma_all_const,
                          sigma_const, pool, 0, blowup);
            if (blowup.path < 0) {
                for (int p = 0; p < lanes; ++p)
                    for (int i = 0; i < d; ++i) ens.start(first + p, i) = X[p][i];
                advance_block(X, lanes, d, steps_main, cfg.dt, drift, sig, sigma_all_const,
                              sigma_const, pool, steps_burn, blowup);
            }
            if (blowup.path >= 0) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                failed.store(true);
                failure_msg = "path " + std::to_string(first + blowup.path) +
                              " became non-finite at step " + std::to_string(blowup.step) +
                              " (seed " + std::to_string(cfg.seed) + ")";
                return;
            }
            for (int p = 0; p < lanes; ++p)
                for (int i = 0; i < d; ++i) ens.end(first + p, i) = X[p][i];
        }
    };

    int nthreads = cfg.threads > 0 ? cfg.threads
                                   : static_cast<int>(std::thread::hardware_concurrency());
    if (nthreads < 1) nthreads = 1;
    std::vector<std::thread> threads;
    for (int t = 0; t < nthreads; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();

    if (failed.load()) throw NumericalError("sde blow-up: " + failure_msg);
    return ens;
}

DiffusivityEstimate estimate_diffusivity(const PathEnsemble& ensemble) {
    const std::int64_t N = ensemble.start.rows();
    const int d = static_cast<int>(ensemble.start.cols());
    if (N < 100) throw ConfigError("estimate_diffusivity needs at least 100 paths");
    const Real T = ensemble.horizon;

    Eigen::MatrixXd disp = ensemble.end - ensemble.start;
    Eigen::VectorXd mu = disp.colwise().mean();

    DiffusivityEstimate est;
    est.paths = N;
    est.horizon = T;
    est.D = Eigen::MatrixXd::Zero(d, d);
    est.stderr_ = Eigen::MatrixXd::Zero(d, d);
    est.mean_drift = mu / T;
    est.mean_drift_stderr = Eigen::VectorXd::Zero(d);

    for (int a = 0; a < d; ++a) {
        const double var =
            (disp.col(a).array() - mu[a]).square().sum() / static_cast<double>(N - 1);
        est.mean_drift_stderr[a] = std::sqrt(var / N) / T;
    }

    // covariance and delete-1 jackknife from the sufficient statistics
    Eigen::VectorXd S1 = disp.colwise().sum();
    Eigen::MatrixXd S2 = disp.transpose() * disp;
    const double n1 = static_cast<double>(N - 1);
    for (int a = 0; a < d; ++a) {
        for (int b = a; b < d; ++b) {
            const double cov = (S2(a, b) - S1[a] * S1[b] / N) / (N - 1);
            const double Dab = cov / (2.0 * T);

            double tsum = 0.0, tsq = 0.0;
            for (std::int64_t i = 0; i < N; ++i) {
                const double xa = disp(i, a), xb = disp(i, b);
                const double s1a = S1[a] - xa, s1b = S1[b] - xb;
                const double s2 = S2(a, b) - xa * xb;
                const double cov_i = (s2 - s1a * s1b / n1) / (n1 - 1.0);
                const double theta = cov_i / (2.0 * T);
                tsum += theta;
                tsq += theta * theta;
            }
            const double tbar = tsum / N;
            const double jvar = (n1 / N) * std::max(0.0, tsq - N * tbar * tbar);
            est.D(a, b) = est.D(b, a) = Dab;
            est.stderr_(a, b) = est.stderr_(b, a) = std::sqrt(jvar);
        }
    }
    return est;
}

DiffusivityEstimate run_sde_validation(const CoefficientSet& coeffs, const SDEConfig& cfg) {
    MatrixField sigma = pointwise_matrix_sqrt(coeffs.a_tilde, coeffs.lambda * (1.0 - 1e-12));
    PathEnsemble ens = simulate_paths(coeffs, sigma, cfg);
    return estimate_diffusivity(ens);
}

}  // namespace perihom
