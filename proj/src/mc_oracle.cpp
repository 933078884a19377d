#include "gpvol/mc_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <limits>
#include <random>

#include "gpvol/black_scholes.hpp"
#include "gpvol/errors.hpp"

namespace gpv {

void McConfig::validate() const {
    if (n_paths < 2) throw ParameterError("mc: n_paths must be >= 2");
    if (antithetic && n_paths % 2 != 0) throw ParameterError("mc: n_paths must be even with antithetic sampling");
    if (n_steps < 2) throw ParameterError("mc: n_steps must be >= 2");
    if (batch_size < 2) throw ParameterError("mc: batch_size must be >= 2");
}

Eigen::MatrixXd gram_matrix(const KernelSpec& k, const std::vector<double>& grid) {
    const std::size_t n = grid.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (!(grid[i] > 0.0)) throw ParameterError("gram_matrix: grid must be positive");
        if (i > 0 && !(grid[i] > grid[i - 1])) throw ParameterError("gram_matrix: grid must increase");
    }
    Eigen::MatrixXd g(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j <= i; ++j) g(i, j) = g(j, i) = cov_X(k, grid[i], grid[j]);
    return g;
}

Eigen::MatrixXd cholesky_with_jitter(const Eigen::MatrixXd& m) {
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() == Eigen::Success) return llt.matrixL();
    const double scale = std::max(m.diagonal().mean(), 1e-300);
    for (double j = 1e-12; j <= 1.0001e-8; j *= 10.0) {
        Eigen::MatrixXd a = m;
        a.diagonal().array() += j * scale;
        llt.compute(a);
        if (llt.info() == Eigen::Success) return llt.matrixL();
    }
    throw NumericError("cholesky: matrix is not positive semidefinite even with jitter");
}

namespace {

// Square-root factor of a PSD matrix that may be exactly singular.
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m, double scale) {
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() == Eigen::Success) return llt.matrixL();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    const double tol = 1e-9 * std::max(scale, 1e-300);
    if (es.eigenvalues().minCoeff() < -tol) throw NumericError("covariance is not positive semidefinite");
    Eigen::VectorXd d = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * d.asDiagonal();
}

struct Accumulator {
    double sum = 0.0, sum2 = 0.0;
    long n = 0;
    void add(double x) {
        sum += x;
        sum2 += x * x;
        ++n;
    }
    McEstimate finish() const {
        McEstimate e;
        if (n == 0) return e;
        e.mean = sum / n;
        e.sample_var = n > 1 ? std::max(sum2 - n * e.mean * e.mean, 0.0) / (n - 1) : 0.0;
        e.se = std::sqrt(e.sample_var / n);
        return e;
    }
};

Eigen::MatrixXd normals(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
    std::normal_distribution<double> nd;
    Eigen::MatrixXd g(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) g(i, j) = nd(rng);
    return g;
}

std::mt19937_64 batch_rng(std::uint64_t seed, long batch) {
    std::seed_seq ss{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                     static_cast<std::uint32_t>(batch), 0x9e3779b9u};
    return std::mt19937_64(ss);
}

// Pair-averaged samples for one batch; the control variate coefficient is fitted per batch.
void add_with_control(Accumulator& acc, const std::vector<double>& y, const std::vector<double>& f, double f_mean,
                      bool use_cv) {
    double beta = 0.0;
    if (use_cv && y.size() > 2) {
        double my = 0.0, mf = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) {
            my += y[i];
            mf += f[i];
        }
        my /= y.size();
        mf /= y.size();
        double cov = 0.0, var = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) {
            cov += (y[i] - my) * (f[i] - mf);
            var += (f[i] - mf) * (f[i] - mf);
        }
        beta = var > 0.0 ? cov / var : 0.0;
    }
    for (std::size_t i = 0; i < y.size(); ++i) acc.add(y[i] - beta * (f[i] - f_mean));
}

}  // namespace

McSpxResult simulate_spx(const ModelParams& m, const ForwardVarianceCurve& xi0, double T, double S0,
                         const std::vector<double>& strikes, const McConfig& cfg) {
    m.validate();
    cfg.validate();
    if (!(T > 0.0)) throw ParameterError("mc: T must be > 0");
    if (!(S0 > 0.0)) throw ParameterError("mc: spot must be > 0");
    for (double K : strikes)
        if (!(K > 0.0)) throw ParameterError("mc: strikes must be > 0");

    const int n = cfg.n_steps;
    const double dt = T / n;
    const double sdt = std::sqrt(dt);
    std::vector<double> grid(n);
    for (int i = 0; i < n; ++i) grid[i] = (i + 1) * dt;

    // joint law: X = A G_W + L_S G_X, dW = sqrt(dt) G_W
    const Eigen::MatrixXd cxx = gram_matrix(m.kernel, grid);
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j <= i; ++j) A(i, j) = kernel_l1(m.kernel, grid[i] - grid[j], grid[i] - grid[j] + dt) / sdt;
    const Eigen::MatrixXd schur = cxx - A * A.transpose();
    const Eigen::MatrixXd LS = psd_sqrt(0.5 * (schur + schur.transpose()), cxx.diagonal().maxCoeff());

    // sigma_t = f(t) p(X_t) with f = sqrt(xi0/g); sigma_0 = sqrt(xi0(0)) by the 0/0 = 1 rule
    std::vector<double> f(n + 1);
    f[0] = std::sqrt(xi0(0.0));
    for (int i = 1; i <= n; ++i) {
        const double g = g_norm(m.kernel, m.poly, grid[i - 1]);
        f[i] = g > 0.0 ? std::sqrt(xi0(grid[i - 1]) / g) : std::sqrt(xi0(grid[i - 1]));
    }
    const double rho = m.rho;
    const double c = std::max(1.0 - rho * rho, 0.0);
    const std::size_t nk = strikes.size();

    std::vector<Accumulator> acc(nk);
    Accumulator acc_f, acc_u, acc_cov;
    McSpxResult res;
    res.strikes = strikes;

    const long batches = (cfg.n_paths + cfg.batch_size - 1) / cfg.batch_size;
    for (long b = 0; b < batches; ++b) {
        long paths = std::min(cfg.batch_size, cfg.n_paths - b * cfg.batch_size);
        if (cfg.antithetic && paths % 2) ++paths;
        const long draws = cfg.antithetic ? paths / 2 : paths;
        auto rng = batch_rng(cfg.seed, b);
        Eigen::MatrixXd GW = normals(rng, draws, n);
        Eigen::MatrixXd GX = normals(rng, draws, n);
        const Eigen::MatrixXd X = GW * A.transpose() + GX * LS.transpose();

        const int sides = cfg.antithetic ? 2 : 1;
        std::vector<std::vector<double>> y(nk, std::vector<double>(draws, 0.0));
        std::vector<double> fwd(draws, 0.0);
        for (long d = 0; d < draws; ++d) {
            std::vector<double> yk(nk, 0.0);
            double fsum = 0.0, usum = 0.0, covsum = 0.0;
            bool ok = true;
            for (int s = 0; s < sides; ++s) {
                const double sign = s == 0 ? 1.0 : -1.0;
                double U = 0.0, V = 0.0, cov = 0.0;
                double sig_prev = f[0];
                for (int i = 0; i < n; ++i) {
                    const double dW = sign * sdt * GW(d, i);
                    U += sig_prev * sig_prev * dt;
                    V += sig_prev * dW;
                    const double sig = f[i + 1] * m.poly.eval(sign * X(d, i));
                    cov += (sig - sig_prev) * dW;
                    sig_prev = sig;
                }
                if (!std::isfinite(U) || !std::isfinite(V)) {
                    ok = false;
                    break;
                }
                const double F = S0 * std::exp(rho * V - 0.5 * rho * rho * U);
                const double vol = std::sqrt(c * U / T);
                for (std::size_t k = 0; k < nk; ++k) yk[k] += bs_call(F, vol, T, strikes[k]);
                fsum += F;
                usum += U;
                covsum += cov;
            }
            if (!ok) {
                ++res.rejected;
                for (std::size_t k = 0; k < nk; ++k) y[k][d] = std::numeric_limits<double>::quiet_NaN();
                fwd[d] = std::numeric_limits<double>::quiet_NaN();
                continue;
            }
            for (std::size_t k = 0; k < nk; ++k) y[k][d] = yk[k] / sides;
            fwd[d] = fsum / sides;
            acc_f.add(fwd[d]);
            acc_u.add(usum / sides);
            acc_cov.add(covsum / sides);
        }
        // drop rejected draws
        std::vector<double> fk;
        std::vector<std::size_t> keep;
        for (long d = 0; d < draws; ++d)
            if (std::isfinite(fwd[d])) keep.push_back(d);
        for (std::size_t d : keep) fk.push_back(fwd[d]);
        for (std::size_t k = 0; k < nk; ++k) {
            std::vector<double> yy;
            for (std::size_t d : keep) yy.push_back(y[k][d]);
            add_with_control(acc[k], yy, fk, S0, cfg.control_variate);
        }
    }
    for (std::size_t k = 0; k < nk; ++k) res.calls.push_back(acc[k].finish());
    res.forward = acc_f.finish();
    res.integrated_var = acc_u.finish();
    res.covariation = acc_cov.finish();
    return res;
}

namespace {

Eigen::MatrixXd z_covariance(const KernelSpec& k, const std::vector<double>& u, double T) {
    const std::size_t n = u.size();
    Eigen::MatrixXd c(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j <= i; ++j) c(i, j) = c(j, i) = kernel_cross(k, u[i] - T, u[j] - T, T);
    return c;
}

}  // namespace

McVixResult simulate_vix(const ModelParams& m, const ForwardVarianceCurve& xi0, const VixConfig& vcfg,
                         const std::vector<double>& strikes, const McConfig& cfg) {
    m.validate();
    cfg.validate();
    const VixPolynomial vp = vix_polynomial(m, xi0, vcfg);
    const std::size_t nu = vp.u.size();
    const Eigen::MatrixXd L = cholesky_with_jitter(z_covariance(m.kernel, vp.u, vcfg.T));
    double v2_mean = 0.0;
    for (std::size_t i = 0; i < nu; ++i) v2_mean += 1e4 / vcfg.delta * vp.w[i] * xi0(vp.u[i]);

    const std::size_t nk = strikes.size();
    Accumulator acc_fut, acc_v2;
    std::vector<Accumulator> acc(nk);
    const long batches = (cfg.n_paths + cfg.batch_size - 1) / cfg.batch_size;
    for (long b = 0; b < batches; ++b) {
        long paths = std::min(cfg.batch_size, cfg.n_paths - b * cfg.batch_size);
        if (cfg.antithetic && paths % 2) ++paths;
        const long draws = cfg.antithetic ? paths / 2 : paths;
        auto rng = batch_rng(cfg.seed, b);
        const Eigen::MatrixXd Z = normals(rng, draws, nu) * L.transpose();
        const int sides = cfg.antithetic ? 2 : 1;
        std::vector<double> fut(draws), v2(draws);
        std::vector<std::vector<double>> calls(nk, std::vector<double>(draws));
        std::vector<double> row(nu);
        for (long d = 0; d < draws; ++d) {
            double sf = 0.0, sv = 0.0;
            std::vector<double> sc(nk, 0.0);
            for (int s = 0; s < sides; ++s) {
                const double sign = s == 0 ? 1.0 : -1.0;
                for (std::size_t i = 0; i < nu; ++i) row[i] = sign * Z(d, i);
                const double x = std::max(vp.value(row.data()), 0.0);
                const double vix = std::sqrt(x);
                sf += vix;
                sv += x;
                for (std::size_t k = 0; k < nk; ++k) sc[k] += std::max(vix - strikes[k], 0.0);
            }
            fut[d] = sf / sides;
            v2[d] = sv / sides;
            for (std::size_t k = 0; k < nk; ++k) calls[k][d] = sc[k] / sides;
            acc_v2.add(v2[d]);
        }
        add_with_control(acc_fut, fut, v2, v2_mean, cfg.control_variate);
        for (std::size_t k = 0; k < nk; ++k) add_with_control(acc[k], calls[k], v2, v2_mean, cfg.control_variate);
    }
    McVixResult r;
    r.strikes = strikes;
    r.future = acc_fut.finish();
    r.vix2 = acc_v2.finish();
    for (auto& a : acc) r.calls.push_back(a.finish());
    return r;
}

McEstimate simulate_vix_nested(const ModelParams& m, const ForwardVarianceCurve& xi0, const VixConfig& vcfg,
                               int n_inner, const McConfig& cfg) {
    m.validate();
    cfg.validate();
    if (n_inner < 1) throw ParameterError("nested vix: n_inner must be >= 1");
    const VixPolynomial vp = vix_polynomial(m, xi0, vcfg);
    const std::size_t nu = vp.u.size();
    const Eigen::MatrixXd LZ = cholesky_with_jitter(z_covariance(m.kernel, vp.u, vcfg.T));
    Eigen::MatrixXd cg(nu, nu);
    for (std::size_t i = 0; i < nu; ++i)
        for (std::size_t j = 0; j <= i; ++j) cg(i, j) = cg(j, i) = cov_X(m.kernel, vp.u[i] - vcfg.T, vp.u[j] - vcfg.T);
    const Eigen::MatrixXd LG = cholesky_with_jitter(cg);
    std::vector<double> ratio(nu);
    for (std::size_t i = 0; i < nu; ++i) {
        const double g = g_norm(m.kernel, m.poly, vp.u[i]);
        ratio[i] = 1e4 / vcfg.delta * vp.w[i] * (g > 0.0 ? xi0(vp.u[i]) / g : 1.0);
    }
    Accumulator acc;
    const long batches = (cfg.n_paths + cfg.batch_size - 1) / cfg.batch_size;
    for (long b = 0; b < batches; ++b) {
        const long paths = std::min(cfg.batch_size, cfg.n_paths - b * cfg.batch_size);
        auto rng = batch_rng(cfg.seed, b);
        const Eigen::MatrixXd Z = normals(rng, paths, nu) * LZ.transpose();
        for (long d = 0; d < paths; ++d) {
            const Eigen::MatrixXd G = normals(rng, n_inner, nu) * LG.transpose();
            double v2 = 0.0;
            for (int r = 0; r < n_inner; ++r)
                for (std::size_t i = 0; i < nu; ++i) {
                    const double p = m.poly.eval(Z(d, i) + G(r, i));
                    v2 += ratio[i] * p * p;
                }
            acc.add(std::sqrt(v2 / n_inner));
        }
    }
    return acc.finish();
}

void write_mc_csv(std::ostream& os, const ModelParams& m, double T, const McSpxResult& r, bool header) {
    if (header) os << "alpha0,alpha1,alpha3,alpha5,rho,H,T,K,price,se\n";
    for (std::size_t k = 0; k < r.strikes.size(); ++k) {
        os << m.poly.alpha[0] << ',' << m.poly.alpha[1] << ',' << m.poly.alpha[2] << ',' << m.poly.alpha[3] << ','
           << m.rho << ',' << m.kernel.H << ',' << T << ',' << r.strikes[k] << ',' << r.calls[k].mean << ','
           << r.calls[k].se << '\n';
    }
}

}  // namespace gpv
