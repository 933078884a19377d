#include "gpvol/spx_engine.hpp"

#include <algorithm>
#include <cmath>

#include "gpvol/black_scholes.hpp"
#include "gpvol/convolution.hpp"
#include "gpvol/errors.hpp"
#include "gpvol/quadrature.hpp"
#include "gpvol/special.hpp"

namespace gpv {

void SpxConfig::validate() const {
    if (N < 1) throw ParameterError("spx: N must be >= 1");
    if (n_t < 2) throw ParameterError("spx: n_t must be >= 2");
}

namespace {

// conv(l, i) = int_0^{t_i} K(t_i - s) edot_l(s) ds on the unit-scale basis
Eigen::MatrixXd conv_table(const KernelSpec& k, const ProductQuantizer& pq, const std::vector<double>& t) {
    Eigen::MatrixXd c(pq.levels(), t.size());
    for (int l = 0; l < pq.levels(); ++l)
        for (std::size_t i = 0; i < t.size(); ++i) c(l, i) = conv_edot_spx(k, t[i], l + 1, pq.horizon()).value;
    return c;
}

}  // namespace

TraceMatch trace_match_epsilon(const KernelSpec& k, const ProductQuantizer& pq, const std::vector<double>& t,
                               const std::vector<double>& w) {
    const Eigen::MatrixXd c = conv_table(k, pq, t);
    double A = 0.0, B = 0.0, target = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) target += w[i] * kernel_l2(k, 0.0, t[i]);
    for (int l = 0; l < pq.levels(); ++l) {
        const auto& sq = pq.scalar(l);
        double m2 = 0.0;
        for (int j = 0; j < sq.N; ++j) m2 += sq.probs[j] * sq.points[j] * sq.points[j];
        double I = 0.0;
        for (std::size_t i = 0; i < t.size(); ++i) I += w[i] * c(l, i) * c(l, i);
        A += pq.eigen(l).lambda * m2 * I;
        B += m2 * I;
    }
    TraceMatch r;
    r.target = target;
    if (!(B > 0.0) || A >= target) {
        r.clamped = true;
        r.achieved = A;
        return r;
    }
    r.eps = (target - A) / B;
    r.achieved = A + r.eps * B;
    return r;
}

SpxPaths quantize_X(const KernelSpec& k, const ProductQuantizer& pq, int n_t) {
    const double T = pq.horizon();
    const auto rule = gauss_legendre(n_t, 0.0, T);
    SpxPaths out;
    out.T = T;
    out.t = rule.nodes;
    out.w = rule.weights;
    out.p = pq.probabilities();
    out.eps_lambda = pq.eps_lambda();
    const int m = pq.levels();
    const std::size_t N = pq.count();
    Eigen::MatrixXd c = conv_table(k, pq, out.t);
    Eigen::MatrixXd d(m, n_t);
    for (int l = 0; l < m; ++l) {
        const double s = pq.scale(l);
        c.row(l) *= s;
        for (int i = 0; i < n_t; ++i) d(l, i) = s * pq.eigen(l).edot(out.t[i]);
    }
    Eigen::MatrixXd y(N, m);
    for (std::size_t j = 0; j < N; ++j)
        for (int l = 0; l < m; ++l) y(j, l) = pq.point(j, l);
    out.x = y * c;
    out.dw = y * d;
    return out;
}

Eigen::MatrixXd sigma_paths(const ModelParams& m, const ForwardVarianceCurve& xi0, const SpxPaths& paths) {
    const Eigen::Index N = paths.x.rows(), n = paths.x.cols();
    Eigen::MatrixXd s(N, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double t = paths.t[i];
        const double g = g_norm(m.kernel, m.poly, t);
        const double f = g > 0.0 ? std::sqrt(xi0(t) / g) : std::sqrt(xi0(t));
        for (Eigen::Index j = 0; j < N; ++j) s(j, i) = f * m.poly.eval(paths.x(j, i));
    }
    return s;
}

std::vector<double> quantize_U(const Eigen::MatrixXd& sigma, const std::vector<double>& w) {
    std::vector<double> u(sigma.rows(), 0.0);
    for (Eigen::Index i = 0; i < sigma.cols(); ++i)
        for (Eigen::Index j = 0; j < sigma.rows(); ++j) u[j] += w[i] * sigma(j, i) * sigma(j, i);
    return u;
}

VResult quantize_V(const Eigen::MatrixXd& sigma, const SpxPaths& paths, const ModelParams& m,
                   const ForwardVarianceCurve& xi0, CorrectionMode mode, bool second_moment_match) {
    const Eigen::Index N = sigma.rows(), n = sigma.cols();
    const auto k0 = m.kernel.value_at_zero();
    if (mode == CorrectionMode::Auto) {
        const bool smooth = m.kernel.type == KernelType::ShiftedFractional || m.kernel.type == KernelType::Exponential;
        mode = smooth ? CorrectionMode::Semimartingale : CorrectionMode::Renormalized;
    }
    if (mode == CorrectionMode::Semimartingale && !k0)
        throw ParameterError("semimartingale correction needs a kernel with finite K(0)");

    std::vector<double> I(N, 0.0), Q(N, 0.0);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double t = paths.t[i];
        const double g = g_norm(m.kernel, m.poly, t);
        const double f = g > 0.0 ? std::sqrt(xi0(t) / g) : std::sqrt(xi0(t));
        for (Eigen::Index j = 0; j < N; ++j) {
            I[j] += paths.w[i] * sigma(j, i) * paths.dw(j, i);
            Q[j] += paths.w[i] * f * m.poly.derivative(paths.x(j, i));
        }
    }
    VResult r;
    r.mode = mode;
    if (mode == CorrectionMode::Semimartingale) {
        r.C = *k0;
    } else {
        double EI = 0.0, EQ = 0.0;
        for (Eigen::Index j = 0; j < N; ++j) {
            EI += paths.p[j] * I[j];
            EQ += paths.p[j] * Q[j];
        }
        if (std::fabs(EQ) > 1e-300) {
            r.C = 2.0 * EI / EQ;
        } else {
            r.C = 0.0;
            r.correction_skipped = true;
        }
    }
    r.v.resize(N);
    for (Eigen::Index j = 0; j < N; ++j) r.v[j] = I[j] - 0.5 * r.C * Q[j];
    if (second_moment_match) {
        double m2 = 0.0;
        for (Eigen::Index j = 0; j < N; ++j) m2 += paths.p[j] * r.v[j] * r.v[j];
        const double target = xi0.integral(0.0, paths.T);
        if (m2 > 0.0) {
            r.b = target / m2;
            const double sb = std::sqrt(r.b);
            for (double& x : r.v) x *= sb;
        }
    }
    return r;
}

SpxQuantization spx_from_paths(const ModelParams& m, const ForwardVarianceCurve& xi0, const SpxPaths& paths,
                               const SpxConfig& cfg) {
    const Eigen::MatrixXd sigma = sigma_paths(m, xi0, paths);
    SpxQuantization q;
    q.u = quantize_U(sigma, paths.w);
    auto vr = quantize_V(sigma, paths, m, xi0, cfg.mode, cfg.second_moment_match);
    q.v = std::move(vr.v);
    q.b = vr.b;
    q.C = vr.C;
    q.mode = vr.mode;
    q.correction_skipped = vr.correction_skipped;
    q.p = paths.p;
    q.eps_lambda = paths.eps_lambda;
    q.eps_clamped = paths.eps_clamped;
    return q;
}

SpxPaths build_spx_paths(const KernelSpec& k, double T, const SpxConfig& cfg) {
    cfg.validate();
    ProductQuantizer pq(T, optimal_decomposition(cfg.N, T).sizes);
    bool clamped = false;
    if (cfg.trace_match) {
        const auto rule = gauss_legendre(cfg.n_t, 0.0, T);
        const auto tm = trace_match_epsilon(k, pq, rule.nodes, rule.weights);
        pq.set_eps_lambda(tm.eps);
        clamped = tm.clamped;
    }
    auto paths = quantize_X(k, pq, cfg.n_t);
    paths.eps_clamped = clamped;
    return paths;
}

SpxQuantization quantize_spx(const ModelParams& m, const ForwardVarianceCurve& xi0, double T, const SpxConfig& cfg) {
    m.validate();
    if (!(T > 0.0)) throw ParameterError("spx: T must be > 0");
    const SpxPaths paths = build_spx_paths(m.kernel, T, cfg);
    return spx_from_paths(m, xi0, paths, cfg);
}

namespace {

template <class F>
double mixture_sum(const SpxQuantization& sq, double rho, double S0, double T, double K, F payoff) {
    if (!(K > 0.0)) throw ParameterError("strike must be > 0");
    if (!(rho >= -1.0 && rho <= 1.0)) throw ParameterError("rho must lie in [-1, 1]");
    if (!(T > 0.0)) throw ParameterError("maturity must be > 0");
    double s = 0.0;
    const double r2 = rho * rho;
    const double c = std::max(1.0 - r2, 0.0);
    for (std::size_t j = 0; j < sq.p.size(); ++j) {
        const double x = S0 * std::exp(-0.5 * r2 * sq.u[j] + rho * sq.v[j]);
        const double vol = std::sqrt(c * std::max(sq.u[j], 0.0) / T);
        s += sq.p[j] * payoff(x, vol);
    }
    return s;
}

}  // namespace

double price_call_quantized(const SpxQuantization& sq, double rho, double S0, double T, double K) {
    return mixture_sum(sq, rho, S0, T, K, [&](double x, double vol) { return bs_call(x, vol, T, K); });
}

double price_put_quantized(const SpxQuantization& sq, double rho, double S0, double T, double K) {
    return mixture_sum(sq, rho, S0, T, K, [&](double x, double vol) { return bs_put(x, vol, T, K); });
}

double forward_quantized(const SpxQuantization& sq, double rho, double S0) {
    double s = 0.0;
    for (std::size_t j = 0; j < sq.p.size(); ++j) s += sq.p[j] * S0 * std::exp(-0.5 * rho * rho * sq.u[j] + rho * sq.v[j]);
    return s;
}

GaussianMixture mixture_density(const SpxQuantization& sq, double rho) {
    if (!(std::fabs(rho) < 1.0)) throw ParameterError("mixture_density: |rho| must be < 1");
    GaussianMixture g;
    for (std::size_t j = 0; j < sq.p.size(); ++j) {
        const double var = (1.0 - rho * rho) * sq.u[j];
        if (!(var > 0.0)) throw DegenerateInputError("mixture_density: component with zero variance");
        g.mean.push_back(-0.5 * sq.u[j] + rho * sq.v[j]);
        g.var.push_back(var);
        g.weight.push_back(sq.p[j]);
    }
    return g;
}

double GaussianMixture::density(double x) const {
    double s = 0.0;
    for (std::size_t j = 0; j < weight.size(); ++j) {
        const double sd = std::sqrt(var[j]);
        s += weight[j] * norm_pdf((x - mean[j]) / sd) / sd;
    }
    return s;
}

}  // namespace gpv
