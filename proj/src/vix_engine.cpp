#include "gpvol/vix_engine.hpp"

#include <algorithm>
#include <cmath>

#include "gpvol/convolution.hpp"
#include "gpvol/errors.hpp"
#include "gpvol/quadrature.hpp"
#include "gpvol/special.hpp"

namespace gpv {

void VixConfig::validate() const {
    if (!(T > 0.0)) throw ParameterError("vix: T must be > 0");
    if (!(delta > 0.0)) throw ParameterError("vix: delta must be > 0");
    if (n_u < 2) throw ParameterError("vix: n_u must be >= 2");
    if (moment_q < 0 || moment_q % 2 != 0) throw ParameterError("vix: moment_q must be 0 or a positive even integer");
}

ZTrajectories quantize_Z(const KernelSpec& k, const ProductQuantizer& pq, const VixConfig& cfg) {
    cfg.validate();
    const auto rule = gauss_legendre(cfg.n_u, cfg.T, cfg.T + cfg.delta);
    ZTrajectories out;
    out.u = rule.nodes;
    out.w = rule.weights;
    out.p = pq.probabilities();
    const int m = pq.levels();
    const std::size_t N = pq.count();
    Eigen::MatrixXd conv(m, cfg.n_u);
    for (int l = 0; l < m; ++l)
        for (int i = 0; i < cfg.n_u; ++i)
            conv(l, i) = pq.scale(l) * conv_edot_vix(k, out.u[i], l + 1, cfg.T, pq.horizon()).value;
    Eigen::MatrixXd y(N, m);
    for (std::size_t j = 0; j < N; ++j)
        for (int l = 0; l < m; ++l) y(j, l) = pq.point(j, l);
    out.z = y * conv;
    return out;
}

void moment_match_Z(ZTrajectories& z, const KernelSpec& k, const VixConfig& cfg, int q) {
    if (q < 2 || q % 2 != 0) throw ParameterError("moment_match_Z: q must be a positive even integer");
    const std::size_t N = z.p.size();
    for (Eigen::Index i = 0; i < z.z.cols(); ++i) {
        const double u = z.u[i];
        const double exact = gaussian_central_moment(kernel_l2(k, u - cfg.T, u), q);
        double emp = 0.0;
        for (std::size_t j = 0; j < N; ++j) emp += z.p[j] * std::pow(z.z(j, i), q);
        if (!(emp > 0.0)) throw DegenerateInputError("moment_match_Z: empirical moment is zero");
        z.z.col(i) *= std::pow(exact / emp, 1.0 / q);
    }
}

double VixPolynomial::value(const double* z, std::ptrdiff_t stride) const {
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double x = z[static_cast<std::ptrdiff_t>(i) * stride];
        const auto& ci = c[i];
        double h = ci[10];
        for (int d = 9; d >= 0; --d) h = h * x + ci[d];
        s += scale[i] * h;
    }
    return s;
}

VixPolynomial vix_polynomial(const ModelParams& m, const ForwardVarianceCurve& xi0, const VixConfig& cfg) {
    cfg.validate();
    const auto rule = gauss_legendre(cfg.n_u, cfg.T, cfg.T + cfg.delta);
    const auto d = m.poly.dense();
    const auto aa = self_convolution(std::vector<double>(d.begin(), d.end()));
    VixPolynomial vp;
    vp.u = rule.nodes;
    vp.w = rule.weights;
    for (std::size_t i = 0; i < vp.u.size(); ++i) {
        const double u = vp.u[i];
        const double g = g_norm(m.kernel, m.poly, u);
        const double ratio = g > 0.0 ? xi0(u) / g : 1.0;
        vp.scale.push_back(1e4 / cfg.delta * vp.w[i] * ratio);
        const double var_g = kernel_l2(m.kernel, 0.0, u - cfg.T);
        std::array<double, 11> c{};
        for (int kk = 0; kk < static_cast<int>(aa.size()); ++kk) {
            if (aa[kk] == 0.0) continue;
            for (int dd = 0; dd <= kk; ++dd) {
                const int i_g = kk - dd;
                if (i_g % 2) continue;
                c[dd] += aa[kk] * static_cast<double>(binomial(kk, i_g)) * gaussian_central_moment(var_g, i_g);
            }
        }
        vp.c.push_back(c);
    }
    return vp;
}

namespace {

VixQuantization finish(std::vector<double> v, std::vector<double> p) {
    VixQuantization q;
    for (double& x : v) {
        if (x < 0.0) {
            x = 0.0;
            ++q.clipped;
        }
    }
    q.v = std::move(v);
    q.p = std::move(p);
    return q;
}

}  // namespace

VixQuantization vix_points(const ModelParams& m, const ForwardVarianceCurve& xi0, const ZTrajectories& z,
                           const VixConfig& cfg) {
    const auto vp = vix_polynomial(m, xi0, cfg);
    if (static_cast<std::size_t>(z.z.cols()) != vp.u.size()) throw ParameterError("vix_points: u-grid mismatch");
    const std::size_t N = z.p.size();
    std::vector<double> v(N);
    for (std::size_t j = 0; j < N; ++j) v[j] = vp.value(z.z.data() + j, z.z.rows());
    return finish(std::move(v), z.p);
}

VixQuantization vix_points_markovian(const ModelParams& m, const ForwardVarianceCurve& xi0, const VixConfig& cfg,
                                     const ScalarQuantizer& sq, int q_match) {
    if (m.kernel.type != KernelType::Exponential)
        throw ParameterError("vix_points_markovian: requires the exponential kernel");
    const double sx = std::sqrt(kernel_l2(m.kernel, 0.0, cfg.T));
    std::vector<double> y = sq.points;
    if (q_match > 0) {
        if (q_match % 2) throw ParameterError("vix_points_markovian: q must be even");
        double emp = 0.0;
        for (int i = 0; i < sq.N; ++i) emp += sq.probs[i] * std::pow(y[i], q_match);
        if (emp > 0.0) {
            const double f = std::pow(gaussian_central_moment(1.0, q_match) / emp, 1.0 / q_match);
            for (double& x : y) x *= f;
        }
    }
    const auto vp = vix_polynomial(m, xi0, cfg);
    const double kap = m.kernel.exp_rate();
    std::vector<double> decay(vp.u.size());
    for (std::size_t i = 0; i < vp.u.size(); ++i) decay[i] = std::exp(-kap * (vp.u[i] - cfg.T));
    std::vector<double> v(sq.N), zrow(vp.u.size());
    for (int j = 0; j < sq.N; ++j) {
        for (std::size_t i = 0; i < vp.u.size(); ++i) zrow[i] = sx * y[j] * decay[i];
        v[j] = vp.value(zrow.data());
    }
    return finish(std::move(v), sq.probs);
}

VixQuantization quantize_vix(const ModelParams& m, const ForwardVarianceCurve& xi0, const VixConfig& cfg, long N) {
    m.validate();
    cfg.validate();
    if (m.kernel.type == KernelType::Exponential && cfg.markovian_exponential) {
        const int n = static_cast<int>(std::min<long>(N, kMaxScalarQuantizer));
        return vix_points_markovian(m, xi0, cfg, *optimal_scalar_quantizer(n), cfg.moment_q);
    }
    const double Tb = cfg.basis_horizon();
    ProductQuantizer pq(Tb, optimal_decomposition(N, Tb).sizes);
    auto z = quantize_Z(m.kernel, pq, cfg);
    if (cfg.moment_q > 0 && pq.count() > 1) moment_match_Z(z, m.kernel, cfg, cfg.moment_q);
    return vix_points(m, xi0, z, cfg);
}

double price_vix_future(const VixQuantization& vq) {
    double s = 0.0;
    for (std::size_t j = 0; j < vq.v.size(); ++j) s += vq.p[j] * std::sqrt(vq.v[j]);
    return s;
}

double price_vix_call(const VixQuantization& vq, double K) {
    double s = 0.0;
    for (std::size_t j = 0; j < vq.v.size(); ++j) s += vq.p[j] * std::max(std::sqrt(vq.v[j]) - K, 0.0);
    return s;
}

double price_vix_put(const VixQuantization& vq, double K) {
    double s = 0.0;
    for (std::size_t j = 0; j < vq.v.size(); ++j) s += vq.p[j] * std::max(K - std::sqrt(vq.v[j]), 0.0);
    return s;
}

}  // namespace gpv
