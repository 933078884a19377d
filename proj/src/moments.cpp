#include "gpvol/moments.hpp"

#include <cmath>

#include "gpvol/errors.hpp"
#include "gpvol/quadrature.hpp"
#include "gpvol/special.hpp"

namespace gpv {

PolyCoeffs::PolyCoeffs(std::array<double, 4> a) : alpha(a) {
    bool any = false;
    for (double v : a) {
        if (!std::isfinite(v)) throw ParameterError("polynomial coefficients must be finite");
        if (v < 0.0) throw ParameterError("polynomial coefficients must be >= 0");
        any = any || v != 0.0;
    }
    if (!any) throw ParameterError("polynomial coefficients must not all be zero");
}

PolyCoeffs PolyCoeffs::unchecked(std::array<double, 4> a) {
    PolyCoeffs p;
    p.alpha = a;
    return p;
}

std::array<double, 6> PolyCoeffs::dense() const {
    return {alpha[0], alpha[1], 0.0, alpha[2], 0.0, alpha[3]};
}

double PolyCoeffs::eval(double x) const {
    const double x2 = x * x;
    return alpha[0] + x * (alpha[1] + x2 * (alpha[2] + x2 * alpha[3]));
}

double PolyCoeffs::derivative(double x) const {
    const double x2 = x * x;
    return alpha[1] + x2 * (3.0 * alpha[2] + 5.0 * x2 * alpha[3]);
}

double gaussian_central_moment(double variance, int i) {
    if (i < 0) throw ParameterError("gaussian_central_moment: order must be >= 0");
    if (i % 2 == 1) return 0.0;
    if (i == 0) return 1.0;
    return std::pow(variance, 0.5 * i) * static_cast<double>(double_factorial(i - 1));
}

std::vector<double> self_convolution(const std::vector<double>& a) {
    if (a.empty()) return {};
    std::vector<double> c(2 * a.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a.size(); ++j) c[i + j] += a[i] * a[j];
    return c;
}

double g_from_variance(const PolyCoeffs& poly, double variance) {
    const auto d = poly.dense();
    const auto aa = self_convolution(std::vector<double>(d.begin(), d.end()));
    double g = 0.0;
    for (std::size_t k = 0; k < aa.size(); k += 2) g += aa[k] * gaussian_central_moment(variance, static_cast<int>(k));
    return g;
}

double g_norm(const KernelSpec& k, const PolyCoeffs& poly, double t) {
    if (t < 0.0) throw ParameterError("g_norm: t must be >= 0");
    return g_from_variance(poly, kernel_l2(k, 0.0, t));
}

double isserlis_moment(double var_x, double var_z, double cov_xz, int p, int q, int cap) {
    if (p < 0 || q < 0) throw ParameterError("isserlis_moment: orders must be >= 0");
    if (p + q > cap) throw ParameterError("isserlis_moment: total order exceeds cap");
    if ((p + q) % 2 == 1) return 0.0;
    // choose r cross pairs X-Z (r! matchings), pair the rest within each block
    double s = 0.0;
    for (int r = p % 2; r <= std::min(p, q); r += 2) {
        double cnt = static_cast<double>(binomial(p, r)) * static_cast<double>(binomial(q, r));
        for (int i = 2; i <= r; ++i) cnt *= i;
        s += cnt * std::pow(cov_xz, r) * gaussian_central_moment(var_x, p - r) * gaussian_central_moment(var_z, q - r);
    }
    return s;
}

double skew_covariance(const KernelSpec& k, const PolyCoeffs& poly, const ForwardVarianceCurve& xi0, double rho,
                       double T, int n_outer) {
    if (!(T > 0.0)) throw ParameterError("skew_covariance: T must be > 0");
    if (rho == 0.0) return 0.0;
    const auto d = poly.dense();
    const std::vector<double> dv(d.begin(), d.end());
    const auto aa = self_convolution(dv);
    const int deg = static_cast<int>(aa.size()) - 1;

    auto ratio = [&](double t) {
        const double g = g_norm(k, poly, t);
        return g > 0.0 ? xi0(t) / g : 1.0;
    };

    const auto outer = gauss_legendre(n_outer, 0.0, T);
    double total = 0.0;
    for (std::size_t a = 0; a < outer.size(); ++a) {
        const double t = outer.nodes[a];
        const double var_x = kernel_l2(k, 0.0, t);
        const double st = std::sqrt(ratio(t));
        auto inner = [&](double r) {
            const double u = t + r;
            const double var_g = kernel_l2(k, 0.0, r);
            const double var_z = kernel_l2(k, r, u);
            const double cxz = kernel_cross(k, 0.0, r, t);
            double s = 0.0;
            for (int kk = 1; kk <= deg; ++kk) {
                if (aa[kk] == 0.0) continue;
                for (int i = 0; i < kk; i += 2) {
                    const double gm = gaussian_central_moment(var_g, i);
                    const double coef = aa[kk] * static_cast<double>(binomial(kk, i)) * (kk - i) * gm;
                    for (int j = 0; j < static_cast<int>(dv.size()); ++j) {
                        if (dv[j] == 0.0) continue;
                        s += coef * dv[j] * isserlis_moment(var_x, var_z, cxz, j, kk - i - 1);
                    }
                }
            }
            return ratio(u) * eval_kernel(k, r) * s;
        };
        total += outer.weights[a] * st * integrate_kernel_product(k, inner, {0.0}, T - t, 1e-8);
    }
    return rho * total;
}

}  // namespace gpv
