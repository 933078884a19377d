#include "gpvol/convolution.hpp"

#include <cmath>
#include <optional>

#include "gpvol/errors.hpp"
#include "gpvol/kl.hpp"
#include "gpvol/quadrature.hpp"
#include "gpvol/special.hpp"

namespace gpv {

namespace {

bool constant_kernel(const KernelSpec& k) {
    return k.H == 0.5 && (k.type == KernelType::Fractional || k.type == KernelType::Exponential ||
                          k.type == KernelType::ShiftedFractional);
}

// int_0^x r^a cos(w r) dr and int_0^x r^a sin(w r) dr with a = H - 1/2 > -1.
struct PowerTrig {
    double c = 0.0;
    double s = 0.0;
};

std::optional<PowerTrig> power_trig(double H, double w, double x) {
    if (x <= 0.0) return PowerTrig{};
    const double a = H - 0.5;
    const double h1 = 0.5 * (a + 1.0);
    const double h2 = h1 + 0.5;
    const double z = -0.25 * w * w * x * x;
    auto fc = hyp1f2_series(h1, 0.5, 1.0 + h1, z);
    auto fs = hyp1f2_series(h2, 1.5, 1.0 + h2, z);
    if (!fc || !fs) return std::nullopt;
    PowerTrig r;
    r.c = std::pow(x, a + 1.0) / (a + 1.0) * fc->value;
    r.s = w * std::pow(x, a + 2.0) / (a + 2.0) * fs->value;
    return r;
}

// int_lo^hi r^a [cos(w r) cos(w x0) + sin(w r) sin(w x0)] dr = int_lo^hi r^a cos(w (x0 - r)) dr
std::optional<double> shifted_cos(double H, double w, double x0, double lo, double hi) {
    auto ph = power_trig(H, w, hi);
    auto pl = power_trig(H, w, lo);
    if (!ph || !pl) return std::nullopt;
    return std::cos(w * x0) * (ph->c - pl->c) + std::sin(w * x0) * (ph->s - pl->s);
}

// int_0^t exp(-kappa (t - s)) cos(w s) ds
double exp_cos(double kappa, double w, double t) {
    return (kappa * std::cos(w * t) + w * std::sin(w * t) - kappa * std::exp(-kappa * t)) / (kappa * kappa + w * w);
}

}  // namespace

double conv_edot_spx_quadrature(const KernelSpec& k, double t, int kl_index, double T) {
    const KlEigen eig = kl_eigen(T, kl_index);
    if (t <= 0.0) return 0.0;
    return integrate_kernel_product(k, [&](double r) { return eval_kernel(k, r) * eig.edot(t - r); }, {0.0}, t, 1e-12);
}

double conv_edot_vix_quadrature(const KernelSpec& k, double u, int kl_index, double T, double basis_T) {
    if (basis_T <= 0.0) basis_T = T;
    const KlEigen eig = kl_eigen(basis_T, kl_index);
    const double d = u - T;
    return integrate_kernel_product(k, [&](double r) { return eval_kernel(k, r + d) * eig.edot(T - r); }, {d}, T,
                                    1e-12);
}

ConvResult conv_edot_spx(const KernelSpec& k, double t, int kl_index, double T) {
    if (t < 0.0 || t > T * (1.0 + 1e-12)) throw ParameterError("conv_edot_spx: need 0 <= t <= T");
    const KlEigen eig = kl_eigen(T, kl_index);
    if (t == 0.0) return {};
    if (constant_kernel(k)) return {eig.e(t), false};
    const double w = eig.omega;
    const double pref = std::sqrt(2.0 / T) * w;
    switch (k.type) {
        case KernelType::Exponential:
            return {k.exp_scale() * pref * exp_cos(k.exp_rate(), w, t), false};
        case KernelType::Fractional: {
            auto v = shifted_cos(k.H, w, t, 0.0, t);
            if (v) return {pref * *v, false};
            break;
        }
        case KernelType::ShiftedFractional: {
            if (k.H > -0.5) {
                auto v = shifted_cos(k.H, w, t + k.eps, k.eps, t + k.eps);
                if (v) return {pref * *v, false};
                break;
            }
            return {conv_edot_spx_quadrature(k, t, kl_index, T), false};
        }
        case KernelType::LogModulated:
            return {conv_edot_spx_quadrature(k, t, kl_index, T), false};
    }
    return {conv_edot_spx_quadrature(k, t, kl_index, T), true};
}

ConvResult conv_edot_vix(const KernelSpec& k, double u, int kl_index, double T, double basis_T) {
    if (basis_T <= 0.0) basis_T = T;
    if (u < T) throw ParameterError("conv_edot_vix: need u >= T");
    const KlEigen eig = kl_eigen(basis_T, kl_index);
    if (constant_kernel(k)) return {eig.e(T), false};
    const double w = eig.omega;
    const double pref = std::sqrt(2.0 / basis_T) * w;
    switch (k.type) {
        case KernelType::Exponential: {
            const double kap = k.exp_rate();
            return {k.exp_scale() * std::exp(-kap * (u - T)) * pref * exp_cos(kap, w, T), false};
        }
        case KernelType::Fractional: {
            auto v = shifted_cos(k.H, w, u, u - T, u);
            if (v) return {pref * *v, false};
            break;
        }
        case KernelType::ShiftedFractional: {
            if (k.H > -0.5) {
                auto v = shifted_cos(k.H, w, u + k.eps, u - T + k.eps, u + k.eps);
                if (v) return {pref * *v, false};
                break;
            }
            return {conv_edot_vix_quadrature(k, u, kl_index, T, basis_T), false};
        }
        case KernelType::LogModulated:
            return {conv_edot_vix_quadrature(k, u, kl_index, T, basis_T), false};
    }
    return {conv_edot_vix_quadrature(k, u, kl_index, T, basis_T), true};
}

}  // namespace gpv
