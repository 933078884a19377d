#include "gpvol/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "gpvol/errors.hpp"
#include "gpvol/quadrature.hpp"

namespace gpv {

KernelSpec KernelSpec::fractional(double H) {
    KernelSpec k;
    k.type = KernelType::Fractional;
    k.H = H;
    k.validate();
    return k;
}

KernelSpec KernelSpec::log_modulated(double H, double theta, double beta) {
    KernelSpec k;
    k.type = KernelType::LogModulated;
    k.H = H;
    k.theta = theta;
    k.beta = beta;
    k.validate();
    return k;
}

KernelSpec KernelSpec::shifted_fractional(double H, double eps) {
    KernelSpec k;
    k.type = KernelType::ShiftedFractional;
    k.H = H;
    k.eps = eps;
    k.validate();
    return k;
}

KernelSpec KernelSpec::exponential(double H, double eps) {
    KernelSpec k;
    k.type = KernelType::Exponential;
    k.H = H;
    k.eps = eps;
    k.validate();
    return k;
}

void KernelSpec::validate() const {
    if (!std::isfinite(H)) throw ParameterError("kernel: H must be finite");
    switch (type) {
        case KernelType::Fractional:
            if (!(H > 0.0 && H <= 0.5)) throw ParameterError("fractional kernel: H must lie in (0, 1/2]");
            break;
        case KernelType::LogModulated:
            if (!(H >= 0.0 && H <= 0.5)) throw ParameterError("log-modulated kernel: H must lie in [0, 1/2]");
            if (!(theta > 0.0)) throw ParameterError("log-modulated kernel: theta must be > 0");
            if (!(beta > 1.0)) throw ParameterError("log-modulated kernel: beta must be > 1");
            break;
        case KernelType::ShiftedFractional:
        case KernelType::Exponential:
            if (!(H <= 0.5)) throw ParameterError(name() + " kernel: H must be <= 1/2");
            if (!(eps > 0.0)) throw ParameterError(name() + " kernel: eps must be > 0");
            break;
    }
}

bool KernelSpec::singular_at_zero() const {
    return (type == KernelType::Fractional || type == KernelType::LogModulated) && H < 0.5;
}

std::optional<double> KernelSpec::value_at_zero() const {
    switch (type) {
        case KernelType::Fractional:
            if (H == 0.5) return 1.0;
            return std::nullopt;
        case KernelType::LogModulated:
            // t^{0} * (theta log(1/t))^{-beta} -> 0 as t -> 0
            if (H == 0.5) return 0.0;
            return std::nullopt;
        case KernelType::ShiftedFractional:
            return std::pow(eps, H - 0.5);
        case KernelType::Exponential:
            return exp_scale();
    }
    return std::nullopt;
}

double KernelSpec::exp_rate() const { return (0.5 - H) / eps; }
double KernelSpec::exp_scale() const { return std::pow(eps, H - 0.5); }

std::string KernelSpec::name() const {
    switch (type) {
        case KernelType::Fractional: return "fractional";
        case KernelType::LogModulated: return "log_modulated";
        case KernelType::ShiftedFractional: return "shifted_fractional";
        case KernelType::Exponential: return "exponential";
    }
    return "unknown";
}

namespace {

// int_a^b t^p dt for 0 <= a <= b (a > 0 when p <= -1).
double power_integral(double p, double a, double b) {
    if (b <= a) return 0.0;
    if (std::fabs(p + 1.0) < 1e-14) return std::log(b / a);
    const double q = p + 1.0;
    if (a == 0.0) return std::pow(b, q) / q;
    return (std::pow(b, q) - std::pow(a, q)) / q;
}

// int_a^b t^{p} (theta log(1/t))^{-gamma} dt for 0 <= a < b <= exp(-1/theta).
// int_a^b t^p (theta log(1/t))^{-gamma} dt for b below the threshold, via x = log(1/t).
double log_region_integral(double p, double gamma, double theta, double a, double b) {
    if (b <= a) return 0.0;
    const double xb = std::log(1.0 / b);
    const double wb = std::pow(theta * xb, 1.0 - gamma);
    double wa = 0.0;
    if (a > 0.0) wa = std::pow(theta * std::log(1.0 / a), 1.0 - gamma);
    const double decay = p + 1.0;
    if (decay == 0.0) return (wb - wa) / ((gamma - 1.0) * theta);
    // x = xb e^s: int_0^{log(xa/xb)} xb (theta xb)^{-gamma} exp(-decay xb e^s - (gamma - 1) s) ds
    double smax = std::min(45.0 / (gamma - 1.0), std::max(0.0, std::log(50.0 / (decay * xb))) + 3.0);
    if (a > 0.0) smax = std::min(smax, std::log(std::log(1.0 / a) / xb));
    if (smax <= 0.0) return 0.0;
    const double lead = xb * std::pow(theta * xb, -gamma);
    auto f = [&](double s) { return std::exp(-decay * xb * std::exp(s) - (gamma - 1.0) * s); };
    return lead * integrate_smooth(f, 0.0, smax, 1e-12);
}

// Split [a,b] at the log-modulation threshold exp(-1/theta); above it K is a pure power.
double log_modulated_integral(const KernelSpec& k, double power, double gamma, double a, double b) {
    const double c = std::exp(-1.0 / k.theta);
    double v = 0.0;
    if (a < c) v += log_region_integral(power, gamma, k.theta, a, std::min(b, c));
    if (b > c) v += power_integral(power, std::max(a, c), b);
    return v;
}

}  // namespace

double eval_kernel(const KernelSpec& k, double t) {
    if (t < 0.0) throw ParameterError("eval_kernel: t must be >= 0");
    switch (k.type) {
        case KernelType::Fractional:
            if (k.H == 0.5) return 1.0;
            if (t == 0.0) throw ParameterError("eval_kernel: fractional kernel is singular at 0");
            return std::pow(t, k.H - 0.5);
        case KernelType::LogModulated: {
            if (t == 0.0) {
                if (k.H == 0.5) return 0.0;
                throw ParameterError("eval_kernel: log-modulated kernel is singular at 0");
            }
            const double lm = std::max(k.theta * std::log(1.0 / t), 1.0);
            return std::pow(t, k.H - 0.5) * std::pow(lm, -k.beta);
        }
        case KernelType::ShiftedFractional:
            return std::pow(t + k.eps, k.H - 0.5);
        case KernelType::Exponential:
            return k.exp_scale() * std::exp(-k.exp_rate() * t);
    }
    return 0.0;
}

double kernel_l2(const KernelSpec& k, double a, double b) {
    if (a < 0.0 || b < a) throw ParameterError("kernel_l2: need 0 <= a <= b");
    if (a == b) return 0.0;
    switch (k.type) {
        case KernelType::Fractional:
            return power_integral(2.0 * k.H - 1.0, a, b);
        case KernelType::LogModulated:
            return log_modulated_integral(k, 2.0 * k.H - 1.0, 2.0 * k.beta, a, b);
        case KernelType::ShiftedFractional:
            return power_integral(2.0 * k.H - 1.0, a + k.eps, b + k.eps);
        case KernelType::Exponential: {
            const double c2 = std::pow(k.eps, 2.0 * k.H - 1.0);
            const double r = 2.0 * k.exp_rate();
            if (r == 0.0) return c2 * (b - a);
            return -c2 * std::exp(-r * a) * std::expm1(-r * (b - a)) / r;
        }
    }
    return 0.0;
}

double kernel_l1(const KernelSpec& k, double a, double b) {
    if (a < 0.0 || b < a) throw ParameterError("kernel_l1: need 0 <= a <= b");
    if (a == b) return 0.0;
    switch (k.type) {
        case KernelType::Fractional:
            return power_integral(k.H - 0.5, a, b);
        case KernelType::LogModulated:
            return log_modulated_integral(k, k.H - 0.5, k.beta, a, b);
        case KernelType::ShiftedFractional:
            return power_integral(k.H - 0.5, a + k.eps, b + k.eps);
        case KernelType::Exponential: {
            const double r = k.exp_rate();
            if (r == 0.0) return k.exp_scale() * (b - a);
            return -k.exp_scale() * std::exp(-r * a) * std::expm1(-r * (b - a)) / r;
        }
    }
    return 0.0;
}

double kernel_cross(const KernelSpec& k, double d1, double d2, double length) {
    if (d1 < 0.0 || d2 < 0.0) throw ParameterError("kernel_cross: offsets must be >= 0");
    if (length <= 0.0) return 0.0;
    if (d1 == d2) return kernel_l2(k, d1, d1 + length);
    switch (k.type) {
        case KernelType::Exponential: {
            const double c2 = std::pow(k.eps, 2.0 * k.H - 1.0);
            const double r = k.exp_rate();
            if (r == 0.0) return c2 * length;
            return -c2 * std::exp(-r * (d1 + d2)) * std::expm1(-2.0 * r * length) / (2.0 * r);
        }
        case KernelType::Fractional:
        case KernelType::ShiftedFractional:
            if (k.H == 0.5) return length;
            break;
        case KernelType::LogModulated:
            break;
    }
    const double lo = std::min(d1, d2);
    const double hi = std::max(d1, d2);
    if (lo == 0.0 && k.singular_at_zero()) {
        return integrate_kernel_product(k, [&](double r) { return eval_kernel(k, r) * eval_kernel(k, r + hi); },
                                        {0.0, hi}, length);
    }
    // Both factors regular on the interval; the nearest singularity sits at r = -lo.
    // Shift the variable so the double-exponential rule clusters nodes there.
    return integrate_kernel_product(k, [&](double r) { return eval_kernel(k, r + lo) * eval_kernel(k, r + hi); },
                                    {lo, hi}, length);
}

double integrate_kernel_product(const KernelSpec& k, const std::function<double(double)>& f,
                                std::initializer_list<double> shifts, double length, double rel_tol) {
    if (length <= 0.0) return 0.0;
    std::vector<double> cut{0.0};
    if (k.type == KernelType::LogModulated) {
        const double c = std::exp(-1.0 / k.theta);
        for (double d : shifts)
            if (c - d > 0.0 && c - d < length) cut.push_back(c - d);
        std::sort(cut.begin(), cut.end());
        cut.erase(std::unique(cut.begin(), cut.end()), cut.end());
    }
    cut.push_back(length);
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < cut.size(); ++i) {
        const double a = cut[i];
        s += integrate_from_singular([&](double r) { return f(a + r); }, cut[i + 1] - a, rel_tol);
    }
    return s;
}

double cov_X(const KernelSpec& k, double t, double s) {
    if (t < 0.0 || s < 0.0) throw ParameterError("cov_X: times must be >= 0");
    const double m = std::min(t, s);
    if (m == 0.0) return 0.0;
    if (t == s) return kernel_l2(k, 0.0, t);
    return kernel_cross(k, std::fabs(t - s), 0.0, m);
}

}  // namespace gpv
