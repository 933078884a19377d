#pragma once

#include <functional>
#include <initializer_list>
#include <optional>
#include <string>

namespace gpv {

enum class KernelType { Fractional, LogModulated, ShiftedFractional, Exponential };

/// One of the four Volterra kernels:
///   Fractional         t^{H-1/2},                         H in (0, 1/2]
///   LogModulated       t^{H-1/2} max(theta log(1/t), 1)^{-beta},  H in [0, 1/2], theta > 0, beta > 1
///   ShiftedFractional  (t + eps)^{H-1/2},                 H <= 1/2, eps > 0
///   Exponential        eps^{H-1/2} exp(-(1/2 - H) t / eps), H <= 1/2, eps > 0
struct KernelSpec {
    KernelType type = KernelType::Fractional;
    double H = 0.5;
    double eps = 0.0;
    double theta = 0.0;
    double beta = 0.0;

    static KernelSpec fractional(double H);
    static KernelSpec log_modulated(double H, double theta, double beta);
    static KernelSpec shifted_fractional(double H, double eps);
    static KernelSpec exponential(double H, double eps);

    /// Throws ParameterError when the parameters leave the kernel's domain.
    void validate() const;

    bool singular_at_zero() const;
    /// K(0) when finite.
    std::optional<double> value_at_zero() const;
    /// Mean-reversion speed (1/2 - H)/eps of the exponential kernel.
    double exp_rate() const;
    /// Prefactor eps^{H-1/2} of the exponential kernel.
    double exp_scale() const;

    std::string name() const;
};

/// K(t). Singular kernels require t > 0.
double eval_kernel(const KernelSpec& k, double t);

/// Integral of K(s)^2 over [a, b].
double kernel_l2(const KernelSpec& k, double a, double b);

/// Integral of K(s) over [a, b].
double kernel_l1(const KernelSpec& k, double a, double b);

/// Integral over r in [0, length] of K(r + d1) K(r + d2), d1, d2 >= 0.
double kernel_cross(const KernelSpec& k, double d1, double d2, double length);

/// Integral over r in [0, length] of f(r), where f contains factors K(r + d) for each d in shifts.
/// Splits at the log-modulated threshold so the pieces are smooth apart from r = 0.
double integrate_kernel_product(const KernelSpec& k, const std::function<double(double)>& f,
                                std::initializer_list<double> shifts, double length, double rel_tol = 1e-10);

/// E[X_t X_s] = int_0^{t^s} K(t-u) K(s-u) du.
double cov_X(const KernelSpec& k, double t, double s);

}  // namespace gpv
