#pragma once

#include <array>
#include <vector>

#include "gpvol/curve.hpp"
#include "gpvol/kernel.hpp"

namespace gpv {

/// p(x) = a0 + a1 x + a3 x^3 + a5 x^5.
struct PolyCoeffs {
    std::array<double, 4> alpha{0.0, 1.0, 0.0, 0.0};

    PolyCoeffs() = default;
    /// Enforces alpha_k >= 0, finite, not all zero.
    explicit PolyCoeffs(std::array<double, 4> a);
    /// No sign check; for diagnostics outside the admissible region.
    static PolyCoeffs unchecked(std::array<double, 4> a);

    /// Dense coefficients of degrees 0..5.
    std::array<double, 6> dense() const;
    double eval(double x) const;
    double derivative(double x) const;
    bool constant() const { return alpha[1] == 0.0 && alpha[2] == 0.0 && alpha[3] == 0.0; }
};

/// E[G^i] for G ~ N(0, variance).
double gaussian_central_moment(double variance, int i);

/// (a*a)_k = sum_j a_j a_{k-j}, length 2n - 1.
std::vector<double> self_convolution(const std::vector<double>& a);

/// g(t) = E[p(X_t)^2].
double g_norm(const KernelSpec& k, const PolyCoeffs& poly, double t);

/// g from a known variance of X_t.
double g_from_variance(const PolyCoeffs& poly, double variance);

inline constexpr int kIsserlisCap = 24;

/// E[X^p Z^q] for a centred Gaussian pair.
double isserlis_moment(double var_x, double var_z, double cov_xz, int p, int q, int cap = kIsserlisCap);

/// Integrated spot-variance covariance whose sign drives the SPX ATM skew.
double skew_covariance(const KernelSpec& k, const PolyCoeffs& poly, const ForwardVarianceCurve& xi0, double rho,
                       double T, int n_outer = 24);

}  // namespace gpv
