#pragma once

#include <cstdint>
#include <optional>

namespace gpv {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kSqrt2 = 1.41421356237309504880;
inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;

/// Standard normal density.
double norm_pdf(double x);

/// Standard normal cdf, erfc based (absolute error below 1e-16).
double norm_cdf(double x);

/// Upper tail 1 - N(x) without cancellation.
double norm_sf(double x);

/// Inverse of the standard normal cdf.
double norm_quantile(double p);

/// (n-1)!! style double factorial n!! with 0!! = (-1)!! = 1. Exact up to n = 33.
std::uint64_t double_factorial(int n);

/// Binomial coefficient, exact in 64 bits for the degrees used here.
std::uint64_t binomial(int n, int k);

struct SeriesResult {
    double value = 0.0;
    int terms = 0;
    /// Estimated relative error from cancellation (max |term| * eps / |sum|).
    double cancellation_error = 0.0;
};

/// Generalized hypergeometric 1F2(a; b1, b2; z) by its power series, summed in
/// long double. Returns nullopt when the series does not meet the tolerance
/// within max_terms or cancellation makes the sum unreliable.
std::optional<SeriesResult> hyp1f2_series(double a, double b1, double b2, double z,
                                          int max_terms = 10000, double tol = 1e-15,
                                          double max_cancellation = 1e-11);

/// 1F2(h; q, 1+h; z), the parameter pattern of the fractional-kernel
/// convolution integrals. Throws NumericError if the series fails.
double hyp_1f2(double h, double q, double z);

}  // namespace gpv
