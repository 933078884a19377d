#include "gpvol/special.hpp"

#include <boost/math/special_functions/erf.hpp>
#include <cmath>
#include <limits>

#include "gpvol/errors.hpp"

namespace gpv {

double norm_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double norm_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

double norm_sf(double x) { return 0.5 * std::erfc(x / kSqrt2); }

double norm_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw ParameterError("norm_quantile: p must lie in (0,1)");
    return -kSqrt2 * boost::math::erfc_inv(2.0 * p);
}

std::uint64_t double_factorial(int n) {
    if (n <= 0) return 1;
    if (n > 33) throw ParameterError("double_factorial: n too large for exact 64-bit value");
    std::uint64_t r = 1;
    for (int k = n; k > 1; k -= 2) r *= static_cast<std::uint64_t>(k);
    return r;
}

std::uint64_t binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    if (k > n - k) k = n - k;
    std::uint64_t r = 1;
    for (int i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
    return r;
}

std::optional<SeriesResult> hyp1f2_series(double a, double b1, double b2, double z, int max_terms,
                                          double tol, double max_cancellation) {
    auto bad_lower = [](double b) { return b <= 0.0 && std::floor(b) == b; };
    if (bad_lower(b1) || bad_lower(b2)) throw ParameterError("hyp1f2: lower parameter is a non-positive integer");

    long double term = 1.0L;
    long double sum = 1.0L;
    long double max_abs = 1.0L;
    const long double zl = z;
    for (int n = 0; n < max_terms; ++n) {
        term *= (static_cast<long double>(a) + n) * zl /
                ((static_cast<long double>(b1) + n) * (static_cast<long double>(b2) + n) * (n + 1));
        sum += term;
        max_abs = std::max(max_abs, std::fabs(term));
        if (term == 0.0L || std::fabs(term) < tol * std::fabs(sum)) {
            SeriesResult r;
            r.value = static_cast<double>(sum);
            r.terms = n + 2;
            const long double eps = std::numeric_limits<long double>::epsilon();
            r.cancellation_error = sum == 0.0L ? 1.0 : static_cast<double>(max_abs * eps / std::fabs(sum));
            if (r.cancellation_error > max_cancellation) return std::nullopt;
            return r;
        }
    }
    return std::nullopt;
}

double hyp_1f2(double h, double q, double z) {
    auto r = hyp1f2_series(h, q, 1.0 + h, z);
    if (!r) throw NumericError("hyp_1f2: series did not converge");
    return r->value;
}

}  // namespace gpv
