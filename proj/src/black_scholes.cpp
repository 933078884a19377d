#include "gpvol/black_scholes.hpp"

#include <algorithm>
#include <cmath>

#include "gpvol/errors.hpp"
#include "gpvol/special.hpp"

namespace gpv {

namespace {

void check(double x, double sigma, double T, double K) {
    if (!(K > 0.0)) throw ParameterError("bs: strike must be > 0");
    if (!(T > 0.0)) throw ParameterError("bs: maturity must be > 0");
    if (!(sigma >= 0.0)) throw ParameterError("bs: vol must be >= 0");
    if (!(x >= 0.0)) throw ParameterError("bs: underlying must be >= 0");
}

}  // namespace

double bs_call(double x, double sigma, double T, double K) {
    check(x, sigma, T, K);
    const double sd = sigma * std::sqrt(T);
    if (x == 0.0) return 0.0;
    if (sd < 1e-300) return std::max(x - K, 0.0);
    if (!std::isfinite(sd)) return x;
    const double d1 = std::log(x / K) / sd + 0.5 * sd;
    const double d2 = d1 - sd;
    return x * norm_cdf(d1) - K * norm_cdf(d2);
}

double bs_put(double x, double sigma, double T, double K) {
    check(x, sigma, T, K);
    const double sd = sigma * std::sqrt(T);
    if (x == 0.0) return K;
    if (sd < 1e-300) return std::max(K - x, 0.0);
    if (!std::isfinite(sd)) return K;
    const double d1 = std::log(x / K) / sd + 0.5 * sd;
    const double d2 = d1 - sd;
    return K * norm_cdf(-d2) - x * norm_cdf(-d1);
}

double bs_vega(double x, double sigma, double T, double K) {
    check(x, sigma, T, K);
    const double sd = sigma * std::sqrt(T);
    if (x == 0.0 || sd < 1e-300 || !std::isfinite(sd)) return 0.0;
    const double d1 = std::log(x / K) / sd + 0.5 * sd;
    return x * norm_pdf(d1) * std::sqrt(T);
}

}  // namespace gpv
