#include "gpvol/implied_vol.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gpvol/black_scholes.hpp"
#include "gpvol/errors.hpp"

namespace gpv {

ImpliedVol implied_vol(double price, double F, double K, double T) {
    if (!(F > 0.0) || !(K > 0.0) || !(T > 0.0)) throw ParameterError("implied_vol: F, K, T must be > 0");
    const double intrinsic = std::max(F - K, 0.0);
    const double tol = 1e-12 * F;
    if (!(price >= intrinsic - tol))
        throw BandError("implied_vol: price " + std::to_string(price) + " below intrinsic value", BandError::Bound::Lower);
    if (!(price <= F + tol))
        throw BandError("implied_vol: price " + std::to_string(price) + " above the forward", BandError::Bound::Upper);

    double lo = kMinVol, hi = kMaxVol;
    const double plo = bs_call(F, lo, T, K), phi = bs_call(F, hi, T, K);
    if (price <= plo) return {lo, true};
    if (price >= phi) return {hi, true};

    // start from the Brenner-Subrahmanyam guess, clipped into the bracket
    double s = std::clamp(std::sqrt(2.0 * 3.141592653589793 / T) * price / F, 0.05, 1.0);
    for (int it = 0; it < 200; ++it) {
        const double diff = bs_call(F, s, T, K) - price;
        if (std::fabs(diff) < 1e-10 * std::max(1.0, price) && std::fabs(diff) < 1e-10) return {s, false};
        if (diff > 0.0) hi = s;
        else lo = s;
        const double vega = bs_vega(F, s, T, K);
        double next = vega > 0.0 ? s - diff / vega : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (hi - lo < 1e-15) return {next, false};
        s = next;
    }
    return {s, false};
}

}  // namespace gpv
