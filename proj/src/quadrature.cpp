#include "gpvol/quadrature.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <map>
#include <mutex>

#include "gpvol/errors.hpp"
#include "gpvol/special.hpp"

namespace gpv {

namespace {

// Reference rule on [-1, 1] by Newton iteration on the Legendre recurrence.
QuadratureRule legendre_reference(int n) {
    QuadratureRule r;
    r.nodes.resize(n);
    r.weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) { p1 = x; p0 = 1.0; }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::fabs(dx) < 1e-16) break;
        }
        // recompute derivative at the converged node
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
            const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = (n == 1) ? 1.0 : n * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        r.nodes[i] = -x;
        r.nodes[n - 1 - i] = x;
        r.weights[i] = w;
        r.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) r.nodes[n / 2] = 0.0;
    return r;
}

}  // namespace

QuadratureRule gauss_legendre(int n, double a, double b) {
    if (n < 1) throw ParameterError("gauss_legendre: n must be >= 1");
    static std::mutex mu;
    static std::map<int, QuadratureRule> cache;
    QuadratureRule ref;
    {
        std::lock_guard<std::mutex> lock(mu);
        auto it = cache.find(n);
        if (it == cache.end()) it = cache.emplace(n, legendre_reference(n)).first;
        ref = it->second;
    }
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    for (int i = 0; i < n; ++i) {
        ref.nodes[i] = mid + half * ref.nodes[i];
        ref.weights[i] *= half;
    }
    return ref;
}

double integrate_from_singular(const Integrand& f, double length, double rel_tol) {
    if (length <= 0.0) return 0.0;
    static thread_local boost::math::quadrature::tanh_sinh<double> ts(12);
    double err = 0.0, l1 = 0.0;
    const double v = ts.integrate(f, 0.0, length, rel_tol, &err, &l1);
    if (!std::isfinite(v)) throw NumericError("integrate_from_singular: non-finite result");
    return v;
}

double integrate_smooth(const Integrand& f, double a, double b, double rel_tol) {
    if (a == b) return 0.0;
    double err = 0.0;
    const double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 15, rel_tol, &err);
    if (!std::isfinite(v)) throw NumericError("integrate_smooth: non-finite result");
    return v;
}

}  // namespace gpv
