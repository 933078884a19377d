#pragma once

#include <functional>
#include <vector>

namespace gpv {

/// Nodes and weights of a quadrature rule on a fixed interval.
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;

    std::size_t size() const { return nodes.size(); }

    template <class F>
    double apply(F&& f) const {
        double s = 0.0;
        for (std::size_t i = 0; i < nodes.size(); ++i) s += weights[i] * f(nodes[i]);
        return s;
    }
};

/// n-point Gauss-Legendre rule mapped to [a, b]. Nodes increase.
QuadratureRule gauss_legendre(int n, double a, double b);

using Integrand = std::function<double(double)>;

/// Integral of f over [0, length] where f may carry an integrable singularity at
/// 0 (or near it, on the negative side). The integrand receives the distance from
/// 0, so callers must place the singular point there. Double-exponential rule.
double integrate_from_singular(const Integrand& f, double length, double rel_tol = 1e-10);

/// Adaptive Gauss-Kronrod for smooth integrands on [a, b].
double integrate_smooth(const Integrand& f, double a, double b, double rel_tol = 1e-10);

}  // namespace gpv
