#pragma once

// Reference computations kept independent of the library code paths.

#include <algorithm>
#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <utility>
#include <vector>

namespace oracle {

inline constexpr double kPi = 3.14159265358979323846;

// Gauss-Legendre on [-1, 1] by Newton iteration on P_n.
inline std::pair<std::vector<double>, std::vector<double>> legendre(int n) {
    std::vector<double> x(n), w(n);
    for (int i = 0; i < n; ++i) {
        double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = z;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) p0 = 1.0;
            dp = n * (z * p1 - p0) / (z * z - 1.0);
            const double dz = p1 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        x[i] = -z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    return {x, w};
}

inline double composite(const std::function<double(double)>& f, double a, double b, int panels = 64, int order = 20) {
    static thread_local std::vector<std::pair<int, std::pair<std::vector<double>, std::vector<double>>>> cache;
    const std::pair<std::vector<double>, std::vector<double>>* rule = nullptr;
    for (const auto& c : cache)
        if (c.first == order) rule = &c.second;
    if (!rule) {
        cache.emplace_back(order, legendre(order));
        rule = &cache.back().second;
    }
    const double h = (b - a) / panels;
    double s = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double lo = a + p * h;
        for (int i = 0; i < order; ++i) s += rule->second[i] * f(lo + 0.5 * h * (rule->first[i] + 1.0));
    }
    return 0.5 * h * s;
}

// int_0^x r^a f(r) dr for a > -1, with r = x v^{1/(a+1)} removing the singularity.
inline double power_weighted(const std::function<double(double)>& f, double a, double x, int panels = 64) {
    if (x <= 0.0) return 0.0;
    const double e = 1.0 / (a + 1.0);
    return std::pow(x, a + 1.0) / (a + 1.0) * composite([&](double v) { return f(x * std::pow(v, e)); }, 0.0, 1.0, panels);
}

// Gauss-Hermite for the standard normal (probabilists') by Golub-Welsch.
inline std::pair<std::vector<double>, std::vector<double>> gauss_hermite(int n) {
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i + 1 < n; ++i) J(i, i + 1) = J(i + 1, i) = std::sqrt(i + 1.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    std::vector<double> x(n), w(n);
    for (int i = 0; i < n; ++i) {
        x[i] = es.eigenvalues()[i];
        const double v = es.eigenvectors()(0, i);
        w[i] = v * v;
    }
    return {x, w};
}

// Exponential kernel eps^{H-1/2} e^{-kappa t}: VIX future E[sqrt(VIX^2)] from X_T ~ N(0, v_T),
// with X_u = e^{-kappa(u-T)} X_T + G, G independent. Polynomial p has dense coefficients a (degree 5).
// The inner E[p(z + G)^2] uses Gauss-Hermite (exact for degree 10), the u-integral composite
// Gauss-Legendre, the outer expectation Gauss-Hermite with n_outer nodes.
inline double exp_kernel_vix_future(double H, double eps, const std::function<double(double)>& xi0,
                                    const std::vector<double>& a, double T, double delta, int n_outer = 400,
                                    std::function<double(double)> payoff = nullptr) {
    const double kap = (0.5 - H) / eps;
    const double c2 = std::pow(eps, 2.0 * H - 1.0);
    auto var = [&](double x) { return c2 * (1.0 - std::exp(-2.0 * kap * x)) / (2.0 * kap); };
    auto p = [&](double x) {
        double r = 0.0;
        for (int i = static_cast<int>(a.size()) - 1; i >= 0; --i) r = r * x + a[i];
        return r;
    };
    const auto gh6 = gauss_hermite(8);
    auto ep2 = [&](double z, double v) {
        double s = 0.0;
        for (std::size_t i = 0; i < gh6.first.size(); ++i) {
            const double y = p(z + std::sqrt(v) * gh6.first[i]);
            s += gh6.second[i] * y * y;
        }
        return s;
    };
    auto vix2 = [&](double xT) {
        return 1e4 / delta * composite(
                                 [&](double u) {
                                     const double g = ep2(0.0, var(u));
                                     return xi0(u) / g * ep2(std::exp(-kap * (u - T)) * xT, var(u - T));
                                 },
                                 T, T + delta, 8, 20);
    };
    const auto gh = gauss_hermite(n_outer);
    const double sT = std::sqrt(var(T));
    double s = 0.0;
    for (std::size_t i = 0; i < gh.first.size(); ++i) {
        const double v = std::sqrt(std::max(vix2(sT * gh.first[i]), 0.0));
        s += gh.second[i] * (payoff ? payoff(v) : v);
    }
    return s;
}

// Sum of Gauss-Legendre panels between consecutive sorted breakpoints.
inline double breakpoint_integral(const std::function<double(double)>& f, std::vector<double> bp, int order = 20) {
    std::sort(bp.begin(), bp.end());
    bp.erase(std::unique(bp.begin(), bp.end()), bp.end());
    const auto [x, w] = legendre(order);
    double s = 0.0;
    for (std::size_t k = 0; k + 1 < bp.size(); ++k) {
        const double a = bp[k], b = bp[k + 1], h = 0.5 * (b - a), m = 0.5 * (a + b);
        for (int i = 0; i < order; ++i) s += h * w[i] * f(m + h * x[i]);
    }
    return s;
}

// Breakpoints at mean + c sd for a Gaussian mixture, clipped to [lo, inf).
inline std::vector<double> mixture_breakpoints(const std::vector<double>& mean, const std::vector<double>& var,
                                               double lo = -INFINITY) {
    std::vector<double> bp;
    for (std::size_t j = 0; j < mean.size(); ++j)
        for (double c : {-9.0, -5.0, -2.5, -1.0, 0.0, 1.0, 2.5, 5.0, 9.0}) bp.push_back(std::max(mean[j] + c * std::sqrt(var[j]), lo));
    if (std::isfinite(lo)) bp.push_back(lo);
    return bp;
}

struct Stats {
    long n = 0;
    double mean = 0.0, m2 = 0.0;
    void add(double x) {
        ++n;
        const double d = x - mean;
        mean += d / n;
        m2 += d * (x - mean);
    }
    double var() const { return n > 1 ? m2 / (n - 1) : 0.0; }
    double se() const { return std::sqrt(var() / n); }
};

}  // namespace oracle
