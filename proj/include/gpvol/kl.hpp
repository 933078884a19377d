#pragma once

#include <cmath>

#include "gpvol/errors.hpp"
#include "gpvol/special.hpp"

namespace gpv {

/// k-th Karhunen-Loeve eigenpair of Brownian motion on [0, T]:
/// lambda_k = (T / (pi (k - 1/2)))^2, e_k(t) = sqrt(2/T) sin(t / sqrt(lambda_k)).
struct KlEigen {
    double T = 1.0;
    int k = 1;
    double lambda = 0.0;
    double omega = 0.0;  // 1 / sqrt(lambda)

    double e(double t) const { return std::sqrt(2.0 / T) * std::sin(omega * t); }
    double edot(double t) const { return std::sqrt(2.0 / T) * omega * std::cos(omega * t); }
};

inline KlEigen kl_eigen(double T, int k) {
    if (!(T > 0.0)) throw ParameterError("kl_eigen: T must be > 0");
    if (k < 1) throw ParameterError("kl_eigen: k must be >= 1");
    KlEigen r;
    r.T = T;
    r.k = k;
    r.omega = kPi * (k - 0.5) / T;
    r.lambda = 1.0 / (r.omega * r.omega);
    return r;
}

}  // namespace gpv
