#pragma once

namespace gpv {

/// Zero-rate Black-Scholes call on an underlying worth x today.
double bs_call(double x, double sigma, double T, double K);
double bs_put(double x, double sigma, double T, double K);
/// dC/dsigma
double bs_vega(double x, double sigma, double T, double K);

}  // namespace gpv
