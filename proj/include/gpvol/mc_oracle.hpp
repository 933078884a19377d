#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "gpvol/curve.hpp"
#include "gpvol/model.hpp"
#include "gpvol/vix_engine.hpp"

namespace gpv {

struct McConfig {
    long n_paths = 100000;
    int n_steps = 100;
    std::uint64_t seed = 42;
    bool antithetic = true;
    bool control_variate = true;
    long batch_size = 10000;

    void validate() const;
};

struct McEstimate {
    double mean = 0.0;
    double se = 0.0;
    double sample_var = 0.0;  // per independent sample
};

/// Covariance of (X_{t_1}, ..., X_{t_n}).
Eigen::MatrixXd gram_matrix(const KernelSpec& k, const std::vector<double>& grid);

/// Lower Cholesky factor; adds diagonal jitter from 1e-12 up to 1e-8 of the mean
/// diagonal when the plain factorisation fails.
Eigen::MatrixXd cholesky_with_jitter(const Eigen::MatrixXd& m);

struct McSpxResult {
    std::vector<double> strikes;
    std::vector<McEstimate> calls;
    McEstimate forward;        // E[S_T], no control variate
    McEstimate integrated_var; // E int_0^T sigma^2 dt
    McEstimate covariation;    // E sum (sigma_i - sigma_{i-1})(W_i - W_{i-1})
    long rejected = 0;         // paths with non-finite sigma
};

/// Euler scheme in log-spot on an exact joint draw of (X, W) over a uniform grid; the
/// independent Brownian factor is integrated out analytically (conditional Black-Scholes).
McSpxResult simulate_spx(const ModelParams& m, const ForwardVarianceCurve& xi0, double T, double S0,
                         const std::vector<double>& strikes, const McConfig& cfg);

struct McVixResult {
    std::vector<double> strikes;
    McEstimate future;
    std::vector<McEstimate> calls;
    McEstimate vix2;
};

/// Exact Gaussian draw of Z^u_T on the u-grid followed by the closed-form VIX^2.
McVixResult simulate_vix(const ModelParams& m, const ForwardVarianceCurve& xi0, const VixConfig& vcfg,
                         const std::vector<double>& strikes, const McConfig& cfg);

/// Naive nested estimator of the VIX future: VIX^2 from n_inner simulated continuations
/// of X on [T, T + delta] per outer path. Reference for the variance comparison.
McEstimate simulate_vix_nested(const ModelParams& m, const ForwardVarianceCurve& xi0, const VixConfig& vcfg,
                               int n_inner, const McConfig& cfg);

/// Rows "alpha0,alpha1,alpha3,alpha5,rho,H,T,K,price,se".
void write_mc_csv(std::ostream& os, const ModelParams& m, double T, const McSpxResult& r, bool header = true);

}  // namespace gpv
