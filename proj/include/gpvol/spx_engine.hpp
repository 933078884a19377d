#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "gpvol/curve.hpp"
#include "gpvol/model.hpp"
#include "gpvol/product_quantizer.hpp"

namespace gpv {

/// Auto: semimartingale for the shifted and exponential kernels, renormalised otherwise.
enum class CorrectionMode { Auto, Semimartingale, Renormalized };

struct SpxConfig {
    long N = 10000;
    int n_t = 50;
    bool trace_match = true;
    bool second_moment_match = true;
    CorrectionMode mode = CorrectionMode::Auto;

    void validate() const;
};

/// Quantized X and Brownian-derivative paths on a Gauss-Legendre t-grid.
struct SpxPaths {
    double T = 0.0;
    std::vector<double> t, w;
    Eigen::MatrixXd x;   // N x n_t
    Eigen::MatrixXd dw;  // N x n_t, sum_k sqrt(lambda_k + eps) edot_k(t) y^k
    std::vector<double> p;
    double eps_lambda = 0.0;
    bool eps_clamped = false;
};

struct SpxQuantization {
    std::vector<double> u, v, p;
    double b = 1.0;           // second-moment scale applied to v
    double C = 0.0;           // correction constant actually used
    double eps_lambda = 0.0;
    CorrectionMode mode = CorrectionMode::Renormalized;
    bool eps_clamped = false;
    bool correction_skipped = false;
};

struct TraceMatch {
    double eps = 0.0;
    bool clamped = false;  // quantizer already exceeded the target; 0 returned
    double target = 0.0;
    double achieved = 0.0;
};

/// Solves E int_0^T Xhat^2 dt = int_0^T int_0^s K^2 du ds for eps_lambda. The left side is
/// affine in eps, so the root is explicit. Integrals in t use the supplied grid.
TraceMatch trace_match_epsilon(const KernelSpec& k, const ProductQuantizer& pq, const std::vector<double>& t,
                               const std::vector<double>& w);

SpxPaths quantize_X(const KernelSpec& k, const ProductQuantizer& pq, int n_t);

/// sigma_j(t_p) = sqrt(xi0) p(x) / sqrt(g)
Eigen::MatrixXd sigma_paths(const ModelParams& m, const ForwardVarianceCurve& xi0, const SpxPaths& paths);

std::vector<double> quantize_U(const Eigen::MatrixXd& sigma, const std::vector<double>& w);

/// Corrected stochastic integral, first with the K(0) or renormalised correction, then scaled by sqrt(b).
struct VResult {
    std::vector<double> v;
    double b = 1.0;
    double C = 0.0;
    CorrectionMode mode = CorrectionMode::Renormalized;
    bool correction_skipped = false;
};
VResult quantize_V(const Eigen::MatrixXd& sigma, const SpxPaths& paths, const ModelParams& m,
                   const ForwardVarianceCurve& xi0, CorrectionMode mode, bool second_moment_match);

/// U, V and probabilities from (possibly externally corrected) paths.
SpxQuantization spx_from_paths(const ModelParams& m, const ForwardVarianceCurve& xi0, const SpxPaths& paths,
                               const SpxConfig& cfg);

/// Quantizer construction, trace matching, paths and (U, V) in one call.
SpxPaths build_spx_paths(const KernelSpec& k, double T, const SpxConfig& cfg);
SpxQuantization quantize_spx(const ModelParams& m, const ForwardVarianceCurve& xi0, double T, const SpxConfig& cfg);

double price_call_quantized(const SpxQuantization& sq, double rho, double S0, double T, double K);
double price_put_quantized(const SpxQuantization& sq, double rho, double S0, double T, double K);
/// sum_j p_j S0 exp(-rho^2 u_j / 2 + rho v_j)
double forward_quantized(const SpxQuantization& sq, double rho, double S0);

struct GaussianMixture {
    std::vector<double> mean, var, weight;  // of log(S_T / S0)
    double density(double x) const;
};
GaussianMixture mixture_density(const SpxQuantization& sq, double rho);

}  // namespace gpv
