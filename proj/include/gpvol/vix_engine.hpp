#pragma once

#include <Eigen/Dense>
#include <array>
#include <vector>

#include "gpvol/curve.hpp"
#include "gpvol/model.hpp"
#include "gpvol/product_quantizer.hpp"
#include "gpvol/scalar_quantizer.hpp"

namespace gpv {

enum class KlHorizon { Maturity, MaturityPlusDelta };

struct VixConfig {
    double T = 1.0;
    double delta = 30.0 / 365.0;
    int n_u = 50;
    /// Even moment order for the matching trick; 0 disables it.
    int moment_q = 4;
    KlHorizon kl_horizon = KlHorizon::MaturityPlusDelta;
    /// Use the scalar (Markovian) branch for the exponential kernel.
    bool markovian_exponential = true;

    void validate() const;
    double basis_horizon() const { return kl_horizon == KlHorizon::Maturity ? T : T + delta; }
};

/// Quantized Z^u_T on the u-grid: row j is trajectory j.
struct ZTrajectories {
    std::vector<double> u, w;  // Gauss-Legendre nodes/weights on [T, T + delta]
    Eigen::MatrixXd z;         // N x n_u
    std::vector<double> p;
};

struct VixQuantization {
    std::vector<double> v;  // VIX^2 points
    std::vector<double> p;
    int clipped = 0;        // negative points set to 0
};

ZTrajectories quantize_Z(const KernelSpec& k, const ProductQuantizer& pq, const VixConfig& cfg);

/// Rescales each u-column so the q-th quantized moment equals the exact one.
void moment_match_Z(ZTrajectories& z, const KernelSpec& k, const VixConfig& cfg, int q = 4);

/// Per-u polynomial coefficients: VIX^2 = (1e4/delta) sum_u w_u xi0/g sum_d c[u][d] z^d.
/// Shared by the quantized engine and the Monte Carlo oracle.
struct VixPolynomial {
    std::vector<double> u, w, scale;  // scale_u = (1e4/delta) w_u xi0(u)/g(u)
    std::vector<std::array<double, 11>> c;
    double value(const double* z, std::ptrdiff_t stride = 1) const;
};
VixPolynomial vix_polynomial(const ModelParams& m, const ForwardVarianceCurve& xi0, const VixConfig& cfg);

VixQuantization vix_points(const ModelParams& m, const ForwardVarianceCurve& xi0, const ZTrajectories& z,
                           const VixConfig& cfg);

/// Exponential kernel only: Z^u_T = e^{-kappa (u-T)} X_T, so a scalar quantizer of X_T suffices.
VixQuantization vix_points_markovian(const ModelParams& m, const ForwardVarianceCurve& xi0, const VixConfig& cfg,
                                     const ScalarQuantizer& sq, int q_match);

/// Full pipeline: decomposition, trajectories, matching, points. N is the trajectory budget.
VixQuantization quantize_vix(const ModelParams& m, const ForwardVarianceCurve& xi0, const VixConfig& cfg, long N);

double price_vix_future(const VixQuantization& vq);
double price_vix_call(const VixQuantization& vq, double K);
double price_vix_put(const VixQuantization& vq, double K);

}  // namespace gpv
