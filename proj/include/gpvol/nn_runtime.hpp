#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "gpvol/curve.hpp"
#include "gpvol/model.hpp"
#include "gpvol/spx_engine.hpp"

namespace gpv {

struct DenseLayer {
    Eigen::MatrixXd W;  // out x in
    Eigen::VectorXd b;
};

/// tanh on hidden layers, identity on the output layer.
struct Mlp {
    std::vector<DenseLayer> layers;
    Eigen::VectorXd forward(const Eigen::VectorXd& x) const;
    Eigen::Index input_dim() const { return layers.empty() ? 0 : layers.front().W.cols(); }
    Eigen::Index output_dim() const { return layers.empty() ? 0 : layers.back().W.rows(); }
};

struct MlpWeights {
    int N = 0;
    int n_T = 0;
    int n_theta = 0;
    std::vector<int> hidden;
    std::vector<std::pair<double, double>> bounds;  // per input, (min, max)
    std::vector<std::string> param_names;           // alpha0 alpha1 alpha3 alpha5 rho H [beta] T
    std::string kernel;
    Mlp nn1, nn2, nn3;
};

/// Parses and validates; throws SchemaError naming the offending field or layer.
MlpWeights load_weights(const std::string& path);
MlpWeights parse_weights(const std::string& json_text);

struct NormalizedInput {
    Eigen::VectorXd x;
    bool clamped = false;
};

/// Affine map of each coordinate from [min, max] to [-1, 1]; out-of-range values are clamped.
NormalizedInput normalize_input(const std::vector<double>& raw, const std::vector<std::pair<double, double>>& bounds);

/// Raw network input in the order given by names.
std::vector<double> network_input(const ModelParams& m, double T, const std::vector<std::string>& names);

Eigen::VectorXd softmax(const Eigen::VectorXd& z);

/// x + NN1, dw + NN2 (both reshaped N x n_T, row per trajectory), p = softmax(p + NN3).
SpxPaths apply_corrections(const SpxPaths& paths, const MlpWeights& w, const ModelParams& m, double T,
                           bool* clamped = nullptr);

SpxQuantization quantize_spx_nn(const ModelParams& m, const ForwardVarianceCurve& xi0, double T,
                                const MlpWeights& w, const SpxPaths& paths, const SpxConfig& cfg);

double price_call_nn(const ModelParams& m, const ForwardVarianceCurve& xi0, double T, double S0, double K,
                     const MlpWeights& w, const SpxPaths& paths, const SpxConfig& cfg);

}  // namespace gpv
