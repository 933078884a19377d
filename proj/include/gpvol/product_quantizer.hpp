#pragma once

#include <cstddef>
#include <memory>
#include <vector>

#include "gpvol/kl.hpp"
#include "gpvol/scalar_quantizer.hpp"

namespace gpv {

struct Decomposition {
    std::vector<int> sizes;  // N_1 >= ... >= N_m
    double distortion = 0.0;
};

/// Distortion sum_k lambda_k D(N_k) + sum_{k>m} lambda_k of a decomposition on [0, T].
double decomposition_distortion(const std::vector<int>& sizes, double T);

/// Best non-increasing factorisation with product <= N_budget. Ties go to
/// smaller m, then the lexicographically largest tuple.
Decomposition optimal_decomposition(long N_budget, double T);

/// Product functional quantizer of Brownian motion on [0, T].
class ProductQuantizer {
public:
    ProductQuantizer(double T, std::vector<int> sizes, double eps_lambda = 0.0);

    double horizon() const { return T_; }
    int levels() const { return static_cast<int>(sizes_.size()); }
    const std::vector<int>& sizes() const { return sizes_; }
    std::size_t count() const { return count_; }
    double eps_lambda() const { return eps_lambda_; }
    void set_eps_lambda(double e);

    const KlEigen& eigen(int level) const { return eig_[level]; }
    const ScalarQuantizer& scalar(int level) const { return *scalars_[level]; }

    /// Row-major: the last level varies fastest.
    std::vector<int> tuple(std::size_t flat) const;
    std::size_t flat(const std::vector<int>& tuple) const;

    double probability(std::size_t flat) const;
    std::vector<double> probabilities() const;
    /// Per-trajectory coefficient of level k: y^k_{j_k}, and its scale sqrt(lambda_k + eps).
    double point(std::size_t flat, int level) const;
    double scale(int level) const;

    double path(std::size_t flat, double t) const;
    double path_derivative(std::size_t flat, double t) const;

    /// sum_k lambda_k D(N_k) + tail, independent of eps_lambda.
    double distortion() const;

private:
    double T_;
    std::vector<int> sizes_;
    double eps_lambda_;
    std::size_t count_ = 1;
    std::vector<std::size_t> strides_;
    std::vector<KlEigen> eig_;
    std::vector<std::shared_ptr<const ScalarQuantizer>> scalars_;
};

ProductQuantizer build_product_quantizer(long N_budget, double T);

}  // namespace gpv
