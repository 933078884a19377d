#pragma once

#include <memory>
#include <string>
#include <vector>

namespace gpv {

/// L2-optimal N-point quantizer of the standard Gaussian.
struct ScalarQuantizer {
    int N = 0;
    std::vector<double> points;  // increasing
    std::vector<double> probs;
    double distortion = 1.0;     // E[(Y - Yhat)^2]

    /// max_i |y_i - E[Y | Y in cell_i]|
    double stationarity_residual() const;
};

inline constexpr int kMaxScalarQuantizer = 6000;

/// Cached; computed on first request by Newton iteration on the stationarity
/// equations with a Lloyd fallback. Throws ParameterError for N outside [1, 6000].
std::shared_ptr<const ScalarQuantizer> optimal_scalar_quantizer(int N);

/// Distortion of the optimal N-point quantizer (uses the same cache).
double scalar_distortion(int N);

/// On-disk cache directory. Initialised from GPVOL_CACHE_DIR; empty disables.
void set_quantizer_cache_dir(const std::string& dir);
std::string quantizer_cache_dir();

/// Computes without touching the cache; no upper bound on N.
ScalarQuantizer compute_scalar_quantizer(int N);

}  // namespace gpv
