#pragma once

#include <functional>
#include <vector>

namespace gpv {

struct NelderMeadConfig {
    int max_evals = 2000;
    double target = 0.0;       // stop once f <= target
    double f_tol = 1e-10;      // simplex spread in f
    double x_tol = 1e-8;       // simplex diameter (in scaled units)
    int stall_iters = 60;      // no improvement of best for this many iterations
    double init_step = 0.1;    // fraction of each box width
    int restarts = 3;          // fresh simplex at the best point after stall/convergence
};

struct NelderMeadResult {
    std::vector<double> x;
    double f = 0.0;
    int evals = 0;
    int iterations = 0;
    const char* reason = "";
    std::vector<double> trace;  // best f after each iteration
};

/// Box-constrained Nelder-Mead; trial points are projected onto [lo, hi]. A restart keeps
/// the evaluation budget and is abandoned once it fails to improve the best value.
NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                             std::vector<double> x0, const std::vector<double>& lo,
                             const std::vector<double>& hi, const NelderMeadConfig& cfg = {});

}  // namespace gpv
