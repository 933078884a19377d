#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace gpv {

/// Invalid model or kernel parameters (domain violations, bad shapes of inputs).
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A numerical procedure failed (non-convergence, non-PSD matrix, quadrature failure).
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Iterative solver gave up; carries the best iterate it found.
class ConvergenceError : public NumericError {
public:
    ConvergenceError(const std::string& what, std::vector<double> best)
        : NumericError(what), best_iterate(std::move(best)) {}
    std::vector<double> best_iterate;
};

/// Input that makes a computation meaningless (e.g. all-zero trajectories).
class DegenerateInputError : public NumericError {
public:
    using NumericError::NumericError;
};

/// Option price outside the no-arbitrage band of implied-vol inversion.
class BandError : public NumericError {
public:
    enum class Bound { Lower, Upper };
    BandError(const std::string& what, Bound b) : NumericError(what), bound(b) {}
    Bound bound;
};

/// Malformed file or document (weights JSON, market CSV, config).
class SchemaError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace gpv
