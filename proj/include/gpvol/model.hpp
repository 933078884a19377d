#pragma once

#include "gpvol/errors.hpp"
#include "gpvol/kernel.hpp"
#include "gpvol/moments.hpp"

namespace gpv {

/// Kernel, polynomial and spot-vol correlation; the forward variance curve travels separately.
struct ModelParams {
    KernelSpec kernel;
    PolyCoeffs poly;
    double rho = 0.0;

    void validate() const {
        kernel.validate();
        if (!(rho >= -1.0 && rho <= 1.0)) throw ParameterError("rho must lie in [-1, 1]");
    }
};

}  // namespace gpv
