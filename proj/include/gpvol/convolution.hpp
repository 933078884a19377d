#pragma once

#include "gpvol/kernel.hpp"

namespace gpv {

struct ConvResult {
    double value = 0.0;
    /// Set when a closed-form series failed and quadrature was used instead.
    bool fallback = false;
};

/// int_0^t K(t - s) edot_k(s) ds with the KL basis on [0, T].
ConvResult conv_edot_spx(const KernelSpec& k, double t, int kl_index, double T);

/// int_0^T K(u - s) edot_k(s) ds for u >= T, with the KL basis on [0, basis_T].
/// basis_T defaults to T when <= 0.
ConvResult conv_edot_vix(const KernelSpec& k, double u, int kl_index, double T, double basis_T = 0.0);

/// Direct quadrature evaluations of the same integrals, used as fallback and oracle.
double conv_edot_spx_quadrature(const KernelSpec& k, double t, int kl_index, double T);
double conv_edot_vix_quadrature(const KernelSpec& k, double u, int kl_index, double T, double basis_T = 0.0);

}  // namespace gpv
