#include <catch_amalgamated.hpp>
#include <cmath>
#include <random>

#include "gpvol/convolution.hpp"
#include "gpvol/kernel.hpp"
#include "gpvol/kl.hpp"
#include "oracles.hpp"

using namespace gpv;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// int_{lo}^{hi} K(r) f(r) dr, with the power part of K removed by substitution from 0.
double kernel_weighted(const KernelSpec& k, const std::function<double(double)>& f, double lo, double hi) {
    const double a = (k.type == KernelType::Fractional || k.type == KernelType::LogModulated) ? k.H - 0.5 : 0.0;
    auto g = [&](double r) { return eval_kernel(k, r) * std::pow(r, -a) * f(r); };
    if (a == 0.0) return oracle::composite([&](double r) { return eval_kernel(k, r) * f(r); }, lo, hi, 128);
    return oracle::power_weighted(g, a, hi, 256) - oracle::power_weighted(g, a, lo, 256);
}

double oracle_spx(const KernelSpec& k, double t, int idx, double T) {
    const auto e = kl_eigen(T, idx);
    return kernel_weighted(k, [&](double r) { return e.edot(t - r); }, 0.0, t);
}

double oracle_vix(const KernelSpec& k, double u, int idx, double T, double basis_T) {
    const auto e = kl_eigen(basis_T, idx);
    return kernel_weighted(k, [&](double r) { return e.edot(u - r); }, u - T, u);
}

}  // namespace

TEST_CASE("constant kernel reduces to e_k") {
    for (int idx : {1, 2, 5}) {
        const auto e = kl_eigen(1.0, idx);
        CHECK_THAT(conv_edot_spx(KernelSpec::exponential(0.5, 0.1), 0.37, idx, 1.0).value, WithinAbs(e.e(0.37), 1e-12));
        CHECK_THAT(conv_edot_spx(KernelSpec::fractional(0.5), 0.81, idx, 1.0).value, WithinAbs(e.e(0.81), 1e-12));
    }
    CHECK_THAT(conv_edot_spx(KernelSpec::fractional(0.2), 1e-12, 1, 1.0).value, WithinAbs(0.0, 1e-5));
}

TEST_CASE("SPX convolution closed forms against quadrature") {
    CHECK_THAT(conv_edot_spx(KernelSpec::fractional(0.3), 0.5, 1, 1.0).value,
               WithinAbs(oracle_spx(KernelSpec::fractional(0.3), 0.5, 1, 1.0), 1e-6));
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int i = 0; i < 30; ++i) {
        const double T = 0.1 + 1.9 * U(rng);
        const double t = T * (0.02 + 0.98 * U(rng));
        const int idx = 1 + static_cast<int>(8 * U(rng));
        const KernelSpec ks[] = {KernelSpec::fractional(0.01 + 0.49 * U(rng)),
                                 KernelSpec::shifted_fractional(-1.0 + 1.5 * U(rng), 0.005 + 0.1 * U(rng)),
                                 KernelSpec::exponential(-1.0 + 1.5 * U(rng), 0.005 + 0.1 * U(rng))};
        for (const auto& k : ks) {
            const auto r = conv_edot_spx(k, t, idx, T);
            const double ref = oracle_spx(k, t, idx, T);
            INFO(k.name() << " H=" << k.H << " eps=" << k.eps << " t=" << t << " T=" << T << " k=" << idx);
            CHECK_THAT(r.value, WithinAbs(ref, 1e-6 * std::max(1.0, std::abs(ref))));
        }
    }
}

TEST_CASE("VIX convolution closed forms against quadrature") {
    const double T = 0.5, delta = 30.0 / 365;
    const auto f = KernelSpec::fractional(0.05);
    CHECK_THAT(conv_edot_vix(f, T + delta / 2, 1, T, T + delta).value,
               WithinAbs(oracle_vix(f, T + delta / 2, 1, T, T + delta), 1e-6));
    const auto e = KernelSpec::exponential(-0.2, 1.0 / 52);
    for (int idx : {1, 3}) {
        const double u = T + 0.3 * delta;
        CHECK_THAT(conv_edot_vix(e, u, idx, T, T + delta).value, WithinAbs(oracle_vix(e, u, idx, T, T + delta), 1e-10));
    }
    // u = T coincides with the SPX integral at t = T
    CHECK_THAT(conv_edot_vix(f, T, 2, T, T).value, WithinAbs(conv_edot_spx(f, T, 2, T).value, 1e-6));
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int i = 0; i < 20; ++i) {
        const double TT = 0.05 + U(rng), u = TT + delta * U(rng);
        const int idx = 1 + static_cast<int>(6 * U(rng));
        for (double basis : {TT, TT + delta}) {
            for (const auto& k : {KernelSpec::fractional(0.02 + 0.45 * U(rng)),
                                  KernelSpec::shifted_fractional(-0.8 + 1.2 * U(rng), 0.01 + 0.05 * U(rng))}) {
                const double ref = oracle_vix(k, u, idx, TT, basis);
                INFO(k.name() << " H=" << k.H << " u=" << u << " T=" << TT << " basis=" << basis << " k=" << idx);
                CHECK_THAT(conv_edot_vix(k, u, idx, TT, basis).value,
                           WithinAbs(ref, 1e-6 * std::max(1.0, std::abs(ref))));
            }
        }
    }
}

TEST_CASE("log-modulated convolution") {
    const auto k = KernelSpec::log_modulated(0.1, 0.4, 2.0);
    CHECK_THAT(conv_edot_spx(k, 0.6, 2, 1.0).value, WithinAbs(oracle_spx(k, 0.6, 2, 1.0), 1e-6));
    CHECK_THAT(conv_edot_vix(k, 1.05, 1, 1.0, 1.0 + 30.0 / 365).value,
               WithinAbs(oracle_vix(k, 1.05, 1, 1.0, 1.0 + 30.0 / 365), 1e-6));
}
