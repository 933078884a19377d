#include <catch_amalgamated.hpp>
#include <cmath>

#include "gpvol/black_scholes.hpp"
#include "gpvol/errors.hpp"
#include "gpvol/quadrature.hpp"
#include "gpvol/spx_engine.hpp"
#include "oracles.hpp"

using namespace gpv;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

double ref_bs(double S, double sig, double T, double K) {
    const double sd = sig * std::sqrt(T);
    const double d1 = std::log(S / K) / sd + 0.5 * sd, d2 = d1 - sd;
    auto N = [](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); };
    return S * N(d1) - K * N(d2);
}

}  // namespace

TEST_CASE("Black-Scholes") {
    CHECK_THAT(bs_call(100, 0.2, 1.0, 100), WithinAbs(7.9656, 1e-3));
    CHECK_THAT(bs_call(100, 0.2, 1.0, 100), WithinRel(ref_bs(100, 0.2, 1.0, 100), 1e-13));
    CHECK_THAT(bs_call(100, 1e-12, 1.0, 90), WithinAbs(10.0, 1e-12));
    CHECK_THAT(bs_call(100, 0.0, 1.0, 110), WithinAbs(0.0, 1e-12));
    CHECK_THAT(bs_call(100, 300.0, 1.0, 110), WithinAbs(100.0, 1e-9));
    double prev = 0.0;
    for (double s = 0.05; s < 2.0; s += 0.05) {
        const double c = bs_call(100, s, 0.5, 120);
        CHECK(c > prev);
        CHECK(bs_vega(100, s, 0.5, 120) > 0.0);
        prev = c;
    }
    CHECK_THAT(bs_call(100, 0.3, 0.7, 95) - bs_put(100, 0.3, 0.7, 95), WithinAbs(5.0, 1e-12));
}

TEST_CASE("deterministic volatility gives Black-Scholes prices") {
    const ModelParams m{KernelSpec::fractional(0.3), PolyCoeffs({1.0, 0, 0, 0}), 0.0};
    SpxConfig c;
    c.N = 200;
    const auto q = quantize_spx(m, ForwardVarianceCurve::flat(0.04), 1.0, c);
    for (double u : q.u) CHECK_THAT(u, WithinAbs(0.04, 1e-12));
    CHECK(q.correction_skipped);
    for (double K : {80.0, 100.0, 125.0})
        CHECK_THAT(price_call_quantized(q, 0.0, 100, 1.0, K), WithinAbs(ref_bs(100, 0.2, 1.0, K), 1e-10));
}

TEST_CASE("quantized X for Brownian kernel is the quantized Brownian path") {
    const ProductQuantizer pq(1.0, {10, 3, 2});
    const auto paths = quantize_X(KernelSpec::fractional(0.5), pq, 30);
    for (std::size_t j = 0; j < pq.count(); j += 7)
        for (int i = 0; i < 30; ++i) {
            CHECK_THAT(paths.x(j, i), WithinAbs(pq.path(j, paths.t[i]), 1e-10));
            CHECK_THAT(paths.dw(j, i), WithinAbs(pq.path_derivative(j, paths.t[i]), 1e-10));
        }
    for (int i = 0; i < 30; ++i) {
        double m = 0.0;
        for (std::size_t j = 0; j < pq.count(); ++j) m += paths.p[j] * paths.x(j, i);
        CHECK_THAT(m, WithinAbs(0.0, 1e-10));
    }
}

TEST_CASE("trace matching") {
    const auto k = KernelSpec::fractional(0.5);
    ProductQuantizer pq(1.0, {10, 3, 2});
    const auto rule = gauss_legendre(50, 0.0, 1.0);
    const auto a = trace_match_epsilon(k, pq, rule.nodes, rule.weights);
    const auto b = trace_match_epsilon(k, pq, rule.nodes, rule.weights);
    CHECK(a.eps == b.eps);
    CHECK(a.eps > 0.0);
    CHECK_FALSE(a.clamped);
    pq.set_eps_lambda(a.eps);
    const auto paths = quantize_X(k, pq, 50);
    double lhs = 0.0, rhs = 0.0;
    for (int i = 0; i < 50; ++i) {
        for (std::size_t j = 0; j < pq.count(); ++j) lhs += paths.w[i] * paths.p[j] * paths.x(j, i) * paths.x(j, i);
        rhs += paths.w[i] * paths.t[i];  // int_0^t K^2 = t
    }
    CHECK_THAT(lhs, WithinRel(rhs, 1e-8));
    // finer quantizers need a smaller correction
    ProductQuantizer fine(1.0, optimal_decomposition(10000, 1.0).sizes);
    CHECK(trace_match_epsilon(k, fine, rule.nodes, rule.weights).eps < a.eps);
}

TEST_CASE("U quadrature") {
    const ModelParams m{KernelSpec::fractional(0.3), PolyCoeffs({0.4, 0, 0, 0}), -0.5};
    const auto xi0 = ForwardVarianceCurve::exp_blend(0.01, 0.05, 3.0);
    SpxConfig c;
    c.N = 100;
    c.n_t = 50;
    const auto q50 = quantize_spx(m, xi0, 1.0, c);
    c.n_t = 200;
    const auto q200 = quantize_spx(m, xi0, 1.0, c);
    for (std::size_t j = 0; j < q50.u.size(); ++j) {
        CHECK(std::abs(q50.u[j] - q200.u[j]) < 1e-6);
        CHECK_THAT(q50.u[j], WithinRel(xi0.integral(0.0, 1.0), 1e-10));
    }
}

TEST_CASE("renormalised V and second-moment scaling") {
    const ModelParams m{KernelSpec::fractional(0.1), PolyCoeffs({0.01, 1, 0.214, 0.227}), -0.7};
    const auto xi0 = ForwardVarianceCurve::flat(0.03);
    SpxConfig c;
    c.N = 1000;
    const auto q = quantize_spx(m, xi0, 0.5, c);
    CHECK(q.mode == CorrectionMode::Renormalized);
    double m1 = 0.0, m2 = 0.0;
    for (std::size_t j = 0; j < q.v.size(); ++j) {
        m1 += q.p[j] * q.v[j];
        m2 += q.p[j] * q.v[j] * q.v[j];
    }
    CHECK_THAT(m1, WithinAbs(0.0, 1e-10));
    CHECK_THAT(m2, WithinRel(0.015, 1e-10));
    for (double u : q.u) CHECK(u >= 0.0);
    CHECK_THROWS_AS(([&] {
                        SpxConfig s = c;
                        s.mode = CorrectionMode::Semimartingale;
                        return quantize_spx(m, xi0, 0.5, s);
                    }()),
                    ParameterError);
    const ModelParams e{KernelSpec::exponential(-0.1, 0.1), m.poly, -0.7};
    const auto qe = quantize_spx(e, xi0, 0.5, c);
    CHECK(qe.mode == CorrectionMode::Semimartingale);
    CHECK_THAT(qe.C, WithinRel(std::pow(0.1, -0.6), 1e-14));
}

TEST_CASE("sigma paths") {
    const ModelParams m{KernelSpec::fractional(0.3), PolyCoeffs({0.01, 1, 0.214, 0.227}), -0.7};
    const auto xi0 = ForwardVarianceCurve::exp_blend(0.01, 0.04, 2.0);
    SpxConfig c;
    c.N = 60;
    const auto paths = build_spx_paths(m.kernel, 1.0, c);
    const auto sig = sigma_paths(m, xi0, paths);
    for (int i = 0; i < c.n_t; i += 7) {
        const double t = paths.t[i], var = std::pow(t, 0.6) / 0.6;
        // g = E p(X)^2 for X ~ N(0, var), odd terms vanish
        const double g = 0.0001 + var + 2 * 0.214 * 3 * var * var +
                         (0.214 * 0.214 + 2 * 0.227) * 15 * var * var * var + 2 * 0.214 * 0.227 * 105 * std::pow(var, 4) +
                         0.227 * 0.227 * 945 * std::pow(var, 5);
        for (Eigen::Index j = 0; j < sig.rows(); j += 5) {
            const double x = paths.x(j, i);
            const double p = 0.01 + x + 0.214 * x * x * x + 0.227 * std::pow(x, 5);
            CHECK_THAT(sig(j, i), WithinRel(std::sqrt(xi0(t) / g) * p, 1e-10));
        }
    }
    const ModelParams flat{m.kernel, PolyCoeffs({0.3, 0, 0, 0}), -0.7};
    const auto s0 = sigma_paths(flat, xi0, paths);
    for (int i = 0; i < c.n_t; i += 9) CHECK_THAT(s0(3, i), WithinRel(std::sqrt(xi0(paths.t[i])), 1e-14));
}

TEST_CASE("SPX price properties and mixture density") {
    const ModelParams m{KernelSpec::fractional(0.3), PolyCoeffs({0.01, 1, 0.214, 0.227}), -0.7};
    SpxConfig c;
    c.N = 1000;
    const double T = 0.5, S0 = 100;
    const auto q = quantize_spx(m, ForwardVarianceCurve::flat(0.04), T, c);
    CHECK_THAT(price_call_quantized(q, m.rho, S0, T, 1e-8), WithinRel(S0, 5e-3));
    CHECK_THAT(price_call_quantized(q, m.rho, S0, T, 1e-8), WithinRel(forward_quantized(q, m.rho, S0), 1e-9));
    double prev = INFINITY, prev_slope = -INFINITY;
    for (double K = 60; K <= 140; K += 5) {
        const double call = price_call_quantized(q, m.rho, S0, T, K);
        CHECK_THAT(call - price_put_quantized(q, m.rho, S0, T, K),
                   WithinAbs(forward_quantized(q, m.rho, S0) - K, 1e-12));
        CHECK(call <= prev);
        CHECK(call >= std::max(forward_quantized(q, m.rho, S0) - K, 0.0) - 1e-12);
        if (prev < INFINITY) {
            CHECK((call - prev) / 5.0 >= prev_slope - 1e-12);
            prev_slope = (call - prev) / 5.0;
        }
        prev = call;
    }

    const auto mix = mixture_density(q, m.rho);
    const double mass =
        oracle::breakpoint_integral([&](double x) { return mix.density(x); }, oracle::mixture_breakpoints(mix.mean, mix.var));
    CHECK_THAT(mass, WithinAbs(1.0, 1e-6));
    const double K = 105;
    const double viaDensity = oracle::breakpoint_integral(
        [&](double x) { return std::max(S0 * std::exp(x) - K, 0.0) * mix.density(x); },
        oracle::mixture_breakpoints(mix.mean, mix.var, std::log(K / S0)));
    CHECK_THAT(viaDensity, WithinAbs(price_call_quantized(q, m.rho, S0, T, K), 1e-8));

    SpxQuantization one;
    one.u = {0.04};
    one.v = {0.1};
    one.p = {1.0};
    const auto g = mixture_density(one, -0.5);
    const double mu = -0.02 - 0.05, var = 0.75 * 0.04;
    CHECK_THAT(g.density(0.1), WithinRel(std::exp(-0.5 * (0.1 - mu) * (0.1 - mu) / var) / std::sqrt(2 * oracle::kPi * var), 1e-13));
    CHECK_THROWS(mixture_density(one, 1.0));
    CHECK(std::isfinite(price_call_quantized(one, 1.0, S0, T, 100)));
}
