#include <catch_amalgamated.hpp>
#include <algorithm>
#include <cmath>
#include <random>

#include "gpvol/black_scholes.hpp"
#include "gpvol/calibrator.hpp"
#include "gpvol/errors.hpp"
#include "gpvol/implied_vol.hpp"

using namespace gpv;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

EngineConfig small_engine() {
    EngineConfig e;
    e.N_spx = 300;
    e.N_vix = 60;
    return e;
}

const ModelParams kTruth{KernelSpec::fractional(0.1), PolyCoeffs({0.01, 1.0, 0.214, 0.227}), -0.65};
const ForwardVarianceCurve kXi0 = ForwardVarianceCurve::flat(0.03);

MarketSurface surface() {
    return synthetic_surface(kTruth, kXi0, 100, {0.1, 0.25}, {0.9, 0.95, 1.0, 1.05}, {0.1}, {0.9, 1.0, 1.2},
                             small_engine());
}

}  // namespace

TEST_CASE("implied vol inverts Black-Scholes") {
    for (double sig : {0.05, 0.2, 1.0})
        for (double K : {80.0, 100.0, 120.0})
            for (double T : {0.1, 1.0}) {
                const double c = bs_call(100, sig, T, K);
                if (c - std::max(100 - K, 0.0) < 1e-12) continue;
                const auto iv = implied_vol(c, 100, K, T);
                CHECK_FALSE(iv.capped);
                CHECK_THAT(iv.vol, WithinRel(sig, 1e-7));
            }
    CHECK_THROWS_AS(implied_vol(19.0, 100, 80, 1.0), BandError);
    CHECK_THROWS_AS(implied_vol(101.0, 100, 80, 1.0), BandError);
    CHECK_THROWS_AS(implied_vol(1.0, -100, 80, 1.0), ParameterError);
    const auto lo = implied_vol(0.0, 100, 150, 0.1);
    CHECK(lo.capped);
    CHECK(lo.vol == kMinVol);
    const auto hi = implied_vol(100.0, 100, 100, 1.0);
    CHECK(hi.capped);
    CHECK(hi.vol == kMaxVol);
}

TEST_CASE("Nelder-Mead") {
    auto rosen = [](const std::vector<double>& x) {
        return 100.0 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1.0 - x[0], 2);
    };
    NelderMeadConfig c;
    c.max_evals = 5000;
    c.f_tol = 1e-16;
    c.x_tol = 1e-12;
    const auto r = nelder_mead(rosen, {-1.2, 1.0}, {-2, -2}, {2, 2}, c);
    CHECK_THAT(r.x[0], WithinAbs(1.0, 1e-3));
    CHECK_THAT(r.x[1], WithinAbs(1.0, 2e-3));
    CHECK(r.evals <= 5000);
    for (std::size_t i = 1; i < r.trace.size(); ++i) CHECK(r.trace[i] <= r.trace[i - 1]);

    // optimum outside the box lands on the face
    auto quad = [](const std::vector<double>& x) { return std::pow(x[0] - 3.0, 2) + std::pow(x[1] + 0.5, 2); };
    const auto b = nelder_mead(quad, {0.0, 0.0}, {-1, -1}, {1, 1}, c);
    CHECK_THAT(b.x[0], WithinAbs(1.0, 1e-6));
    CHECK_THAT(b.x[1], WithinAbs(-0.5, 1e-4));

    c.target = 0.5;
    const auto t = nelder_mead(quad, {0.0, 0.0}, {-5, -5}, {5, 5}, c);
    CHECK(std::string(t.reason) == "target");
    CHECK(t.f <= 0.5);
}

TEST_CASE("parameter layout") {
    ParamLayout L{KernelSpec::log_modulated(0.1, 1.0, 2.0), {0.1, 0.5}};
    CHECK(L.size() == 9);
    CHECK(L.names()[6] == "beta");
    ModelParams m{KernelSpec::log_modulated(0.2, 1.0, 1.7), PolyCoeffs({0.1, 0.9, 0.2, 0.05}), -0.4};
    const auto x = pack(L, m, {0.02, 0.05});
    const auto th = unpack(L, x);
    CHECK(th.model.kernel.beta == 1.7);
    CHECK(th.model.rho == -0.4);
    CHECK(th.xi0_nodes == std::vector<double>{0.02, 0.05});
    CHECK(pack(L, th.model, th.xi0_nodes) == x);
    const auto B = default_bounds(L);
    CHECK(B.hi[4] == 0.0);
    CHECK(default_bounds(L, true).hi[4] == 1.0);
    CHECK(B.lo[5] == 0.0);
}

TEST_CASE("objective on a synthetic surface") {
    const auto s = surface();
    const Objective obj(s, kXi0, {}, small_engine());
    const auto v = obj.evaluate(kTruth);
    CHECK(v.loss < 1e-6);
    CHECK(v.flagged == 0);

    ModelParams off = kTruth;
    off.rho = -0.3;
    const auto w = obj.evaluate(off);
    CHECK(w.loss > 1e-3);
    CHECK_THAT(w.loss, WithinRel(1.0 * w.rmse_spx + 0.1 * w.rmse_vix + 0.5 * w.rmse_fut, 1e-12));

    // reordering quotes does not change the loss
    MarketSurface shuffled = s;
    std::mt19937 g(5);
    std::shuffle(shuffled.quotes.begin(), shuffled.quotes.end(), g);
    const Objective obj2(shuffled, kXi0, {}, small_engine());
    CHECK_THAT(obj2.evaluate(off).loss, WithinRel(w.loss, 1e-12));

    CalibWeights bad;
    bad.c1 = -1;
    CHECK_THROWS_AS(bad.validate(), ParameterError);
}

TEST_CASE("calibration") {
    const auto s = surface();
    CalibConfig cfg;
    cfg.engine = small_engine();
    cfg.n_starts = 2;
    cfg.nm.max_evals = 60;

    const auto at = calibrate(s, kXi0, kTruth, cfg);
    CHECK(at.converged);
    CHECK(at.starts.size() == 1);
    CHECK(at.starts[0].reason == "target");
    CHECK(at.value.loss <= 1e-8);

    ModelParams init = kTruth;
    init.rho = -0.4;
    init.kernel.H = 0.2;
    const auto a = calibrate(s, kXi0, init, cfg);
    const auto b = calibrate(s, kXi0, init, cfg);
    CHECK(a.value.loss == b.value.loss);
    CHECK(pack(ParamLayout{kTruth.kernel, {}}, a.theta.model) == pack(ParamLayout{kTruth.kernel, {}}, b.theta.model));
    CHECK(a.value.loss < a.initial_loss);
    const auto B = default_bounds(ParamLayout{kTruth.kernel, {}});
    for (const auto& st : a.starts) {
        CHECK(st.evals <= 60);
        for (std::size_t i = 0; i < st.x.size(); ++i) {
            CHECK(st.x[i] >= B.lo[i]);
            CHECK(st.x[i] <= B.hi[i]);
        }
    }
    const auto j = report_json(a);
    CHECK(j.contains("theta"));
    CHECK(j["residuals"].size() == a.value.residuals.size());
}
