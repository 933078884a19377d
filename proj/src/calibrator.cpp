#include "gpvol/calibrator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <random>

#include "gpvol/errors.hpp"
#include "gpvol/implied_vol.hpp"

namespace gpv {

void CalibWeights::validate() const {
    if (!(c1 >= 0.0 && c2 >= 0.0 && c3 >= 0.0)) throw ParameterError("calibration weights must be >= 0");
    if (c1 + c2 + c3 == 0.0) throw ParameterError("calibration weights are all zero");
}

std::vector<std::string> ParamLayout::names() const {
    std::vector<std::string> n{"alpha0", "alpha1", "alpha3", "alpha5", "rho", "H"};
    if (has_beta()) n.push_back("beta");
    for (std::size_t i = 0; i < xi0_times.size(); ++i) n.push_back("xi0_" + std::to_string(i));
    return n;
}

std::size_t ParamLayout::size() const { return 6 + (has_beta() ? 1 : 0) + xi0_times.size(); }

std::vector<double> pack(const ParamLayout& L, const ModelParams& m, const std::vector<double>& xi0_nodes) {
    std::vector<double> x(m.poly.alpha.begin(), m.poly.alpha.end());
    x.push_back(m.rho);
    x.push_back(m.kernel.H);
    if (L.has_beta()) x.push_back(m.kernel.beta);
    if (xi0_nodes.size() != L.xi0_times.size()) throw ParameterError("pack: wrong number of xi0 nodes");
    x.insert(x.end(), xi0_nodes.begin(), xi0_nodes.end());
    return x;
}

Theta unpack(const ParamLayout& L, const std::vector<double>& x) {
    if (x.size() != L.size()) throw ParameterError("unpack: wrong parameter count");
    Theta th;
    th.model.poly = PolyCoeffs::unchecked({x[0], x[1], x[2], x[3]});
    th.model.rho = x[4];
    th.model.kernel = L.kernel_template;
    th.model.kernel.H = x[5];
    std::size_t i = 6;
    if (L.has_beta()) th.model.kernel.beta = x[i++];
    th.xi0_nodes.assign(x.begin() + static_cast<std::ptrdiff_t>(i), x.end());
    return th;
}

Bounds default_bounds(const ParamLayout& L, bool allow_positive_rho) {
    Bounds b;
    b.lo = {0.0, 0.0, 0.0, 0.0, -1.0};
    b.hi = {2.0, 2.0, 2.0, 2.0, allow_positive_rho ? 1.0 : 0.0};
    switch (L.kernel_template.type) {
        case KernelType::Fractional: b.lo.push_back(0.01); break;
        case KernelType::LogModulated: b.lo.push_back(0.0); break;
        default: b.lo.push_back(-1.0); break;
    }
    b.hi.push_back(0.5);
    if (L.has_beta()) {
        b.lo.push_back(1.05);
        b.hi.push_back(5.0);
    }
    for (std::size_t i = 0; i < L.xi0_times.size(); ++i) {
        b.lo.push_back(1e-4);
        b.hi.push_back(1.0);
    }
    return b;
}

namespace {

std::vector<double> distinct_T(const MarketSurface& s, Instrument a, Instrument b) {
    auto x = s.maturities(a);
    auto y = s.maturities(b);
    x.insert(x.end(), y.begin(), y.end());
    std::sort(x.begin(), x.end());
    x.erase(std::unique(x.begin(), x.end()), x.end());
    return x;
}

// Model implied vol with band-edge fallback.
double model_iv(double price, double F, double K, double T, bool& flagged) {
    try {
        const auto iv = implied_vol(price, F, K, T);
        return iv.vol;
    } catch (const BandError& e) {
        flagged = true;
        return e.bound == BandError::Bound::Lower ? kMinVol : kMaxVol;
    }
}

SpxQuantization price_spx_slice(const ModelParams& m, const ForwardVarianceCurve& xi0, double T,
                                const EngineConfig& eng) {
    SpxConfig c = eng.spx;
    if (eng.nn) {
        c.N = eng.nn->N;
        const auto paths = build_spx_paths(m.kernel, T, c);
        return quantize_spx_nn(m, xi0, T, *eng.nn, paths, c);
    }
    c.N = eng.N_spx;
    return quantize_spx(m, xi0, T, c);
}

VixQuantization price_vix_slice(const ModelParams& m, const ForwardVarianceCurve& xi0, double T,
                                const EngineConfig& eng) {
    VixConfig c = eng.vix;
    c.T = T;
    return quantize_vix(m, xi0, c, eng.N_vix);
}

}  // namespace

Objective::Objective(MarketSurface surface, ForwardVarianceCurve xi0, CalibWeights weights, EngineConfig engine)
    : surface_(std::move(surface)), xi0_(std::move(xi0)), w_(weights), eng_(std::move(engine)) {
    w_.validate();
    spx_T_ = surface_.maturities(Instrument::SpxOption);
    vix_T_ = distinct_T(surface_, Instrument::VixOption, Instrument::VixFuture);
    std::map<double, double> vix_fut;
    for (const auto& q : surface_.quotes)
        if (q.instrument == Instrument::VixFuture) vix_fut[q.T] = q.mid;
    for (const auto& q : surface_.quotes) {
        Item it{q.instrument, q.T, q.K, q.mid, 0.0, false};
        try {
            if (q.instrument == Instrument::SpxOption) {
                it.market_iv = implied_vol(q.mid, surface_.spot, q.K, q.T).vol;
                it.market_iv_known = true;
            } else if (q.instrument == Instrument::VixOption && vix_fut.count(q.T)) {
                it.market_iv = implied_vol(q.mid, vix_fut[q.T], q.K, q.T).vol;
                it.market_iv_known = true;
            }
        } catch (const BandError&) {
            diag_.push_back(std::string(instrument_name(q.instrument)) + " T=" + std::to_string(q.T) +
                            " K=" + std::to_string(q.K) + ": market quote outside no-arbitrage band, dropped");
            continue;
        }
        items_.push_back(it);
    }
    if (items_.empty()) throw DegenerateInputError("objective: no usable quotes");
}

ObjectiveValue Objective::evaluate(const ModelParams& m, const ForwardVarianceCurve& xi0) const {
    std::map<double, SpxQuantization> spx;
    std::map<double, VixQuantization> vix;
    for (double T : spx_T_) spx.emplace(T, price_spx_slice(m, xi0, T, eng_));
    for (double T : vix_T_) vix.emplace(T, price_vix_slice(m, xi0, T, eng_));

    std::map<double, double> market_fut;
    for (const auto& it : items_)
        if (it.instrument == Instrument::VixFuture) market_fut[it.T] = it.mid;

    ObjectiveValue out;
    double s_spx = 0.0, s_vix = 0.0, s_fut = 0.0;
    int n_spx = 0, n_vix = 0, n_fut = 0;
    for (const auto& it : items_) {
        Residual r;
        r.instrument = it.instrument;
        r.T = it.T;
        r.K = it.K;
        if (it.instrument == Instrument::SpxOption) {
            const double price = price_call_quantized(spx.at(it.T), m.rho, surface_.spot, it.T, it.K);
            r.market = it.market_iv;
            r.model = model_iv(price, surface_.spot, it.K, it.T, r.flagged);
            s_spx += (r.model - r.market) * (r.model - r.market);
            ++n_spx;
        } else if (it.instrument == Instrument::VixOption) {
            const auto& vq = vix.at(it.T);
            const double F = price_vix_future(vq);
            const double price = price_vix_call(vq, it.K);
            r.model = model_iv(price, F, it.K, it.T, r.flagged);
            if (it.market_iv_known) {
                r.market = it.market_iv;
            } else {
                bool dummy = false;
                r.market = model_iv(it.mid, F, it.K, it.T, dummy);
            }
            s_vix += (r.model - r.market) * (r.model - r.market);
            ++n_vix;
        } else {
            r.market = it.mid;
            r.model = price_vix_future(vix.at(it.T));
            s_fut += (r.model - r.market) * (r.model - r.market);
            ++n_fut;
        }
        if (r.flagged) ++out.flagged;
        out.residuals.push_back(r);
    }
    out.rmse_spx = n_spx ? std::sqrt(s_spx / n_spx) : 0.0;
    out.rmse_vix = n_vix ? std::sqrt(s_vix / n_vix) : 0.0;
    out.rmse_fut = n_fut ? std::sqrt(s_fut / n_fut) : 0.0;
    out.loss = w_.c1 * out.rmse_spx + w_.c2 * out.rmse_vix + w_.c3 * out.rmse_fut;
    return out;
}

CalibResult calibrate(const MarketSurface& surface, const ForwardVarianceCurve& xi0, const ModelParams& init,
                      const CalibConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    init.validate();
    if (cfg.n_starts < 1) throw ParameterError("calibrate: n_starts must be >= 1");
    ParamLayout L{init.kernel, cfg.free_xi0 ? cfg.xi0_times : std::vector<double>{}};
    const Bounds B = cfg.bounds ? *cfg.bounds : default_bounds(L, cfg.allow_positive_rho);
    if (B.lo.size() != L.size() || B.hi.size() != L.size())
        throw ParameterError("calibrate: bounds have " + std::to_string(B.lo.size()) + " entries, expected " +
                             std::to_string(L.size()));
    Objective obj(surface, xi0, cfg.weights, cfg.engine);

    std::vector<double> nodes0;
    for (double t : L.xi0_times) nodes0.push_back(xi0(t));

    auto curve_for = [&](const Theta& th) {
        return L.xi0_times.empty() ? xi0 : ForwardVarianceCurve::spline(L.xi0_times, th.xi0_nodes);
    };
    const double kPenalty = 1e3;
    auto f = [&](const std::vector<double>& x) {
        const Theta th = unpack(L, x);
        const auto& a = th.model.poly.alpha;
        if (a[0] == 0.0 && a[1] == 0.0 && a[2] == 0.0 && a[3] == 0.0) return kPenalty;
        try {
            th.model.validate();
            return obj.evaluate(th.model, curve_for(th)).loss;
        } catch (const ParameterError&) {
            return kPenalty;
        } catch (const NumericError&) {
            return kPenalty;
        }
    };

    std::vector<double> x_init = pack(L, init, nodes0);
    for (std::size_t i = 0; i < x_init.size(); ++i) x_init[i] = std::clamp(x_init[i], B.lo[i], B.hi[i]);

    CalibResult res;
    res.names = L.names();
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    int best = -1;
    std::vector<NelderMeadResult> runs;
    for (int s = 0; s < cfg.n_starts; ++s) {
        std::vector<double> x0 = x_init;
        if (s > 0)
            for (std::size_t i = 0; i < x0.size(); ++i)
                x0[i] = std::clamp(x0[i] + cfg.start_spread * (B.hi[i] - B.lo[i]) * U(rng), B.lo[i], B.hi[i]);
        StartResult sr;
        sr.x0 = x0;
        sr.f0 = f(x0);
        if (s == 0) res.initial_loss = sr.f0;
        NelderMeadConfig nm = cfg.nm;
        nm.max_evals = std::max(nm.max_evals - 1, 1);
        auto run = nelder_mead(f, x0, B.lo, B.hi, nm);
        sr.x = run.x;
        sr.f = run.f;
        sr.evals = run.evals + 1;
        sr.reason = run.reason;
        res.starts.push_back(sr);
        runs.push_back(std::move(run));
        if (best < 0 || sr.f < res.starts[best].f) best = s;
        if (sr.f <= cfg.nm.target) break;
    }
    const auto& bx = res.starts[best].x;
    res.theta = unpack(L, bx);
    res.xi0 = curve_for(res.theta);
    res.value = obj.evaluate(res.theta.model, res.xi0);
    res.converged = res.starts[best].reason != "max_evals";
    res.trace = runs[best].trace;
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

MarketSurface synthetic_surface(const ModelParams& m, const ForwardVarianceCurve& xi0, double spot,
                                const std::vector<double>& spx_T, const std::vector<double>& spx_moneyness,
                                const std::vector<double>& vix_T, const std::vector<double>& vix_moneyness,
                                const EngineConfig& engine) {
    m.validate();
    MarketSurface s;
    s.spot = spot;
    s.as_of = "synthetic";
    for (double T : spx_T) {
        const auto q = price_spx_slice(m, xi0, T, engine);
        for (double k : spx_moneyness) {
            const double K = k * spot;
            const double p = price_call_quantized(q, m.rho, spot, T, K);
            s.quotes.push_back({Instrument::SpxOption, T, K, p, p, p});
        }
    }
    for (double T : vix_T) {
        const auto q = price_vix_slice(m, xi0, T, engine);
        const double F = price_vix_future(q);
        s.quotes.push_back({Instrument::VixFuture, T, 0.0, F, F, F});
        for (double k : vix_moneyness) {
            const double K = k * F;
            const double p = price_vix_call(q, K);
            s.quotes.push_back({Instrument::VixOption, T, K, p, p, p});
        }
    }
    return s;
}

nlohmann::json report_json(const CalibResult& r) {
    using nlohmann::json;
    json j;
    const auto& a = r.theta.model.poly.alpha;
    json theta = {{"alpha0", a[0]}, {"alpha1", a[1]}, {"alpha3", a[2]}, {"alpha5", a[3]},
                  {"rho", r.theta.model.rho}, {"H", r.theta.model.kernel.H}};
    if (r.theta.model.kernel.type == KernelType::LogModulated) theta["beta"] = r.theta.model.kernel.beta;
    j["kernel"] = r.theta.model.kernel.name();
    j["theta"] = theta;
    j["xi0"] = {{"times", r.xi0.node_times()}, {"values", r.xi0.node_values()}, {"describe", r.xi0.describe()}};
    j["objective"] = {{"loss", r.value.loss},
                      {"initial_loss", r.initial_loss},
                      {"rmse_spx_iv", r.value.rmse_spx},
                      {"rmse_vix_iv", r.value.rmse_vix},
                      {"rmse_vix_futures", r.value.rmse_fut},
                      {"flagged_quotes", r.value.flagged}};
    j["converged"] = r.converged;
    json starts = json::array();
    for (const auto& s : r.starts)
        starts.push_back({{"x0", s.x0}, {"x", s.x}, {"f0", s.f0}, {"f", s.f}, {"evals", s.evals}, {"reason", s.reason}});
    j["parameter_names"] = r.names;
    j["starts"] = starts;
    j["trace"] = r.trace;
    json res = json::array();
    for (const auto& q : r.value.residuals)
        res.push_back({{"instrument", instrument_name(q.instrument)},
                       {"T", q.T},
                       {"K", q.K},
                       {"market", q.market},
                       {"model", q.model},
                       {"residual", q.model - q.market},
                       {"flagged", q.flagged}});
    j["residuals"] = res;
    j["timings"] = {{"total_seconds", r.seconds}};
    return j;
}

}  // namespace gpv
