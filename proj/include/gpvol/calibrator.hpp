#pragma once

#include <memory>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "gpvol/curve.hpp"
#include "gpvol/market.hpp"
#include "gpvol/model.hpp"
#include "gpvol/nelder_mead.hpp"
#include "gpvol/nn_runtime.hpp"
#include "gpvol/spx_engine.hpp"
#include "gpvol/vix_engine.hpp"

namespace gpv {

struct CalibWeights {
    double c1 = 1.0;  // SPX implied vols
    double c2 = 0.1;  // VIX implied vols
    double c3 = 0.5;  // VIX futures
    void validate() const;
};

struct EngineConfig {
    long N_spx = 10000;
    long N_vix = 200;
    SpxConfig spx;  // N is overwritten by N_spx (or the NN size)
    VixConfig vix;  // T is set per maturity
    std::shared_ptr<const MlpWeights> nn;  // optional correction networks
};

/// Free coordinates: alpha0, alpha1, alpha3, alpha5, rho, H, beta (log-modulated only),
/// then the xi0 spline node values when xi0 nodes are free.
struct ParamLayout {
    KernelSpec kernel_template;  // eps, theta and (fixed) beta come from here
    std::vector<double> xi0_times;  // empty: curve held fixed
    std::vector<std::string> names() const;
    std::size_t size() const;
    bool has_beta() const { return kernel_template.type == KernelType::LogModulated; }
};

struct Theta {
    ModelParams model;
    std::vector<double> xi0_nodes;
};

std::vector<double> pack(const ParamLayout& L, const ModelParams& m, const std::vector<double>& xi0_nodes = {});
/// Builds a model without validating it.
Theta unpack(const ParamLayout& L, const std::vector<double>& x);

struct Bounds {
    std::vector<double> lo, hi;
};
/// alpha in [0, 2], rho in [rho_lo, 0] (or [-1, 1] when allow_positive_rho), H per kernel domain,
/// beta in [1.05, 5], xi0 nodes in [1e-4, 1].
Bounds default_bounds(const ParamLayout& L, bool allow_positive_rho = false);

struct Residual {
    Instrument instrument = Instrument::SpxOption;
    double T = 0.0, K = 0.0;
    double market = 0.0;  // implied vol, or futures price
    double model = 0.0;
    bool flagged = false;  // model price outside the no-arbitrage band
};

struct ObjectiveValue {
    double loss = 0.0;
    double rmse_spx = 0.0, rmse_vix = 0.0, rmse_fut = 0.0;
    std::vector<Residual> residuals;
    int flagged = 0;
};

/// Joint SPX/VIX loss. Market implied vols are computed once at construction.
class Objective {
public:
    Objective(MarketSurface surface, ForwardVarianceCurve xi0, CalibWeights weights, EngineConfig engine);

    ObjectiveValue evaluate(const ModelParams& m, const ForwardVarianceCurve& xi0) const;
    ObjectiveValue evaluate(const ModelParams& m) const { return evaluate(m, xi0_); }

    const MarketSurface& surface() const { return surface_; }
    const ForwardVarianceCurve& xi0() const { return xi0_; }
    const CalibWeights& weights() const { return w_; }
    const EngineConfig& engine() const { return eng_; }
    const std::vector<std::string>& diagnostics() const { return diag_; }

private:
    struct Item {
        Instrument instrument;
        double T, K, mid;
        double market_iv;  // SPX always; VIX when a market future exists for T
        bool market_iv_known;
    };
    MarketSurface surface_;
    ForwardVarianceCurve xi0_;
    CalibWeights w_;
    EngineConfig eng_;
    std::vector<Item> items_;
    std::vector<double> spx_T_, vix_T_;
    std::vector<std::string> diag_;
};

struct CalibConfig {
    CalibWeights weights;
    EngineConfig engine;
    int n_starts = 4;
    unsigned long seed = 7;
    double start_spread = 0.25;  // multi-start perturbation, fraction of box width
    NelderMeadConfig nm{};       // per start
    bool allow_positive_rho = false;
    bool free_xi0 = false;
    std::vector<double> xi0_times{7.0 / 365, 30.0 / 365, 60.0 / 365, 91.0 / 365, 182.0 / 365};
    std::optional<Bounds> bounds;

    CalibConfig() { nm.target = 1e-8; }
};

struct StartResult {
    std::vector<double> x0, x;
    double f0 = 0.0, f = 0.0;
    int evals = 0;
    std::string reason;
};

struct CalibResult {
    Theta theta;
    ForwardVarianceCurve xi0 = ForwardVarianceCurve::flat(0.04);
    ObjectiveValue value;
    double initial_loss = 0.0;
    bool converged = false;
    std::vector<StartResult> starts;
    std::vector<double> trace;  // best-start trace
    std::vector<std::string> names;
    double seconds = 0.0;
};

CalibResult calibrate(const MarketSurface& surface, const ForwardVarianceCurve& xi0, const ModelParams& init,
                      const CalibConfig& cfg);

/// Synthetic quotes (mid = bid = ask) priced by the same engines the objective uses.
MarketSurface synthetic_surface(const ModelParams& m, const ForwardVarianceCurve& xi0, double spot,
                                const std::vector<double>& spx_T, const std::vector<double>& spx_moneyness,
                                const std::vector<double>& vix_T, const std::vector<double>& vix_moneyness,
                                const EngineConfig& engine);

nlohmann::json report_json(const CalibResult& r);

}  // namespace gpv
