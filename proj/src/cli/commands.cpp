#include <CLI11.hpp>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>

#include "gpvol/black_scholes.hpp"
#include "gpvol/cli.hpp"
#include "gpvol/errors.hpp"
#include "gpvol/implied_vol.hpp"
#include "gpvol/market.hpp"
#include "gpvol/product_quantizer.hpp"
#include "gpvol/scalar_quantizer.hpp"

namespace gpv::cli {

using nlohmann::json;

namespace {

// Output to a file, or stdout when the path is empty or "-".
class Sink {
public:
    explicit Sink(const std::string& path) {
        if (!path.empty() && path != "-") {
            file_.open(path);
            if (!file_) throw ParameterError("cannot open output file " + path);
        }
        os().precision(12);
    }
    std::ostream& os() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

private:
    std::ofstream file_;
};

std::string fmt(double x) {
    std::ostringstream s;
    s.precision(12);
    s << x;
    return s.str();
}

std::string iv_or_blank(double price, double F, double K, double T, std::string& flag) {
    try {
        const auto iv = implied_vol(price, F, K, T);
        if (iv.capped) flag = "capped";
        return fmt(iv.vol);
    } catch (const BandError& e) {
        flag = e.bound == BandError::Bound::Lower ? "below_band" : "above_band";
        return "";
    }
}

void need(bool ok, const char* what) {
    if (!ok) throw ParameterError(std::string("config: missing field '") + what + "'");
}

SpxQuantization spx_slice(const RunConfig& rc, const ModelParams& m, double T) {
    SpxConfig c = rc.spx;
    if (rc.nn) {
        c.N = rc.nn->N;
        return quantize_spx_nn(m, rc.curve(), T, *rc.nn, build_spx_paths(m.kernel, T, c), c);
    }
    c.N = rc.N_spx;
    return quantize_spx(m, rc.curve(), T, c);
}

VixConfig vix_at(const RunConfig& rc, double T) {
    VixConfig c = rc.vix;
    c.T = T;
    return c;
}

void write_density(std::ostream& os, const RunConfig& rc, const ModelParams& m, double x_min, double x_max,
                   int n_points) {
    if (n_points < 2 || !(x_max > x_min)) throw ParameterError("density grid needs n_points >= 2 and x_max > x_min");
    os << "T,x,density\n";
    for (double T : rc.maturities) {
        const auto mix = mixture_density(spx_slice(rc, m, T), m.rho);
        for (int i = 0; i < n_points; ++i) {
            const double x = x_min + (x_max - x_min) * i / (n_points - 1);
            os << fmt(T) << ',' << fmt(x) << ',' << fmt(mix.density(x)) << '\n';
        }
    }
}

int cmd_quantize(const RunConfig& rc, const std::string& kind, long N, double T, int n_t, const std::string& out) {
    Sink sink(out);
    auto& os = sink.os();
    os << header_line(rc.raw) << '\n';
    if (kind == "scalar") {
        if (N < 1 || N > kMaxScalarQuantizer) throw ParameterError("quantize: N out of range");
        const auto q = optimal_scalar_quantizer(static_cast<int>(N));
        os << "index,point,prob\n";
        for (int i = 0; i < q->N; ++i) os << i << ',' << fmt(q->points[i]) << ',' << fmt(q->probs[i]) << '\n';
    } else if (kind == "decomposition") {
        const auto d = optimal_decomposition(N, T);
        os << "N_budget,T,sizes,distortion\n" << N << ',' << fmt(T) << ',';
        for (std::size_t i = 0; i < d.sizes.size(); ++i) os << (i ? " " : "") << d.sizes[i];
        os << ',' << fmt(d.distortion) << '\n';
    } else if (kind == "product") {
        const auto pq = build_product_quantizer(N, T);
        os << "index,prob,t,w\n";
        for (std::size_t j = 0; j < pq.count(); ++j) {
            const double p = pq.probability(j);
            for (int i = 0; i <= n_t; ++i) {
                const double t = T * i / n_t;
                os << j << ',' << fmt(p) << ',' << fmt(t) << ',' << fmt(pq.path(j, t)) << '\n';
            }
        }
    } else {
        throw ParameterError("quantize: --kind must be scalar, product or decomposition");
    }
    return kOk;
}

int cmd_price_vix(const RunConfig& rc, const std::string& out) {
    const auto m = rc.model();
    need(!rc.maturities.empty(), "maturities");
    Sink sink(out);
    auto& os = sink.os();
    os << header_line(rc.raw) << '\n' << "T,K,future,call,put,iv,flag\n";
    for (double T : rc.maturities) {
        const auto q = quantize_vix(m, rc.curve(), vix_at(rc, T), rc.N_vix);
        const double F = price_vix_future(q);
        os << fmt(T) << ",," << fmt(F) << ",,,," << (q.clipped ? "clipped" : "") << '\n';
        for (double K : rc.strikes) {
            const double c = price_vix_call(q, K);
            std::string flag;
            const std::string iv = iv_or_blank(c, F, K, T, flag);
            os << fmt(T) << ',' << fmt(K) << ',' << fmt(F) << ',' << fmt(c) << ',' << fmt(price_vix_put(q, K)) << ','
               << iv << ',' << flag << '\n';
        }
    }
    return kOk;
}

int cmd_price_spx(const RunConfig& rc, const std::string& out, const std::string& density) {
    const auto m = rc.model();
    need(!rc.maturities.empty(), "maturities");
    need(!rc.strikes.empty(), "strikes");
    Sink sink(out);
    auto& os = sink.os();
    os << header_line(rc.raw) << '\n' << "T,K,call,put,iv,forward,flag\n";
    for (double T : rc.maturities) {
        const auto q = spx_slice(rc, m, T);
        const double fwd = forward_quantized(q, m.rho, rc.spot);
        for (double K : rc.strikes) {
            const double c = price_call_quantized(q, m.rho, rc.spot, T, K);
            std::string flag;
            const std::string iv = iv_or_blank(c, rc.spot, K, T, flag);
            os << fmt(T) << ',' << fmt(K) << ',' << fmt(c) << ','
               << fmt(price_put_quantized(q, m.rho, rc.spot, T, K)) << ',' << iv << ',' << fmt(fwd) << ',' << flag
               << '\n';
        }
    }
    if (!density.empty()) {
        Sink d(density);
        d.os() << header_line(rc.raw) << '\n';
        write_density(d.os(), rc, m, -1.0, 0.5, 301);
    }
    return kOk;
}

int cmd_export_density(const RunConfig& rc, double x_min, double x_max, int n, const std::string& out) {
    const auto m = rc.model();
    need(!rc.maturities.empty(), "maturities");
    Sink sink(out);
    sink.os() << header_line(rc.raw) << '\n';
    write_density(sink.os(), rc, m, x_min, x_max, n);
    return kOk;
}

int cmd_calibrate(const RunConfig& rc, const std::string& out, const std::string& report) {
    need(!rc.market_path.empty(), "market");
    const auto m = rc.model();
    FilterStats st;
    const auto surface = filter_quotes(read_market_csv_file(rc.market_path), 1.0, &st);
    const auto r = calibrate(surface, rc.curve(), m, rc.calib);
    json rep = report_json(r);
    rep["meta"] = {{"version", kVersion}, {"config_hash", config_hash(rc.raw)}};
    rep["filter"] = {{"dropped_zero_bid", st.dropped_zero_bid}, {"dropped_wide", st.dropped_wide}};
    {
        Sink s(report);
        s.os() << rep.dump(2) << '\n';
    }
    if (!out.empty()) {
        Sink s(out);
        s.os() << header_line(rc.raw) << '\n' << "instrument,T,K,market,model,residual,flagged\n";
        for (const auto& q : r.value.residuals)
            s.os() << instrument_name(q.instrument) << ',' << fmt(q.T) << ','
                   << (q.instrument == Instrument::VixFuture ? "" : fmt(q.K)) << ',' << fmt(q.market) << ','
                   << fmt(q.model) << ',' << fmt(q.model - q.market) << ',' << (q.flagged ? 1 : 0) << '\n';
    }
    return kOk;
}

int cmd_mc(const RunConfig& rc, const std::string& product, const std::string& out) {
    const auto m = rc.model();
    need(!rc.maturities.empty(), "maturities");
    Sink sink(out);
    auto& os = sink.os();
    os << header_line(rc.raw) << '\n';
    if (product == "spx") {
        need(!rc.strikes.empty(), "strikes");
        bool first = true;
        for (double T : rc.maturities) {
            const auto r = simulate_spx(m, rc.curve(), T, rc.spot, rc.strikes, rc.mc);
            write_mc_csv(os, m, T, r, first);
            first = false;
        }
    } else if (product == "vix") {
        os << "product,T,K,price,se\n";
        for (double T : rc.maturities) {
            const auto r = simulate_vix(m, rc.curve(), vix_at(rc, T), rc.strikes, rc.mc);
            os << "VIX_FUT," << fmt(T) << ",," << fmt(r.future.mean) << ',' << fmt(r.future.se) << '\n';
            for (std::size_t i = 0; i < r.strikes.size(); ++i)
                os << "VIX_OPT," << fmt(T) << ',' << fmt(r.strikes[i]) << ',' << fmt(r.calls[i].mean) << ','
                   << fmt(r.calls[i].se) << '\n';
        }
    } else {
        throw ParameterError("mc: --product must be spx or vix");
    }
    return kOk;
}

struct Range {
    double lo, hi;
};

Range h_range(KernelType t) {
    if (t == KernelType::Fractional || t == KernelType::LogModulated) return {0.005, 0.5};
    return {-1.0, 0.5};
}

int cmd_gen_training(const RunConfig& rc, long n_samples, int n_nodes, const std::string& out) {
    if (!rc.kernel) throw ParameterError("config: missing field 'kernel'");
    if (n_samples < 1) throw ParameterError("gen-training: n_samples must be >= 1");
    if (n_nodes < 1) throw ParameterError("gen-training: n_nodes must be >= 1");
    const auto& base = rc.curve();
    const KernelSpec k0 = *rc.kernel;
    const bool has_beta = k0.type == KernelType::LogModulated;
    std::vector<double> strikes = rc.strikes;
    if (strikes.empty())
        for (int p = 60; p <= 120; p += 5) strikes.push_back(rc.spot * p / 100.0);

    Sink sink(out);
    auto& os = sink.os();
    os << header_line(rc.raw) << '\n' << "alpha0,alpha1,alpha3,alpha5,rho,H,beta,T";
    for (int i = 0; i < n_nodes; ++i) os << ",xi0_" << i;
    for (double K : strikes) os << ",price_K" << fmt(K);
    for (double K : strikes) os << ",se_K" << fmt(K);
    os << '\n';

    std::mt19937_64 rng(rc.seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    std::normal_distribution<double> Y(0.0, 1.0);
    const Range hr = h_range(k0.type);
    for (long s = 0; s < n_samples; ++s) {
        std::array<double, 4> a{};
        for (auto& x : a) x = U(rng);
        if (a[0] + a[1] + a[2] + a[3] == 0.0) a[1] = 1.0;
        const double rho = -1.0 + 0.8 * U(rng);
        const double T = 0.01 + 0.49 * U(rng);
        const double beta = 1.0 + 3.0 * U(rng);
        double H = hr.lo + (hr.hi - hr.lo) * U(rng);
        if (k0.type == KernelType::Fractional && H <= 0.0) H = hr.lo;
        KernelSpec k = k0;
        k.H = H;
        if (has_beta) k.beta = std::max(beta, 1.0 + 1e-9);
        std::vector<double> times(n_nodes), vals(n_nodes);
        for (int i = 0; i < n_nodes; ++i) {
            times[i] = T * (i + 0.5) / n_nodes;
            vals[i] = base(times[i]) * std::exp(0.2 * Y(rng));
        }
        const auto xi0 = ForwardVarianceCurve::spline(times, vals);
        ModelParams m{k, PolyCoeffs(a), rho};
        McConfig mc = rc.mc;
        mc.seed = rc.seed ^ (0x9e3779b97f4a7c15ull * static_cast<std::uint64_t>(s + 1));
        const auto r = simulate_spx(m, xi0, T, rc.spot, strikes, mc);
        os << fmt(a[0]) << ',' << fmt(a[1]) << ',' << fmt(a[2]) << ',' << fmt(a[3]) << ',' << fmt(rho) << ','
           << fmt(H) << ',' << (has_beta ? fmt(k.beta) : "") << ',' << fmt(T);
        for (double v : vals) os << ',' << fmt(v);
        for (const auto& c : r.calls) os << ',' << fmt(c.mean);
        for (const auto& c : r.calls) os << ',' << fmt(c.se);
        os << '\n';
    }
    return kOk;
}

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        try {
            out.push_back(std::stod(cell));
        } catch (const std::exception&) {
            throw ParameterError("bad number '" + cell + "' in list '" + s + "'");
        }
    }
    return out;
}

}  // namespace

int run(int argc, char** argv) {
    CLI::App app{"Gaussian polynomial volatility: quantization pricing, Monte Carlo and calibration"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string("gpvol ") + kVersion);

    std::string config_path, out, report, density, kind = "scalar", product = "spx", cache_dir;
    std::vector<std::string> sets;
    std::string alpha, maturities, strikes, market, nn_weights, kernel_type;
    double H = NAN, rho = NAN, eps = NAN, xi0_flat = NAN, T = 1.0, x_min = -1.0, x_max = 0.5;
    long N = 0, N_vix = 0, N_spx = 0, n_paths = 0, n_samples = 2000, seed = -1;
    int n_steps = 0, n_t = 20, n_nodes = 50, n_points = 301;

    auto common = [&](CLI::App* c) {
        c->add_option("-c,--config", config_path, "JSON config file");
        c->add_option("-o,--out", out, "output file (default stdout)");
        c->add_option("--set", sets, "override a config field, e.g. kernel.H=0.1");
        c->add_option("--kernel", kernel_type, "kernel type");
        c->add_option("--H", H, "Hurst-type parameter");
        c->add_option("--eps", eps, "kernel epsilon");
        c->add_option("--rho", rho, "spot-vol correlation");
        c->add_option("--alpha", alpha, "alpha0,alpha1,alpha3,alpha5");
        c->add_option("--xi0", xi0_flat, "flat forward variance");
        c->add_option("--maturities", maturities, "comma-separated maturities in years");
        c->add_option("--strikes", strikes, "comma-separated strikes");
        c->add_option("--seed", seed, "random seed");
        c->add_option("--nn-weights", nn_weights, "correction network weights (JSON)");
        c->add_option("--cache-dir", cache_dir, "scalar quantizer cache directory");
    };
    auto* q = app.add_subcommand("quantize", "optimal scalar or product quantizers");
    auto* pv = app.add_subcommand("price-vix", "VIX futures and calls by quantization");
    auto* ps = app.add_subcommand("price-spx", "SPX calls by quantization");
    auto* ca = app.add_subcommand("calibrate", "joint SPX/VIX calibration");
    auto* mc = app.add_subcommand("mc", "Monte Carlo oracle prices");
    auto* gt = app.add_subcommand("gen-training", "training data for the correction networks");
    auto* ed = app.add_subcommand("export-density", "quantized density of log(S_T/S_0)");
    for (auto* c : {q, pv, ps, ca, mc, gt, ed}) common(c);
    q->add_option("--kind", kind, "scalar | product | decomposition");
    q->add_option("--N", N, "quantizer size or budget")->required();
    q->add_option("--T", T, "horizon for product quantizers");
    q->add_option("--n-t", n_t, "time points per product trajectory");
    for (auto* c : {pv, ca}) c->add_option("--N-vix", N_vix, "VIX trajectory budget");
    for (auto* c : {ps, ca, ed}) c->add_option("--N-spx", N_spx, "SPX trajectory budget");
    ps->add_option("--density", density, "also write the density to this file");
    ca->add_option("--market", market, "market CSV");
    ca->add_option("--report", report, "report JSON (default stdout)");
    for (auto* c : {mc, gt}) {
        c->add_option("--n-paths", n_paths, "Monte Carlo paths");
        c->add_option("--n-steps", n_steps, "time steps");
    }
    mc->add_option("--product", product, "spx | vix");
    gt->add_option("--n-samples", n_samples, "number of parameter draws");
    gt->add_option("--n-nodes", n_nodes, "xi0 nodes per sample");
    ed->add_option("--x-min", x_min);
    ed->add_option("--x-max", x_max);
    ed->add_option("--n-points", n_points);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        if (!cache_dir.empty()) set_quantizer_cache_dir(cache_dir);
        json raw = config_path.empty() ? json::object() : read_config_file(config_path);
        auto set = [&](const std::string& path, const json& v) {
            json* node = &raw;
            std::size_t start = 0;
            for (;;) {
                const auto dot = path.find('.', start);
                const auto key = path.substr(start, dot - start);
                if (!node->is_object()) *node = json::object();
                if (dot == std::string::npos) {
                    (*node)[key] = v;
                    break;
                }
                node = &(*node)[key];
                start = dot + 1;
            }
        };
        if (!kernel_type.empty()) set("kernel.type", kernel_type);
        if (!std::isnan(H)) set("kernel.H", H);
        if (!std::isnan(eps)) set("kernel.eps", eps);
        if (!std::isnan(rho)) set("theta.rho", rho);
        if (!alpha.empty()) set("theta.alpha", parse_list(alpha));
        if (!std::isnan(xi0_flat)) set("xi0", json{{"flat", xi0_flat}});
        if (!maturities.empty()) set("maturities", parse_list(maturities));
        if (!strikes.empty()) set("strikes", parse_list(strikes));
        if (seed >= 0) set("seed", seed);
        if (!nn_weights.empty()) set("nn_weights", nn_weights);
        if (!market.empty()) set("market", market);
        if (N_vix > 0) set("quantizer.N_vix", N_vix);
        if (N_spx > 0) set("quantizer.N_spx", N_spx);
        if (n_paths > 0) set("mc.n_paths", n_paths);
        if (n_steps > 0) set("mc.n_steps", n_steps);
        for (const auto& s : sets) {
            const auto eq = s.find('=');
            if (eq == std::string::npos) throw ParameterError("--set expects key=value, got '" + s + "'");
            set_path(raw, s.substr(0, eq), s.substr(eq + 1));
        }
        const RunConfig rc = parse_config(raw);

        if (*q) return cmd_quantize(rc, kind, N, T, n_t, out);
        if (*pv) return cmd_price_vix(rc, out);
        if (*ps) return cmd_price_spx(rc, out, density);
        if (*ca) return cmd_calibrate(rc, out, report);
        if (*mc) return cmd_mc(rc, product, out);
        if (*gt) return cmd_gen_training(rc, n_samples, n_nodes, out);
        if (*ed) return cmd_export_density(rc, x_min, x_max, n_points, out);
        return kConfigError;
    } catch (const ParameterError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kConfigError;
    } catch (const SchemaError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kConfigError;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return kNumericError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kFailure;
    }
}

}  // namespace gpv::cli
