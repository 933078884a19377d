#include <cstdio>
#include <fstream>
#include <sstream>

#include "gpvol/cli.hpp"
#include "gpvol/errors.hpp"
#include "gpvol/market.hpp"

namespace gpv::cli {

using nlohmann::json;

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string config_hash(const json& raw) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(raw.dump())));
    return buf;
}

std::string header_line(const json& raw) {
    return std::string("# gpvol ") + kVersion + " config_hash=" + config_hash(raw);
}

void set_path(json& j, const std::string& dotted, const std::string& value) {
    json* node = &j;
    std::size_t start = 0;
    for (;;) {
        const auto dot = dotted.find('.', start);
        const std::string key = dotted.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (key.empty()) throw ParameterError("config: bad override path '" + dotted + "'");
        if (!node->is_object()) *node = json::object();
        if (dot == std::string::npos) {
            json v = json::parse(value, nullptr, false);
            (*node)[key] = v.is_discarded() ? json(value) : v;
            return;
        }
        node = &(*node)[key];
        start = dot + 1;
    }
}

namespace {

const json* find(const json& j, const std::string& key) {
    if (!j.is_object()) return nullptr;
    auto it = j.find(key);
    return it == j.end() || it->is_null() ? nullptr : &*it;
}

double num(const json& j, const std::string& key, const std::string& path) {
    const json* v = find(j, key);
    if (!v) throw ParameterError("config: missing field '" + path + "'");
    if (!v->is_number()) throw ParameterError("config: field '" + path + "' must be a number");
    return v->get<double>();
}

double num_or(const json& j, const std::string& key, const std::string& path, double dflt) {
    return find(j, key) ? num(j, key, path) : dflt;
}

bool flag_or(const json& j, const std::string& key, const std::string& path, bool dflt) {
    const json* v = find(j, key);
    if (!v) return dflt;
    if (!v->is_boolean()) throw ParameterError("config: field '" + path + "' must be true or false");
    return v->get<bool>();
}

std::vector<double> numbers(const json& v, const std::string& path) {
    if (!v.is_array()) throw ParameterError("config: field '" + path + "' must be an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
        if (!e.is_number()) throw ParameterError("config: field '" + path + "' must be an array of numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

std::vector<double> read_curve_csv(const std::string& path, std::vector<double>& values) {
    std::ifstream in(path);
    if (!in) throw ParameterError("config: cannot open xi0 file " + path);
    std::vector<double> t;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#' || line.find_first_not_of("0123456789.-+eE, \t\r") != std::string::npos)
            continue;
        std::istringstream ss(line);
        double a = 0.0, b = 0.0;
        char comma = 0;
        if (!(ss >> a >> comma >> b) || comma != ',')
            throw SchemaError("xi0 file line " + std::to_string(lineno) + ": expected 't,xi0'");
        t.push_back(a);
        values.push_back(b);
    }
    if (t.empty()) throw SchemaError("xi0 file " + path + ": no rows");
    return t;
}

}  // namespace

KernelSpec parse_kernel(const json& j) {
    if (!j.is_object()) throw ParameterError("config: missing field 'kernel'");
    const json* type = find(j, "type");
    if (!type) throw ParameterError("config: missing field 'kernel.type'");
    if (!type->is_string()) throw ParameterError("config: field 'kernel.type' must be a string");
    const std::string t = type->get<std::string>();
    const double H = num(j, "H", "kernel.H");
    KernelSpec k;
    if (t == "fractional") k = KernelSpec::fractional(H);
    else if (t == "log_modulated")
        k = KernelSpec::log_modulated(H, num_or(j, "theta", "kernel.theta", 1.0), num(j, "beta", "kernel.beta"));
    else if (t == "shifted_fractional") k = KernelSpec::shifted_fractional(H, num(j, "eps", "kernel.eps"));
    else if (t == "exponential") k = KernelSpec::exponential(H, num(j, "eps", "kernel.eps"));
    else throw ParameterError("config: unknown kernel.type '" + t + "'");
    return k;
}

ForwardVarianceCurve parse_xi0(const json& j) {
    if (j.is_number()) return ForwardVarianceCurve::flat(j.get<double>());
    if (!j.is_object()) throw ParameterError("config: field 'xi0' must be a number or an object");
    if (const json* v = find(j, "flat")) {
        if (!v->is_number()) throw ParameterError("config: field 'xi0.flat' must be a number");
        return ForwardVarianceCurve::flat(v->get<double>());
    }
    if (const json* v = find(j, "exp_blend")) {
        return ForwardVarianceCurve::exp_blend(num(*v, "start", "xi0.exp_blend.start"),
                                               num(*v, "end", "xi0.exp_blend.end"),
                                               num(*v, "speed", "xi0.exp_blend.speed"));
    }
    if (const json* v = find(j, "nodes")) {
        const json* t = find(*v, "times");
        const json* y = find(*v, "values");
        if (!t) throw ParameterError("config: missing field 'xi0.nodes.times'");
        if (!y) throw ParameterError("config: missing field 'xi0.nodes.values'");
        return ForwardVarianceCurve::spline(numbers(*t, "xi0.nodes.times"), numbers(*y, "xi0.nodes.values"));
    }
    if (const json* v = find(j, "file")) {
        std::vector<double> vals;
        auto t = read_curve_csv(v->get<std::string>(), vals);
        return ForwardVarianceCurve::spline(std::move(t), std::move(vals));
    }
    if (const json* v = find(j, "strip")) {
        const auto surface = filter_quotes(read_market_csv_file(v->get<std::string>()));
        return build_xi0(strip_forward_variance(surface));
    }
    throw ParameterError("config: field 'xi0' needs one of flat, exp_blend, nodes, file, strip");
}

ModelParams RunConfig::model() const {
    if (!kernel) throw ParameterError("config: missing field 'kernel'");
    if (!poly) throw ParameterError("config: missing field 'theta.alpha'");
    ModelParams m{*kernel, *poly, rho};
    m.validate();
    return m;
}

const ForwardVarianceCurve& RunConfig::curve() const {
    if (!xi0) throw ParameterError("config: missing field 'xi0'");
    return *xi0;
}

EngineConfig RunConfig::engine() const {
    EngineConfig e;
    e.N_spx = N_spx;
    e.N_vix = N_vix;
    e.spx = spx;
    e.vix = vix;
    e.nn = nn;
    return e;
}

RunConfig parse_config(const json& raw) {
    RunConfig rc;
    rc.raw = raw;
    if (!raw.is_object()) throw ParameterError("config: top level must be an object");
    if (const json* k = find(raw, "kernel")) rc.kernel = parse_kernel(*k);
    if (const json* th = find(raw, "theta")) {
        if (const json* a = find(*th, "alpha")) {
            const auto v = numbers(*a, "theta.alpha");
            if (v.size() != 4) throw ParameterError("config: field 'theta.alpha' needs 4 entries (alpha0, alpha1, alpha3, alpha5)");
            rc.poly = PolyCoeffs({v[0], v[1], v[2], v[3]});
        }
        rc.rho = num_or(*th, "rho", "theta.rho", 0.0);
        if (!(rc.rho >= -1.0 && rc.rho <= 1.0)) throw ParameterError("config: field 'theta.rho' must lie in [-1, 1]");
    }
    if (const json* x = find(raw, "xi0")) rc.xi0 = parse_xi0(*x);
    rc.spot = num_or(raw, "spot", "spot", 100.0);
    if (!(rc.spot > 0.0)) throw ParameterError("config: field 'spot' must be > 0");
    if (const json* m = find(raw, "maturities")) rc.maturities = numbers(*m, "maturities");
    if (const json* s = find(raw, "strikes")) rc.strikes = numbers(*s, "strikes");
    for (double T : rc.maturities)
        if (!(T > 0.0)) throw ParameterError("config: maturities must be > 0");
    for (double K : rc.strikes)
        if (!(K > 0.0)) throw ParameterError("config: strikes must be > 0");

    rc.seed = static_cast<std::uint64_t>(num_or(raw, "seed", "seed", 42.0));
    const json empty = json::object();
    const json* q = find(raw, "quantizer");
    const json& Q = q ? *q : empty;
    rc.N_vix = static_cast<long>(num_or(Q, "N_vix", "quantizer.N_vix", 200));
    rc.N_spx = static_cast<long>(num_or(Q, "N_spx", "quantizer.N_spx", 10000));
    if (rc.N_vix < 1 || rc.N_spx < 1) throw ParameterError("config: quantizer budgets must be >= 1");
    rc.vix.n_u = static_cast<int>(num_or(Q, "n_u", "quantizer.n_u", rc.vix.n_u));
    rc.vix.delta = num_or(Q, "delta", "quantizer.delta", rc.vix.delta);
    rc.vix.moment_q = static_cast<int>(num_or(Q, "moment_q", "quantizer.moment_q", rc.vix.moment_q));
    rc.vix.markovian_exponential = flag_or(Q, "markovian", "quantizer.markovian", true);
    if (const json* h = find(Q, "kl_horizon")) {
        const auto s = h->is_string() ? h->get<std::string>() : "";
        if (s == "T") rc.vix.kl_horizon = KlHorizon::Maturity;
        else if (s == "T+delta") rc.vix.kl_horizon = KlHorizon::MaturityPlusDelta;
        else throw ParameterError("config: field 'quantizer.kl_horizon' must be \"T\" or \"T+delta\"");
    }
    rc.spx.N = rc.N_spx;
    rc.spx.n_t = static_cast<int>(num_or(Q, "n_t", "quantizer.n_t", rc.spx.n_t));
    rc.spx.trace_match = flag_or(Q, "trace_match", "quantizer.trace_match", true);
    rc.spx.second_moment_match = flag_or(Q, "second_moment_match", "quantizer.second_moment_match", true);
    if (const json* c = find(Q, "correction")) {
        const auto s = c->is_string() ? c->get<std::string>() : "";
        if (s == "auto") rc.spx.mode = CorrectionMode::Auto;
        else if (s == "semimartingale") rc.spx.mode = CorrectionMode::Semimartingale;
        else if (s == "renormalized") rc.spx.mode = CorrectionMode::Renormalized;
        else throw ParameterError("config: field 'quantizer.correction' must be auto, semimartingale or renormalized");
    }
    rc.vix.validate();
    rc.spx.validate();

    const json* mc = find(raw, "mc");
    const json& M = mc ? *mc : empty;
    rc.mc.n_paths = static_cast<long>(num_or(M, "n_paths", "mc.n_paths", static_cast<double>(rc.mc.n_paths)));
    rc.mc.n_steps = static_cast<int>(num_or(M, "n_steps", "mc.n_steps", rc.mc.n_steps));
    rc.mc.antithetic = flag_or(M, "antithetic", "mc.antithetic", true);
    rc.mc.control_variate = flag_or(M, "control_variate", "mc.control_variate", true);
    rc.mc.seed = rc.seed;
    rc.mc.validate();

    if (const json* w = find(raw, "nn_weights")) {
        if (!w->is_string()) throw ParameterError("config: field 'nn_weights' must be a path");
        rc.nn = std::make_shared<MlpWeights>(load_weights(w->get<std::string>()));
    }

    const json* ca = find(raw, "calibration");
    const json& C = ca ? *ca : empty;
    if (const json* w = find(C, "weights")) {
        const auto v = numbers(*w, "calibration.weights");
        if (v.size() != 3) throw ParameterError("config: field 'calibration.weights' needs 3 entries (c1, c2, c3)");
        rc.calib.weights = {v[0], v[1], v[2]};
    }
    rc.calib.weights.validate();
    rc.calib.n_starts = static_cast<int>(num_or(C, "n_starts", "calibration.n_starts", rc.calib.n_starts));
    rc.calib.nm.max_evals = static_cast<int>(num_or(C, "max_evals", "calibration.max_evals", rc.calib.nm.max_evals));
    rc.calib.free_xi0 = flag_or(C, "free_xi0", "calibration.free_xi0", false);
    rc.calib.allow_positive_rho = flag_or(C, "allow_positive_rho", "calibration.allow_positive_rho", false);
    if (const json* t = find(C, "xi0_times")) rc.calib.xi0_times = numbers(*t, "calibration.xi0_times");
    rc.calib.seed = rc.seed;
    if (const json* mk = find(raw, "market")) rc.market_path = mk->get<std::string>();
    rc.calib.engine = rc.engine();
    return rc;
}

json read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParameterError("config: cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParameterError("config: " + path + ": " + e.what());
    }
}

}  // namespace gpv::cli
