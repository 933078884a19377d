#include "gpvol/nn_runtime.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "gpvol/errors.hpp"

namespace gpv {

using nlohmann::json;

Eigen::VectorXd Mlp::forward(const Eigen::VectorXd& x) const {
    Eigen::VectorXd h = x;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        h = layers[i].W * h + layers[i].b;
        if (i + 1 < layers.size()) h = h.array().tanh().matrix();
    }
    return h;
}

namespace {

const json& field(const json& j, const char* name, const std::string& where) {
    if (!j.is_object() || !j.contains(name)) throw SchemaError(where + ": missing field '" + name + "'");
    return j.at(name);
}

Mlp parse_net(const json& root, const char* name) {
    const json& arr = field(root, name, "weights");
    if (!arr.is_array() || arr.empty()) throw SchemaError(std::string(name) + ": expected a non-empty layer list");
    Mlp net;
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string where = std::string(name) + " layer " + std::to_string(i);
        const json& l = arr[i];
        const int rows = field(l, "rows", where).get<int>();
        const int cols = field(l, "cols", where).get<int>();
        const auto w = field(l, "weights", where).get<std::vector<double>>();
        const auto b = field(l, "bias", where).get<std::vector<double>>();
        if (rows < 1 || cols < 1) throw SchemaError(where + ": rows and cols must be positive");
        if (w.size() != static_cast<std::size_t>(rows) * cols)
            throw SchemaError(where + ": weights has " + std::to_string(w.size()) + " entries, expected rows*cols");
        if (b.size() != static_cast<std::size_t>(rows)) throw SchemaError(where + ": bias length must equal rows");
        if (l.contains("activation")) {
            const auto act = l.at("activation").get<std::string>();
            const char* want = i + 1 < arr.size() ? "tanh" : "identity";
            if (act != want) throw SchemaError(where + ": activation must be '" + want + "', got '" + act + "'");
        }
        DenseLayer d;
        d.W.resize(rows, cols);
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c) d.W(r, c) = w[static_cast<std::size_t>(r) * cols + c];
        d.b = Eigen::Map<const Eigen::VectorXd>(b.data(), rows);
        if (!net.layers.empty() && net.layers.back().W.rows() != cols)
            throw SchemaError(where + ": input size " + std::to_string(cols) + " does not match previous output " +
                              std::to_string(net.layers.back().W.rows()));
        net.layers.push_back(std::move(d));
    }
    return net;
}

void check_net(const Mlp& net, const char* name, int in, int out, const std::vector<int>& hidden) {
    if (net.input_dim() != in)
        throw SchemaError(std::string(name) + " layer 0: input size must equal n_theta=" + std::to_string(in));
    if (net.output_dim() != out)
        throw SchemaError(std::string(name) + " layer " + std::to_string(net.layers.size() - 1) +
                          ": output size must be " + std::to_string(out));
    if (!hidden.empty()) {
        if (net.layers.size() != hidden.size() + 1)
            throw SchemaError(std::string(name) + ": layer count does not match meta.hidden");
        for (std::size_t i = 0; i < hidden.size(); ++i)
            if (net.layers[i].W.rows() != hidden[i])
                throw SchemaError(std::string(name) + " layer " + std::to_string(i) + ": width differs from meta.hidden");
    }
}

}  // namespace

MlpWeights parse_weights(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::exception& e) {
        throw SchemaError(std::string("weights: invalid JSON: ") + e.what());
    }
    MlpWeights w;
    try {
        const json& meta = field(root, "meta", "weights");
        w.N = field(meta, "N", "meta").get<int>();
        w.n_T = field(meta, "n_T", "meta").get<int>();
        w.n_theta = field(meta, "n_theta", "meta").get<int>();
        w.hidden = meta.contains("hidden") ? meta.at("hidden").get<std::vector<int>>() : std::vector<int>{30, 30, 30};
        for (const auto& b : field(meta, "bounds", "meta")) {
            if (!b.is_array() || b.size() != 2) throw SchemaError("meta.bounds: each entry must be [min, max]");
            w.bounds.emplace_back(b[0].get<double>(), b[1].get<double>());
        }
        w.param_names = field(meta, "param_names", "meta").get<std::vector<std::string>>();
        w.kernel = meta.value("kernel", std::string());
        w.nn1 = parse_net(root, "nn1");
        w.nn2 = parse_net(root, "nn2");
        w.nn3 = parse_net(root, "nn3");
    } catch (const json::exception& e) {
        throw SchemaError(std::string("weights: ") + e.what());
    }
    if (w.N < 1 || w.n_T < 1 || w.n_theta < 1) throw SchemaError("meta: N, n_T, n_theta must be positive");
    if (static_cast<int>(w.bounds.size()) != w.n_theta) throw SchemaError("meta.bounds: length must equal n_theta");
    if (static_cast<int>(w.param_names.size()) != w.n_theta)
        throw SchemaError("meta.param_names: length must equal n_theta");
    for (const auto& b : w.bounds)
        if (!(b.second > b.first)) throw SchemaError("meta.bounds: need min < max");
    check_net(w.nn1, "nn1", w.n_theta, w.N * w.n_T, w.hidden);
    check_net(w.nn2, "nn2", w.n_theta, w.N * w.n_T, w.hidden);
    check_net(w.nn3, "nn3", w.n_theta, w.N, w.hidden);
    return w;
}

MlpWeights load_weights(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("weights: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_weights(ss.str());
}

NormalizedInput normalize_input(const std::vector<double>& raw, const std::vector<std::pair<double, double>>& bounds) {
    if (raw.size() != bounds.size()) throw ParameterError("normalize_input: size mismatch");
    NormalizedInput r;
    r.x.resize(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const auto [lo, hi] = bounds[i];
        double v = 2.0 * (raw[i] - lo) / (hi - lo) - 1.0;
        if (v < -1.0 || v > 1.0) {
            v = std::clamp(v, -1.0, 1.0);
            r.clamped = true;
        }
        r.x[i] = v;
    }
    return r;
}

std::vector<double> network_input(const ModelParams& m, double T, const std::vector<std::string>& names) {
    std::vector<double> v;
    for (const auto& n : names) {
        if (n == "alpha0") v.push_back(m.poly.alpha[0]);
        else if (n == "alpha1") v.push_back(m.poly.alpha[1]);
        else if (n == "alpha3") v.push_back(m.poly.alpha[2]);
        else if (n == "alpha5") v.push_back(m.poly.alpha[3]);
        else if (n == "rho") v.push_back(m.rho);
        else if (n == "H") v.push_back(m.kernel.H);
        else if (n == "beta") v.push_back(m.kernel.beta);
        else if (n == "T") v.push_back(T);
        else throw SchemaError("meta.param_names: unknown parameter '" + n + "'");
    }
    return v;
}

Eigen::VectorXd softmax(const Eigen::VectorXd& z) {
    const double mx = z.maxCoeff();
    Eigen::VectorXd e = (z.array() - mx).exp().matrix();
    return e / e.sum();
}

SpxPaths apply_corrections(const SpxPaths& paths, const MlpWeights& w, const ModelParams& m, double T, bool* clamped) {
    if (paths.x.rows() != w.N || paths.x.cols() != w.n_T || paths.dw.rows() != w.N || paths.dw.cols() != w.n_T ||
        static_cast<int>(paths.p.size()) != w.N)
        throw ParameterError("apply_corrections: path shape does not match the weight file (N=" + std::to_string(w.N) +
                             ", n_T=" + std::to_string(w.n_T) + ")");
    const auto in = normalize_input(network_input(m, T, w.param_names), w.bounds);
    if (clamped) *clamped = in.clamped;
    const Eigen::VectorXd d1 = w.nn1.forward(in.x);
    const Eigen::VectorXd d2 = w.nn2.forward(in.x);
    const Eigen::VectorXd d3 = w.nn3.forward(in.x);
    SpxPaths out = paths;
    for (int j = 0; j < w.N; ++j)
        for (int i = 0; i < w.n_T; ++i) {
            out.x(j, i) += d1[j * w.n_T + i];
            out.dw(j, i) += d2[j * w.n_T + i];
        }
    const Eigen::VectorXd p = Eigen::Map<const Eigen::VectorXd>(paths.p.data(), w.N);
    const Eigen::VectorXd q = softmax(p + d3);
    out.p.assign(q.data(), q.data() + w.N);
    return out;
}

SpxQuantization quantize_spx_nn(const ModelParams& m, const ForwardVarianceCurve& xi0, double T,
                                const MlpWeights& w, const SpxPaths& paths, const SpxConfig& cfg) {
    return spx_from_paths(m, xi0, apply_corrections(paths, w, m, T), cfg);
}

double price_call_nn(const ModelParams& m, const ForwardVarianceCurve& xi0, double T, double S0, double K,
                     const MlpWeights& w, const SpxPaths& paths, const SpxConfig& cfg) {
    return price_call_quantized(quantize_spx_nn(m, xi0, T, w, paths, cfg), m.rho, S0, T, K);
}

}  // namespace gpv
