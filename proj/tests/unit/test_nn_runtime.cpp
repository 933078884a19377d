#include <catch_amalgamated.hpp>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "gpvol/errors.hpp"
#include "gpvol/nn_runtime.hpp"

using namespace gpv;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;
using nlohmann::json;

namespace {

json read_fixture(const std::string& name) {
    std::ifstream in(std::string(GPVOL_TEST_DATA) + "/" + name);
    REQUIRE(in);
    return json::parse(in);
}

const ModelParams kModel{KernelSpec::fractional(0.1), PolyCoeffs({0.01, 1.0, 0.214, 0.227}), -0.7};
constexpr double kT = 0.25;

SpxPaths small_paths() {
    ProductQuantizer pq(kT, {2, 2});
    return quantize_X(kModel.kernel, pq, 2);
}

void expect_schema_error(json doc, const std::string& needle) {
    CHECK_THROWS_WITH(parse_weights(doc.dump()), ContainsSubstring(needle));
    CHECK_THROWS_AS(parse_weights(doc.dump()), SchemaError);
}

}  // namespace

TEST_CASE("forward pass matches the numpy reference") {
    const json doc = read_fixture("nn_golden.json");
    const auto w = parse_weights(doc.dump());
    CHECK(w.N == 4);
    CHECK(w.n_T == 2);
    CHECK(w.nn1.layers.size() == 4);
    const auto& chk = doc["check"];
    const auto in = normalize_input(network_input(kModel, kT, w.param_names), w.bounds);
    CHECK_FALSE(in.clamped);
    const auto xn = chk["normalized"].get<std::vector<double>>();
    for (std::size_t i = 0; i < xn.size(); ++i) CHECK_THAT(in.x[i], WithinAbs(xn[i], 1e-12));
    for (const char* n : {"nn1", "nn2", "nn3"}) {
        const auto& net = std::string(n) == "nn1" ? w.nn1 : std::string(n) == "nn2" ? w.nn2 : w.nn3;
        const auto ref = chk[n].get<std::vector<double>>();
        const Eigen::VectorXd out = net.forward(in.x);
        REQUIRE(out.size() == static_cast<Eigen::Index>(ref.size()));
        for (std::size_t i = 0; i < ref.size(); ++i) CHECK_THAT(out[i], WithinAbs(ref[i], 1e-6));
    }

    const auto paths = small_paths();
    const auto cor = apply_corrections(paths, w, kModel, kT);
    const auto d1 = chk["nn1"].get<std::vector<double>>();
    const auto d2 = chk["nn2"].get<std::vector<double>>();
    const auto d3 = chk["nn3"].get<std::vector<double>>();
    double z = 0.0;
    for (int j = 0; j < 4; ++j) z += std::exp(std::log(0.25) + d3[j]) / 1.0;
    for (int j = 0; j < 4; ++j) {
        for (int i = 0; i < 2; ++i) {
            CHECK_THAT(cor.x(j, i), WithinAbs(paths.x(j, i) + d1[j * 2 + i], 1e-12));
            CHECK_THAT(cor.dw(j, i), WithinAbs(paths.dw(j, i) + d2[j * 2 + i], 1e-12));
        }
        CHECK_THAT(cor.p[j], WithinAbs(0.25 * std::exp(d3[j]) / z, 1e-12));
    }
}

TEST_CASE("zero weights reduce to plain quantization") {
    const auto w = parse_weights(read_fixture("nn_zero.json").dump());
    const auto paths = small_paths();
    SpxConfig cfg;
    cfg.N = 4;
    cfg.n_t = 2;
    const auto xi0 = ForwardVarianceCurve::flat(0.04);
    const auto plain = spx_from_paths(kModel, xi0, paths, cfg);
    for (double K : {90.0, 100.0, 110.0})
        CHECK_THAT(price_call_nn(kModel, xi0, kT, 100, K, w, paths, cfg),
                   WithinAbs(price_call_quantized(plain, kModel.rho, 100, kT, K), 1e-12));
}

TEST_CASE("input normalisation and softmax") {
    const auto r = normalize_input({0.0, 5.0, 10.0, 12.0}, {{0, 10}, {0, 10}, {0, 10}, {0, 10}});
    CHECK(r.x[0] == -1.0);
    CHECK(r.x[1] == 0.0);
    CHECK(r.x[2] == 1.0);
    CHECK(r.x[3] == 1.0);
    CHECK(r.clamped);
    CHECK_THROWS_AS(normalize_input({1.0}, {}), ParameterError);

    Eigen::VectorXd z(3);
    z << 1000.0, 1000.0, 0.0;
    const auto s = softmax(z);
    CHECK_THAT(s.sum(), WithinAbs(1.0, 1e-15));
    CHECK_THAT(s[0], WithinAbs(0.5, 1e-15));
    CHECK(s[2] >= 0.0);

    ModelParams m = kModel;
    m.kernel = KernelSpec::log_modulated(0.1, 1.0, 2.0);
    const auto v = network_input(m, 0.3, {"T", "beta", "rho"});
    CHECK(v == std::vector<double>{0.3, 2.0, -0.7});
    CHECK_THROWS_AS(network_input(m, 0.3, {"gamma"}), SchemaError);
}

TEST_CASE("schema errors name the offending field") {
    const json good = read_fixture("nn_golden.json");
    {
        json d = good;
        d["meta"].erase("N");
        expect_schema_error(d, "missing field 'N'");
    }
    {
        json d = good;
        d["nn2"][1]["weights"].erase(0);
        expect_schema_error(d, "nn2 layer 1");
    }
    {
        json d = good;
        d["nn3"][0]["bias"].push_back(0.0);
        expect_schema_error(d, "nn3 layer 0");
    }
    {
        json d = good;
        d["nn1"][3]["activation"] = "tanh";
        expect_schema_error(d, "nn1 layer 3: activation");
    }
    {
        json d = good;
        d["meta"]["N"] = 5;
        expect_schema_error(d, "nn1 layer 3: output size");
    }
    {
        json d = good;
        d["meta"]["bounds"][0] = json::array({1.0, 0.0});
        expect_schema_error(d, "meta.bounds");
    }
    {
        json d = good;
        d.erase("nn3");
        expect_schema_error(d, "missing field 'nn3'");
    }
    CHECK_THROWS_AS(parse_weights("{not json"), SchemaError);
    CHECK_THROWS_AS(load_weights("/nonexistent/weights.json"), SchemaError);

    const auto w = parse_weights(good.dump());
    ProductQuantizer pq(kT, {3, 2});
    const auto wrong = quantize_X(kModel.kernel, pq, 2);
    CHECK_THROWS_AS(apply_corrections(wrong, w, kModel, kT), ParameterError);
}
