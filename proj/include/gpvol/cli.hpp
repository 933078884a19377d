#pragma once

#include <cstdint>
#include <json.hpp>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gpvol/calibrator.hpp"
#include "gpvol/curve.hpp"
#include "gpvol/mc_oracle.hpp"
#include "gpvol/model.hpp"
#include "gpvol/nn_runtime.hpp"
#include "gpvol/spx_engine.hpp"
#include "gpvol/vix_engine.hpp"

namespace gpv::cli {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode { kOk = 0, kFailure = 1, kConfigError = 2, kNumericError = 3 };

/// Parsed run configuration. `raw` is the effective JSON after flag overrides.
struct RunConfig {
    nlohmann::json raw = nlohmann::json::object();
    std::optional<KernelSpec> kernel;
    std::optional<PolyCoeffs> poly;
    double rho = 0.0;
    std::optional<ForwardVarianceCurve> xi0;
    double spot = 100.0;
    std::vector<double> maturities, strikes;
    long N_vix = 200;
    long N_spx = 10000;
    VixConfig vix;
    SpxConfig spx;
    McConfig mc;
    std::shared_ptr<const MlpWeights> nn;
    std::uint64_t seed = 42;
    CalibConfig calib;
    std::string market_path;

    ModelParams model() const;  // needs kernel and alpha
    const ForwardVarianceCurve& curve() const;
    EngineConfig engine() const;
};

/// 64-bit FNV-1a.
std::uint64_t fnv1a(const std::string& s);
std::string config_hash(const nlohmann::json& raw);
/// "# gpvol <version> config_hash=<hex>"
std::string header_line(const nlohmann::json& raw);

/// Sets a dotted path ("kernel.H") to a value; numbers, booleans, arrays and objects are
/// parsed as JSON, anything else is stored as a string.
void set_path(nlohmann::json& j, const std::string& dotted, const std::string& value);

/// Throws ParameterError naming the field on missing or malformed entries.
RunConfig parse_config(const nlohmann::json& raw);
nlohmann::json read_config_file(const std::string& path);

KernelSpec parse_kernel(const nlohmann::json& j);
ForwardVarianceCurve parse_xi0(const nlohmann::json& j);

/// Full command-line entry; returns the process exit code.
int run(int argc, char** argv);

}  // namespace gpv::cli
