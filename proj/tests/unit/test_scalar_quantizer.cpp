#include <catch_amalgamated.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <numeric>

#include "gpvol/errors.hpp"
#include "gpvol/scalar_quantizer.hpp"
#include "oracles.hpp"

using namespace gpv;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

double Phi(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }
double phi(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * oracle::kPi); }

}  // namespace

TEST_CASE("small quantizers") {
    const auto q1 = optimal_scalar_quantizer(1);
    CHECK(q1->points == std::vector<double>{0.0});
    CHECK(q1->probs == std::vector<double>{1.0});
    CHECK_THAT(q1->distortion, WithinAbs(1.0, 1e-15));

    // cells split at 0, so y = E[Y | Y > 0] = phi(0) / (1/2)
    const double y = phi(0.0) / 0.5;
    const auto q2 = optimal_scalar_quantizer(2);
    CHECK_THAT(q2->points[1], WithinAbs(y, 1e-12));
    CHECK_THAT(q2->points[0], WithinAbs(-std::sqrt(2.0 / oracle::kPi), 1e-12));
    CHECK_THAT(q2->probs[0], WithinAbs(0.5, 1e-14));
    CHECK_THAT(q2->distortion, WithinAbs(1.0 - 2.0 / oracle::kPi, 1e-12));
}

TEST_CASE("stationarity, symmetry, normalisation") {
    for (int N = 1; N <= 200; ++N) {
        const auto q = optimal_scalar_quantizer(N);
        REQUIRE(static_cast<int>(q->points.size()) == N);
        // independent cell means
        double worst = 0.0, mean = 0.0, psum = 0.0;
        for (int i = 0; i < N; ++i) {
            const double lo = i == 0 ? -INFINITY : 0.5 * (q->points[i - 1] + q->points[i]);
            const double hi = i + 1 == N ? INFINITY : 0.5 * (q->points[i] + q->points[i + 1]);
            const double pr = Phi(hi) - Phi(lo);
            const double cm = (phi(lo) - phi(hi)) / pr;
            worst = std::max(worst, std::abs(cm - q->points[i]));
            CHECK_THAT(q->probs[i], WithinAbs(pr, 1e-12));
            CHECK(q->probs[i] > 0.0);
            mean += q->probs[i] * q->points[i];
            psum += q->probs[i];
            CHECK_THAT(q->points[i], WithinAbs(-q->points[N - 1 - i], 1e-8));
        }
        INFO("N=" << N);
        CHECK(worst < 1e-8);
        CHECK_THAT(mean, WithinAbs(0.0, 1e-10));
        CHECK_THAT(psum, WithinAbs(1.0, 1e-12));
        if (N > 1) CHECK(q->distortion < optimal_scalar_quantizer(N - 1)->distortion);
    }
}

TEST_CASE("large quantizers converge") {
    const auto q = compute_scalar_quantizer(1500);
    CHECK(q.stationarity_residual() < 1e-10);
    // Zador asymptotics: N^2 D(N) -> sqrt(3) pi / 2
    CHECK_THAT(1500.0 * 1500.0 * q.distortion, WithinRel(std::sqrt(3.0) * oracle::kPi / 2.0, 5e-3));
}

TEST_CASE("bounds") {
    CHECK_THROWS_AS(optimal_scalar_quantizer(0), ParameterError);
    CHECK_THROWS_AS(optimal_scalar_quantizer(kMaxScalarQuantizer + 1), ParameterError);
}

TEST_CASE("disk cache round trip") {
    namespace fs = std::filesystem;
    const auto dir = fs::temp_directory_path() / "gpvol_sq_cache_test";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const auto old = quantizer_cache_dir();
    set_quantizer_cache_dir(dir.string());
    const auto q = optimal_scalar_quantizer(1234);
    set_quantizer_cache_dir(old);
    const auto file = dir / "scalar_1234.json";
    REQUIRE(fs::exists(file));
    std::ifstream in(file);
    const auto j = nlohmann::json::parse(in);
    CHECK(j.at("N").get<int>() == 1234);
    CHECK(j.at("points").get<std::vector<double>>() == q->points);
    CHECK(j.at("probs").get<std::vector<double>>() == q->probs);
    fs::remove_all(dir);
}
