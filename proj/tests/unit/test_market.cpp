#include <catch_amalgamated.hpp>
#include <cmath>
#include <sstream>

#include "gpvol/black_scholes.hpp"
#include "gpvol/errors.hpp"
#include "gpvol/market.hpp"

using namespace gpv;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const char* kHeader = "instrument,maturity_years,strike,bid,ask,mid,spot\n";

MarketSurface parse(const std::string& body) {
    std::istringstream in(std::string(kHeader) + body);
    return read_market_csv(in);
}

// Flat-vol call chain, or term structure via total variance w(T).
MarketSurface bs_chain(const std::vector<double>& Ts, double (*w)(double), double kmin = 40, double kmax = 250,
                       double dk = 1) {
    MarketSurface s;
    s.spot = 100;
    for (double T : Ts)
        for (double K = kmin; K <= kmax + 1e-9; K += dk) {
            const double c = bs_call(100, std::sqrt(w(T) / T), T, K);
            s.quotes.push_back({Instrument::SpxOption, T, K, c, c, c});
        }
    return s;
}

double flat_w(double T) { return 0.04 * T; }
// xi0 = 0.02 on [0, 0.25], 0.06 afterwards
double step_w(double T) { return T <= 0.25 ? 0.02 * T : 0.005 + 0.06 * (T - 0.25); }

}  // namespace

TEST_CASE("market CSV parsing") {
    const auto s = parse("SPX_OPT,0.25,100,4.0,4.2,,5000\nVIX_FUT,0.1,,19.9,20.1,20,5000\nVIX_OPT,0.1,20,1.0,1.2,1.1,5000\n");
    REQUIRE(s.quotes.size() == 3);
    CHECK(s.spot == 5000);
    CHECK_THAT(s.quotes[0].mid, WithinAbs(4.1, 1e-12));
    CHECK(s.quotes[1].instrument == Instrument::VixFuture);
    CHECK(s.maturities(Instrument::SpxOption) == std::vector<double>{0.25});

    std::ostringstream os;
    write_market_csv(os, s);
    std::istringstream back(os.str());
    const auto s2 = read_market_csv(back);
    REQUIRE(s2.quotes.size() == 3);
    CHECK(s2.quotes[2].K == 20);
    CHECK(s2.quotes[2].mid == 1.1);
}

TEST_CASE("market CSV errors carry the line number") {
    CHECK_THROWS_WITH(parse("SPX_OPT,0.25,abc,4,4.2,4.1,100\n"), ContainsSubstring("line 2"));
    CHECK_THROWS_WITH(parse("SPX_OPT,0.25,100,4,4.2,4.1,100\nSPX_OPT,0.25,-5,4,4.2,4.1,100\n"),
                      ContainsSubstring("line 3"));
    CHECK_THROWS_AS(parse("SPX_OPT,0.25,100,4,4.2\n"), SchemaError);
    CHECK_THROWS_AS(parse("FOO,0.25,100,4,4.2,4.1,100\n"), SchemaError);
    CHECK_THROWS_AS(parse("SPX_OPT,0,100,4,4.2,4.1,100\n"), SchemaError);
    CHECK_THROWS_AS(parse("SPX_OPT,0.25,100,4.5,4.2,4.3,100\n"), SchemaError);
    CHECK_THROWS_AS(parse("SPX_OPT,0.25,100,4,4.2,4.1,100\nSPX_OPT,0.25,90,4,4.2,4.1,101\n"), SchemaError);
    std::istringstream bad("instrument,T,K\n");
    CHECK_THROWS_AS(read_market_csv(bad), SchemaError);
    CHECK_THROWS_AS(read_market_csv_file("/nonexistent.csv"), SchemaError);
}

TEST_CASE("quote filter") {
    const auto s = parse(
        "SPX_OPT,0.25,100,0,0.2,0.1,100\n"
        "SPX_OPT,0.25,90,1,5,3,100\n"
        "SPX_OPT,0.25,95,4,4.2,4.1,100\n"
        "VIX_FUT,0.1,,0,0,20,100\n");
    FilterStats st;
    const auto f = filter_quotes(s, 1.0, &st);
    CHECK(f.quotes.size() == 2);
    CHECK(st.dropped_zero_bid == 1);
    CHECK(st.dropped_wide == 1);
}

TEST_CASE("variance strip from a Black-Scholes chain") {
    const auto strip = strip_forward_variance(bs_chain({0.1, 0.25, 0.5}, flat_w));
    REQUIRE(strip.maturities.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK_THAT(strip.total_variance[i], WithinRel(0.04 * strip.maturities[i], 0.01));
        CHECK_THAT(strip.forward_var[i], WithinRel(0.04, 0.02));
    }
    const auto xi0 = build_xi0(strip);
    for (double t : {0.01, 0.1, 0.3, 1.0}) CHECK_THAT(xi0(t), WithinRel(0.04, 0.02));

    const auto st2 = strip_forward_variance(bs_chain({0.25, 0.5}, step_w));
    REQUIRE(st2.forward_var.size() == 2);
    CHECK_THAT(st2.forward_var[0], WithinRel(0.02, 0.02));
    CHECK_THAT(st2.forward_var[1], WithinRel(0.06, 0.02));
    CHECK(st2.total_variance[1] > st2.total_variance[0]);
    const auto c2 = build_xi0(st2);
    CHECK_THAT(c2(0.125), WithinRel(0.02, 0.02));
    CHECK_THAT(c2(0.375), WithinRel(0.06, 0.02));
    for (double t = 0.0; t < 1.0; t += 0.01) CHECK(c2(t) > 0.0);
}

TEST_CASE("strip skips thin maturities") {
    MarketSurface s = bs_chain({0.5}, flat_w);
    const double c = bs_call(100, 0.2, 0.25, 100);
    s.quotes.push_back({Instrument::SpxOption, 0.25, 100, c, c, c});
    const auto strip = strip_forward_variance(s);
    CHECK(strip.maturities == std::vector<double>{0.5});
    REQUIRE(strip.diagnostics.size() == 1);
    CHECK_THAT(strip.diagnostics[0], ContainsSubstring("skipped"));

    MarketSurface empty;
    empty.spot = 100;
    CHECK_THROWS_AS(build_xi0(strip_forward_variance(empty)), DegenerateInputError);
}
