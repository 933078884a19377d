#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "gpvol/curve.hpp"

namespace gpv {

enum class Instrument { SpxOption, VixOption, VixFuture };

const char* instrument_name(Instrument i);

/// Options are calls; futures carry no strike.
struct Quote {
    Instrument instrument = Instrument::SpxOption;
    double T = 0.0;
    double K = 0.0;
    double bid = 0.0, ask = 0.0, mid = 0.0;
};

struct MarketSurface {
    std::vector<Quote> quotes;
    double spot = 0.0;
    std::string as_of;

    std::vector<double> maturities(Instrument i) const;
};

/// Header `instrument,maturity_years,strike,bid,ask,mid,spot`. Throws SchemaError with the line number.
MarketSurface read_market_csv(std::istream& in);
MarketSurface read_market_csv_file(const std::string& path);
void write_market_csv(std::ostream& os, const MarketSurface& s);

struct FilterStats {
    int dropped_zero_bid = 0;
    int dropped_wide = 0;
};

/// Drops quotes with bid = 0 or (ask - bid)/mid above max_rel_spread (futures exempt from the bid rule).
MarketSurface filter_quotes(const MarketSurface& s, double max_rel_spread = 1.0, FilterStats* stats = nullptr);

struct VarianceStrip {
    std::vector<double> maturities;      // kept maturities
    std::vector<double> total_variance;  // sigma^2 T from the log-contract
    std::vector<double> times;           // interval midpoints
    std::vector<double> forward_var;     // piecewise forward variance per interval
    std::vector<std::string> diagnostics;
};

/// Static replication of the log contract from OTM options (calls above the forward,
/// puts by parity below), discretised VIX-style, then differenced across maturities.
VarianceStrip strip_forward_variance(const MarketSurface& s, int min_otm = 4);

/// Natural cubic spline through sqrt of the strip.
ForwardVarianceCurve build_xi0(const VarianceStrip& strip);

}  // namespace gpv
