#include "gpvol/market.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "gpvol/errors.hpp"

namespace gpv {

const char* instrument_name(Instrument i) {
    switch (i) {
        case Instrument::SpxOption: return "SPX_OPT";
        case Instrument::VixOption: return "VIX_OPT";
        case Instrument::VixFuture: return "VIX_FUT";
    }
    return "?";
}

std::vector<double> MarketSurface::maturities(Instrument i) const {
    std::vector<double> t;
    for (const auto& q : quotes)
        if (q.instrument == i) t.push_back(q.T);
    std::sort(t.begin(), t.end());
    t.erase(std::unique(t.begin(), t.end()), t.end());
    return t;
}

namespace {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        cell.erase(0, cell.find_first_not_of(" \t\r"));
        cell.erase(cell.find_last_not_of(" \t\r") + 1);
        out.push_back(cell);
    }
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double number(const std::string& s, int line, const char* col) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw SchemaError("market csv line " + std::to_string(line) + ": bad " + col + " '" + s + "'");
    }
}

}  // namespace

MarketSurface read_market_csv(std::istream& in) {
    MarketSurface s;
    std::string line;
    int lineno = 0;
    bool header = false;
    bool have_spot = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        const auto cells = split(line);
        if (!header) {
            const std::vector<std::string> want{"instrument", "maturity_years", "strike", "bid", "ask", "mid", "spot"};
            if (cells != want) throw SchemaError("market csv line " + std::to_string(lineno) + ": unexpected header");
            header = true;
            continue;
        }
        if (cells.size() != 7)
            throw SchemaError("market csv line " + std::to_string(lineno) + ": expected 7 columns, got " +
                              std::to_string(cells.size()));
        Quote q;
        if (cells[0] == "SPX_OPT") q.instrument = Instrument::SpxOption;
        else if (cells[0] == "VIX_OPT") q.instrument = Instrument::VixOption;
        else if (cells[0] == "VIX_FUT") q.instrument = Instrument::VixFuture;
        else throw SchemaError("market csv line " + std::to_string(lineno) + ": unknown instrument '" + cells[0] + "'");
        q.T = number(cells[1], lineno, "maturity_years");
        if (q.instrument != Instrument::VixFuture) q.K = number(cells[2], lineno, "strike");
        q.bid = number(cells[3], lineno, "bid");
        q.ask = number(cells[4], lineno, "ask");
        q.mid = cells[5].empty() ? 0.5 * (q.bid + q.ask) : number(cells[5], lineno, "mid");
        const double spot = number(cells[6], lineno, "spot");
        if (!(q.T > 0.0)) throw SchemaError("market csv line " + std::to_string(lineno) + ": maturity must be > 0");
        if (q.instrument != Instrument::VixFuture && !(q.K > 0.0))
            throw SchemaError("market csv line " + std::to_string(lineno) + ": strike must be > 0");
        if (q.bid > q.ask) throw SchemaError("market csv line " + std::to_string(lineno) + ": bid above ask");
        if (!(spot > 0.0)) throw SchemaError("market csv line " + std::to_string(lineno) + ": spot must be > 0");
        if (have_spot && spot != s.spot)
            throw SchemaError("market csv line " + std::to_string(lineno) + ": inconsistent spot");
        s.spot = spot;
        have_spot = true;
        s.quotes.push_back(q);
    }
    if (!header) throw SchemaError("market csv: missing header");
    if (s.quotes.empty()) throw SchemaError("market csv: no quotes");
    return s;
}

MarketSurface read_market_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open market file " + path);
    return read_market_csv(in);
}

void write_market_csv(std::ostream& os, const MarketSurface& s) {
    os << "instrument,maturity_years,strike,bid,ask,mid,spot\n";
    os.precision(12);
    for (const auto& q : s.quotes) {
        os << instrument_name(q.instrument) << ',' << q.T << ',';
        if (q.instrument != Instrument::VixFuture) os << q.K;
        os << ',' << q.bid << ',' << q.ask << ',' << q.mid << ',' << s.spot << '\n';
    }
}

MarketSurface filter_quotes(const MarketSurface& s, double max_rel_spread, FilterStats* stats) {
    MarketSurface out = s;
    out.quotes.clear();
    FilterStats st;
    for (const auto& q : s.quotes) {
        if (q.instrument != Instrument::VixFuture && q.bid <= 0.0) {
            ++st.dropped_zero_bid;
            continue;
        }
        if (q.mid > 0.0 && (q.ask - q.bid) / q.mid > max_rel_spread) {
            ++st.dropped_wide;
            continue;
        }
        out.quotes.push_back(q);
    }
    if (stats) *stats = st;
    return out;
}

VarianceStrip strip_forward_variance(const MarketSurface& s, int min_otm) {
    VarianceStrip out;
    std::map<double, std::vector<std::pair<double, double>>> chains;  // T -> (K, call mid)
    for (const auto& q : s.quotes)
        if (q.instrument == Instrument::SpxOption) chains[q.T].emplace_back(q.K, q.mid);
    const double F = s.spot;
    for (auto& [T, chain] : chains) {
        std::sort(chain.begin(), chain.end());
        chain.erase(std::unique(chain.begin(), chain.end(),
                                [](const auto& a, const auto& b) { return a.first == b.first; }),
                    chain.end());
        const std::size_t n = chain.size();
        int below = 0, above = 0;
        for (const auto& c : chain) (c.first <= F ? below : above)++;
        if (static_cast<int>(n) < min_otm || below == 0 || above == 0) {
            out.diagnostics.push_back("maturity " + std::to_string(T) + ": skipped, " + std::to_string(n) +
                                      " strikes do not span the forward with " + std::to_string(min_otm) +
                                      " OTM quotes");
            continue;
        }
        // K0: first strike at or below the forward
        std::size_t i0 = 0;
        for (std::size_t i = 0; i < n; ++i)
            if (chain[i].first <= F) i0 = i;
        const double K0 = chain[i0].first;
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double K = chain[i].first;
            const double dK = i == 0 ? chain[1].first - K
                              : i + 1 == n ? K - chain[i - 1].first
                                           : 0.5 * (chain[i + 1].first - chain[i - 1].first);
            const double call = chain[i].second;
            const double put = call - (F - K);
            double Q;
            if (i < i0) Q = put;
            else if (i > i0) Q = call;
            else Q = 0.5 * (call + put);
            sum += dK / (K * K) * Q;
        }
        const double w = 2.0 * sum - (F / K0 - 1.0) * (F / K0 - 1.0);
        out.maturities.push_back(T);
        out.total_variance.push_back(std::max(w, 0.0));
    }
    double prev_t = 0.0, prev_w = 0.0;
    for (std::size_t i = 0; i < out.maturities.size(); ++i) {
        const double t = out.maturities[i], w = out.total_variance[i];
        double fv = (w - prev_w) / (t - prev_t);
        if (fv < 0.0) {
            out.diagnostics.push_back("maturity " + std::to_string(t) + ": negative forward variance clipped to 0");
            fv = 0.0;
        }
        out.times.push_back(0.5 * (prev_t + t));
        out.forward_var.push_back(fv);
        prev_t = t;
        prev_w = w;
    }
    return out;
}

ForwardVarianceCurve build_xi0(const VarianceStrip& strip) {
    if (strip.times.empty()) throw DegenerateInputError("build_xi0: empty variance strip");
    return ForwardVarianceCurve::spline(strip.times, strip.forward_var);
}

}  // namespace gpv
