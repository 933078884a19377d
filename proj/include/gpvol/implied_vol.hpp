#pragma once

namespace gpv {

inline constexpr double kMinVol = 1e-6;
inline constexpr double kMaxVol = 5.0;

struct ImpliedVol {
    double vol = 0.0;
    bool capped = false;  // price at or beyond the band edge reachable on [kMinVol, kMaxVol]
};

/// Black implied vol of a call on forward F. Safeguarded Newton with bisection fallback.
/// Throws BandError when price lies outside ((F-K)^+, F).
ImpliedVol implied_vol(double price, double F, double K, double T);

}  // namespace gpv
