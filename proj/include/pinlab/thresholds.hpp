#pragma once

namespace pinlab::thresholds {

// Statistical gates shared by the verification checks. Defined once here and
// referenced by name, never inlined at call sites.
inline constexpr double kSigmaGate = 3.0;       // point estimates: 3 standard errors
inline constexpr double kSigmaGateWide = 4.0;   // two-sided comparisons: 4 standard errors
inline constexpr double kKsGate = 0.05;         // Kolmogorov-Smirnov distance gate
inline constexpr double kR2Gate = 0.9;          // minimal R^2 for exponential-decay fits

// Largest-gap law: accepted window for median(M_n / log n) * mu_hat.
inline constexpr double kGapMedianLo = 0.6;
inline constexpr double kGapMedianHi = 1.67;

// Endpoint decay: fitted rate must be within this factor of mu_hat.
inline constexpr double kRateFactorGate = 2.0;

// Quenched pair covariances are differences of O(1) probabilities computed
// through O(n)-sized log values; replica means below this magnitude are
// double-precision residue, not measurements, and are excluded from decay
// fits (the excluded lags are listed in the report).
inline constexpr double kCovarianceNumericFloor = 1e-11;

}  // namespace pinlab::thresholds
