#pragma once

namespace brwldp::normal {

// Standard normal cdf, survival function and quantile.
//
// cdf/sf go through std::erfc, whose relative error is a few ulp over the
// whole line, so the absolute error of any interval mass is below 1e-15.
// quantile starts from Acklam's rational approximation (|rel err| < 1.2e-9)
// and applies one Halley step against erfc, which brings the absolute error
// under 1e-15 on (1e-300, 1 - 1e-16).
inline constexpr double kMaxAbsError = 1e-15;

double pdf(double x);
double cdf(double x);
double sf(double x);
double log_sf(double x);
double quantile(double p);

/// Φ(hi) − Φ(lo), evaluated on whichever tail keeps the difference accurate.
double interval_mass(double lo, double hi);

}  // namespace brwldp::normal
