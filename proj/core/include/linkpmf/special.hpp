#pragma once

namespace linkpmf {

/// Digamma function for x > 0. Recurrence up to x >= 10, then the asymptotic
/// series; absolute error below 1e-13 on (0, inf).
double digamma(double x);

/// log(e^psi - 1) without cancellation. Throws Error for psi <= 0.
double log_expm1(double psi);

/// Mean of the zero-truncated Poisson, theta / (1 - e^-theta). Uses the series
/// 1 + theta/2 + theta^2/12 below 1e-6 so theta -> 0 stays finite.
double ztp_mean(double theta);

}  // namespace linkpmf
