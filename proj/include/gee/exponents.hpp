#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace gee {

/// Worst-case chi-square functional over the TV-eps shell around uniform:
/// 1 + 4 eps^2 below 0.5, 1 + eps / (1 - eps) from 0.5 on.
double kappa_bar(double eps);

/// False-alarm exponent on the region boundary,
/// sup_{theta >= 0} theta tau - (e^{2 theta} - 1 - 2 theta) / 2
///   = ((1 + tau) ln(1 + tau) - tau) / 2.
double jf_star(double tau);

/// Missed-detection exponent on the region boundary for tau in
/// [0, kappa_bar(eps) - 1]:
///   (kappa_bar - 1 - tau + (1 + tau) ln((1 + tau) / kappa_bar)) / 2.
double jm_star(double tau, double eps);

/// Rate of P_q{S* <= E_p[S*] + tau n^2/m} for an alternative sequence with
/// chi-square functional kappa; evaluates the supremum objective at its
/// stationary point theta = max(0, ln(kappa / (1 + tau)) / 2).
double rate_function(double tau, double kappa);

/// Threshold at which jf_star = jm_star: (kappa_bar - 1) / ln(kappa_bar) - 1.
double equalizing_tau(double eps);

struct ExponentPoint {
  double tau = 0.0;
  double jf = 0.0;
  double jm = 0.0;
  double eps = 0.0;
  double kappa_bar = 0.0;
};

/// Boundary point at tau; tau outside [0, kappa_bar - 1] is clamped with a
/// warning.
ExponentPoint exponent_point(double eps, double tau);

/// npoints boundary points with tau evenly spaced on [0, kappa_bar - 1].
std::vector<ExponentPoint> region_curve(double eps, std::size_t npoints);

struct SlopeSample {
  double r = 0.0;      // n^2 / m
  double p_hat = 0.0;  // estimated error probability
};

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
};

/// Least-squares fit of -ln(p_hat) against r; the slope is the empirical
/// generalized error exponent.
SlopeFit estimate_exponent(std::span<const SlopeSample> rows);

}  // namespace gee
