#include "gee/exponents.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gee/error.hpp"

namespace gee {

namespace {

// Slack for tau sitting on the end of its range after floating-point arithmetic.
constexpr double kTauSlack = 1e-12;

void require_eps(double eps) {
  if (!(eps > 0.0 && eps < 1.0)) {
    std::ostringstream os;
    os << "eps must lie in (0, 1), got " << eps;
    throw Error(ErrorKind::InvalidEps, os.str());
  }
}

}  // namespace

double kappa_bar(double eps) {
  require_eps(eps);
  return eps < 0.5 ? 1.0 + 4.0 * eps * eps : 1.0 + eps / (1.0 - eps);
}

double jf_star(double tau) {
  if (!(tau >= 0.0)) throw Error(ErrorKind::InvalidThreshold, "tau must be non-negative");
  return 0.5 * ((1.0 + tau) * std::log1p(tau) - tau);
}

double jm_star(double tau, double eps) {
  const double kb = kappa_bar(eps);
  if (!(tau >= -kTauSlack && tau <= kb - 1.0 + kTauSlack)) {
    std::ostringstream os;
    os << "tau = " << tau << " outside [0, " << kb - 1.0 << "]";
    throw Error(ErrorKind::InvalidThreshold, os.str());
  }
  tau = std::clamp(tau, 0.0, kb - 1.0);
  return std::max(0.0, 0.5 * (kb - 1.0 - tau + (1.0 + tau) * std::log((1.0 + tau) / kb)));
}

double rate_function(double tau, double kappa) {
  if (!(kappa >= 1.0)) throw Error(ErrorKind::InvalidKappa, "kappa must be at least 1");
  if (!(tau >= 0.0)) throw Error(ErrorKind::InvalidThreshold, "tau must be non-negative");
  const double theta = std::max(0.0, 0.5 * std::log(kappa / (1.0 + tau)));
  return theta * (-1.0 - tau) - 0.5 * std::expm1(-2.0 * theta) * kappa;
}

double equalizing_tau(double eps) {
  const double kb = kappa_bar(eps);
  return (kb - 1.0) / std::log(kb) - 1.0;
}

ExponentPoint exponent_point(double eps, double tau) {
  const double kb = kappa_bar(eps);
  const double hi = kb - 1.0;
  if (tau < -kTauSlack || tau > hi + kTauSlack) {
    std::ostringstream os;
    os << "tau = " << tau << " clamped to [0, " << hi << "]";
    warn(os.str());
  }
  tau = std::clamp(tau, 0.0, hi);
  return {tau, jf_star(tau), jm_star(tau, eps), eps, kb};
}

std::vector<ExponentPoint> region_curve(double eps, std::size_t npoints) {
  if (npoints < 2) throw Error(ErrorKind::InvalidInput, "region curve needs at least 2 points");
  const double hi = kappa_bar(eps) - 1.0;
  std::vector<ExponentPoint> points;
  points.reserve(npoints);
  for (std::size_t i = 0; i < npoints; ++i) {
    // Pin the last point exactly on the end of the range.
    const double tau = i + 1 == npoints
                           ? hi
                           : hi * static_cast<double>(i) / static_cast<double>(npoints - 1);
    points.push_back(exponent_point(eps, tau));
  }
  return points;
}

SlopeFit estimate_exponent(std::span<const SlopeSample> rows) {
  if (rows.size() < 2) throw Error(ErrorKind::InvalidInput, "slope fit needs at least 2 rows");
  double sx = 0.0, sy = 0.0;
  for (const auto& row : rows) {
    if (!(row.p_hat > 0.0)) {
      throw Error(ErrorKind::CannotTakeLog, "p_hat = 0 at r = " + std::to_string(row.r));
    }
    sx += row.r;
    sy += -std::log(row.p_hat);
  }
  const double count = static_cast<double>(rows.size());
  const double mx = sx / count;
  const double my = sy / count;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& row : rows) {
    const double dx = row.r - mx;
    sxx += dx * dx;
    sxy += dx * (-std::log(row.p_hat) - my);
  }
  if (sxx == 0.0) throw Error(ErrorKind::InvalidInput, "slope fit needs at least two distinct r");
  const double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

}  // namespace gee
