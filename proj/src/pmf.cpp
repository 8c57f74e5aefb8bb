#include "gee/pmf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include "gee/error.hpp"

namespace gee {

namespace {

constexpr double kSumTolerance = 1e-12;
constexpr double kRenormalizeLimit = 1e-9;

void require_same_size(const Pmf& q, const Pmf& p) {
  if (q.size() != p.size()) {
    std::ostringstream os;
    os << "alphabet sizes differ (" << q.size() << " vs " << p.size() << ")";
    throw Error(ErrorKind::Dimension, os.str());
  }
}

void require_absolutely_continuous(const Pmf& q, const Pmf& p) {
  require_same_size(q, p);
  for (std::size_t j = 0; j < p.size(); ++j) {
    if (p[j] == 0.0 && q[j] > 0.0) {
      throw Error(ErrorKind::AbsoluteContinuity,
                  "q puts mass on symbol " + std::to_string(j) + " outside supp(p)");
    }
  }
}

}  // namespace

Pmf::Pmf(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.size() < 2) {
    throw Error(ErrorKind::InvalidAlphabet, "alphabet size must be at least 2");
  }
  double total = 0.0;
  for (double v : probs_) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw Error(ErrorKind::InvalidPmf, "entries must be finite and non-negative");
    }
    total += v;
  }
  const double drift = std::abs(total - 1.0);
  if (drift > kRenormalizeLimit) {
    std::ostringstream os;
    os << "entries sum to " << total;
    throw Error(ErrorKind::InvalidPmf, os.str());
  }
  if (drift > kSumTolerance) {
    for (double& v : probs_) v /= total;
  }
}

std::size_t Pmf::support_size() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(probs_.begin(), probs_.end(), [](double v) { return v > 0.0; }));
}

bool Pmf::is_uniform() const noexcept {
  const double target = 1.0 / static_cast<double>(probs_.size());
  return std::all_of(probs_.begin(), probs_.end(),
                     [target](double v) { return std::abs(v - target) <= 1e-15; });
}

Pmf uniform(std::size_t m) {
  if (m < 2) throw Error(ErrorKind::InvalidAlphabet, "alphabet size must be at least 2");
  return Pmf(std::vector<double>(m, 1.0 / static_cast<double>(m)));
}

Pmf uniform_on_support(std::size_t m, std::size_t k) {
  if (m < 2) throw Error(ErrorKind::InvalidAlphabet, "alphabet size must be at least 2");
  if (k == 0 || k > m) throw Error(ErrorKind::InvalidInput, "support size must lie in [1, m]");
  std::vector<double> probs(m, 0.0);
  std::fill_n(probs.begin(), k, 1.0 / static_cast<double>(k));
  return Pmf(std::move(probs));
}

Pmf biuniform_worst_case(std::size_t m, double eps) {
  if (m < 2) throw Error(ErrorKind::InvalidAlphabet, "alphabet size must be at least 2");
  if (!(eps > 0.0 && eps < 1.0)) throw Error(ErrorKind::InvalidEps, "eps must lie in (0, 1)");
  const double md = static_cast<double>(m);
  std::vector<double> probs(m);
  if (eps < 0.5) {
    const std::size_t heavy = m / 2;
    const std::size_t light = m - heavy;
    for (std::size_t j = 0; j < m; ++j) {
      probs[j] = j < heavy ? 1.0 / md + eps / static_cast<double>(heavy)
                           : 1.0 / md - eps / static_cast<double>(light);
    }
  } else {
    const auto kept = static_cast<std::size_t>(std::floor(md * (1.0 - eps) + 1e-9));
    if (kept == 0) {
      throw Error(ErrorKind::DegenerateAlternative, "floor(m(1-eps)) = 0 leaves no support");
    }
    for (std::size_t j = 0; j < m; ++j) probs[j] = j < kept ? 1.0 / static_cast<double>(kept) : 0.0;
  }
  return Pmf(std::move(probs));
}

Pmf permuted_worst_case(std::size_t m, double eps, std::span<const std::size_t> subset) {
  if (m < 2) throw Error(ErrorKind::InvalidAlphabet, "alphabet size must be at least 2");
  if (!(eps > 0.0 && eps < 0.5)) throw Error(ErrorKind::InvalidEps, "eps must lie in (0, 0.5)");
  const std::set<std::size_t> chosen(subset.begin(), subset.end());
  if (chosen.size() != subset.size() || chosen.size() != m / 2 ||
      (!chosen.empty() && *chosen.rbegin() >= m)) {
    throw Error(ErrorKind::InvalidSubset, "subset must hold floor(m/2) distinct symbols of [m]");
  }
  const double md = static_cast<double>(m);
  const double up = 1.0 / md + eps / static_cast<double>(m / 2);
  const double down = 1.0 / md - eps / static_cast<double>(m - m / 2);
  std::vector<double> probs(m, down);
  for (std::size_t j : chosen) probs[j] = up;
  return Pmf(std::move(probs));
}

double tv_distance(const Pmf& q, const Pmf& p) {
  require_same_size(q, p);
  double total = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) total += std::abs(q[j] - p[j]);
  return 0.5 * total;
}

double chi_square_functional(const Pmf& q, const Pmf& p) {
  require_absolutely_continuous(q, p);
  double total = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    if (p[j] > 0.0) total += q[j] * q[j] / p[j];
  }
  return total;
}

double likelihood_ratio_bound(const Pmf& q, const Pmf& p) {
  require_absolutely_continuous(q, p);
  double best = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    if (p[j] > 0.0) best = std::max(best, q[j] / p[j]);
  }
  return best;
}

double f_divergence(const Pmf& q, const Pmf& p, const ScalarFunction& f) {
  require_absolutely_continuous(q, p);
  double total = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    if (p[j] == 0.0) continue;
    const double value = f(q[j] / p[j]);
    if (std::isnan(value)) {
      throw Error(ErrorKind::Evaluation, "f returned NaN at x = " + std::to_string(q[j] / p[j]));
    }
    total += p[j] * value;
  }
  return total;
}

FdivCertificate check_fdiv_conditions(const ScalarFunction& f, const FdivGrid& grid) {
  auto eval = [&f](double x) {
    const double v = f(x);
    if (std::isnan(v)) throw Error(ErrorKind::Evaluation, "f returned NaN at x = " + std::to_string(x));
    return v;
  };

  FdivCertificate cert;
  const double at_one = eval(1.0);
  const double slack = 1e-12 * (1.0 + std::abs(at_one));
  for (std::size_t i = 1; i <= grid.cond1_points; ++i) {
    const double x = static_cast<double>(i) / static_cast<double>(grid.cond1_points + 1);
    if (0.5 * (eval(1.0 - x) + eval(1.0 + x)) > at_one + slack) {
      cert.cond1 = true;
      cert.witness = x;
      break;
    }
  }

  std::vector<double> xs;
  xs.reserve(grid.cond2_points + 17);
  for (std::size_t i = 0; i <= grid.cond2_points; ++i) {
    xs.push_back(grid.cond2_range * static_cast<double>(i) / static_cast<double>(grid.cond2_points));
  }
  if (grid.cond2_range > 1.0) {
    for (int k = 1; k <= 8; ++k) {
      const double h = std::pow(10.0, -k);
      xs.push_back(1.0 - h);
      xs.push_back(1.0 + h);
    }
  }
  double alpha = -std::numeric_limits<double>::infinity();
  for (double x : xs) {
    const double d = x - 1.0;
    if (d == 0.0) continue;
    alpha = std::max(alpha, eval(x) / (d * d));
  }
  cert.alpha = alpha;
  cert.cond2 = std::isfinite(alpha) && alpha <= grid.alpha_cap;
  return cert;
}

}  // namespace gee
