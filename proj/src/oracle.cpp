#include "gee/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <numeric>
#include <sstream>
#include <utility>

#include "binomial.hpp"
#include "gee/error.hpp"

namespace gee {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(-std::abs(a - b)));
}

/// Best rational approximation with denominator <= max_den, by continued
/// fractions. Returns false when none matches x to 1e-12 relative.
bool to_rational(double x, std::int64_t max_den, std::int64_t& num, std::int64_t& den) {
  const double tol = 1e-12 * std::max(1.0, std::abs(x));
  long double y = x;
  std::int64_t h0 = 0, h1 = 1, k0 = 1, k1 = 0;
  for (int iter = 0; iter < 64; ++iter) {
    const long double a = std::floor(y);
    if (std::abs(a) > 4e18L) return false;
    const auto ai = static_cast<std::int64_t>(a);
    const std::int64_t h2 = ai * h1 + h0;
    const std::int64_t k2 = ai * k1 + k0;
    if (k2 > max_den) break;
    h0 = h1;
    h1 = h2;
    k0 = k1;
    k1 = k2;
    if (std::abs(x - static_cast<double>(h1) / static_cast<double>(k1)) <= tol) break;
    const long double frac = y - a;
    if (frac < 1e-18L) break;
    y = 1.0L / frac;
  }
  if (k1 == 0 || std::abs(x - static_cast<double>(h1) / static_cast<double>(k1)) > tol) return false;
  num = h1;
  den = k1;
  return true;
}

/// Symbols grouped into classes that share both their sampling probability
/// and their statistic term; the DP and the expectation work per class.
struct SymbolClasses {
  std::vector<std::size_t> representative;  // one symbol per class
  std::vector<std::size_t> class_of;        // symbol -> class
  std::vector<std::size_t> multiplicity;
};

SymbolClasses classify(const SeparableStatistic& stat, std::span<const double> p) {
  SymbolClasses classes;
  classes.class_of.resize(p.size());
  std::map<std::pair<double, double>, std::size_t> index;
  for (std::size_t j = 0; j < p.size(); ++j) {
    const double ref = stat.symmetric() ? 0.0 : (*stat.reference())[j];
    auto [it, inserted] = index.try_emplace({p[j], ref}, classes.representative.size());
    if (inserted) {
      classes.representative.push_back(j);
      classes.multiplicity.push_back(0);
    }
    classes.class_of[j] = it->second;
    ++classes.multiplicity[it->second];
  }
  return classes;
}

void require_reference_size(const SeparableStatistic& stat, std::size_t m) {
  if (stat.reference() && stat.reference()->size() != m) {
    throw Error(ErrorKind::Dimension, "reference and sampling pmf have different alphabet sizes");
  }
}

}  // namespace

double ExactDistribution::total() const noexcept {
  return std::accumulate(probs.begin(), probs.end(), 0.0);
}

double ExactDistribution::mean() const noexcept {
  double value = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) value += support[i] * probs[i];
  return value;
}

double ExactDistribution::variance() const noexcept {
  const double mu = mean();
  double value = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double d = support[i] - mu;
    value += d * d * probs[i];
  }
  return value;
}

double ExactDistribution::reject_probability(const ThresholdRule& rule) const noexcept {
  double value = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (rule.rejects(support[i])) value += probs[i];
  }
  return value;
}

IntegerTable integer_table(const SeparableStatistic& stat, std::int64_t n, std::size_t m,
                           const OracleOptions& options) {
  require_reference_size(stat, m);
  const std::size_t rows = stat.symmetric() ? 1 : m;
  std::vector<std::vector<double>> terms(rows, std::vector<double>(static_cast<std::size_t>(n + 1)));
  std::int64_t scale = 1;
  for (std::size_t j = 0; j < rows; ++j) {
    for (std::int64_t k = 0; k <= n; ++k) {
      const double x = stat.term(j, k, n, m);
      terms[j][static_cast<std::size_t>(k)] = x;
      std::int64_t num = 0, den = 1;
      if (!std::isfinite(x) || !to_rational(x, 1'000'000, num, den)) {
        std::ostringstream os;
        os << to_string(stat.kind()) << " term f(" << k << ") = " << x << " is not a small rational";
        throw Error(ErrorKind::Scaling, os.str());
      }
      scale = std::lcm(scale, den);
      if (scale > options.max_scale) {
        throw Error(ErrorKind::Scaling, "common denominator exceeds " + std::to_string(options.max_scale));
      }
    }
  }
  auto table = std::make_shared<std::vector<std::vector<std::int64_t>>>(rows);
  for (std::size_t j = 0; j < rows; ++j) {
    auto& row = (*table)[j];
    row.reserve(terms[j].size());
    for (double x : terms[j]) {
      const double scaled = x * static_cast<double>(scale);
      if (std::abs(scaled) > 9e15) throw Error(ErrorKind::Scaling, "scaled term exceeds 2^53");
      row.push_back(std::llround(scaled));
    }
  }
  IntegerTable out;
  out.scale = scale;
  out.offset = stat.constant(n, m);
  const bool shared = rows == 1;
  out.value = [table, shared](std::size_t j, std::int64_t k) {
    return (*table)[shared ? 0 : j][static_cast<std::size_t>(k)];
  };
  return out;
}

ExactDistribution exact_distribution(const IntegerTable& table, const Pmf& p, std::int64_t n,
                                     const OracleOptions& options) {
  if (n < 0) throw Error(ErrorKind::InvalidInput, "sample size must be non-negative");
  const std::size_t m = p.size();
  const auto nn = static_cast<std::size_t>(n);

  // Per-symbol integer values and log weights k ln p_j - ln k!.
  std::vector<std::int64_t> lo(m), hi(m);
  std::vector<std::vector<std::int64_t>> values(m, std::vector<std::int64_t>(nn + 1));
  std::vector<std::vector<double>> logw(m, std::vector<double>(nn + 1, kNegInf));
  std::int64_t base = 0;
  std::uint64_t range = 0;
  for (std::size_t j = 0; j < m; ++j) {
    const double log_p = p[j] > 0.0 ? std::log(p[j]) : kNegInf;
    lo[j] = std::numeric_limits<std::int64_t>::max();
    hi[j] = std::numeric_limits<std::int64_t>::min();
    for (std::size_t k = 0; k <= nn; ++k) {
      if (k > 0 && p[j] == 0.0) break;
      values[j][k] = table.value(j, static_cast<std::int64_t>(k));
      logw[j][k] = (k == 0 ? 0.0 : static_cast<double>(k) * log_p) -
                   std::lgamma(static_cast<double>(k) + 1.0);
      lo[j] = std::min(lo[j], values[j][k]);
      hi[j] = std::max(hi[j], values[j][k]);
    }
    base += lo[j];
    range += static_cast<std::uint64_t>(hi[j] - lo[j]);
  }

  const long double cells = static_cast<long double>(std::max<std::int64_t>(n, 1)) *
                            static_cast<long double>(m) * static_cast<long double>(range + 1);
  if (cells > static_cast<long double>(options.budget)) {
    std::ostringstream os;
    os << "n*m*range = " << static_cast<double>(cells) << " cells exceeds the budget of "
       << options.budget;
    throw Error(ErrorKind::OracleTooLarge, os.str());
  }

  const std::size_t width = static_cast<std::size_t>(range) + 1;
  using Layers = std::vector<std::vector<double>>;
  Layers cur(nn + 1, std::vector<double>(width, kNegInf));
  Layers next(nn + 1, std::vector<double>(width, kNegInf));
  cur[0][0] = 0.0;
  std::size_t used = 0;  // partial sums so far lie in [0, used]
  for (std::size_t j = 0; j < m; ++j) {
    for (auto& layer : next) std::fill(layer.begin(), layer.begin() + static_cast<std::ptrdiff_t>(used + (hi[j] - lo[j]) + 1), kNegInf);
    for (std::size_t t = 0; t <= nn; ++t) {
      for (std::size_t s = 0; s <= used; ++s) {
        const double w = cur[t][s];
        if (w == kNegInf) continue;
        for (std::size_t k = 0; t + k <= nn; ++k) {
          if (logw[j][k] == kNegInf) break;
          const auto target = s + static_cast<std::size_t>(values[j][k] - lo[j]);
          double& slot = next[t + k][target];
          slot = log_add(slot, w + logw[j][k]);
        }
      }
    }
    used += static_cast<std::size_t>(hi[j] - lo[j]);
    std::swap(cur, next);
  }

  const double log_nfact = std::lgamma(static_cast<double>(n) + 1.0);
  ExactDistribution dist;
  for (std::size_t s = 0; s <= used; ++s) {
    const double w = cur[nn][s];
    if (w == kNegInf) continue;
    const double prob = std::exp(w + log_nfact);
    if (prob == 0.0) continue;
    dist.support.push_back(static_cast<double>(base + static_cast<std::int64_t>(s)) /
                               static_cast<double>(table.scale) +
                           table.offset);
    dist.probs.push_back(prob);
  }
  return dist;
}

ExactDistribution exact_distribution(const SeparableStatistic& stat, const Pmf& p,
                                     std::int64_t n, const OracleOptions& options) {
  return exact_distribution(integer_table(stat, n, p.size(), options), p, n, options);
}

ErrorProbabilities exact_error_probs(const SeparableStatistic& stat, const ThresholdRule& rule,
                                     const Pmf& p_null, const Pmf& p_alt, std::int64_t n,
                                     const OracleOptions& options) {
  const auto null_law = exact_distribution(stat, p_null, n, options);
  const auto alt_law = exact_distribution(stat, p_alt, n, options);
  ErrorProbabilities out;
  out.pf = null_law.reject_probability(rule);
  for (std::size_t i = 0; i < alt_law.probs.size(); ++i) {
    if (!rule.rejects(alt_law.support[i])) out.pm += alt_law.probs[i];
  }
  return out;
}

double exact_expectation(const SeparableStatistic& stat, const Pmf& p, std::int64_t n) {
  if (n < 0) throw Error(ErrorKind::InvalidInput, "sample size must be non-negative");
  const std::size_t m = p.size();
  require_reference_size(stat, m);
  const auto classes = classify(stat, p.probs());
  double value = stat.constant(n, m);
  for (std::size_t c = 0; c < classes.representative.size(); ++c) {
    const std::size_t j = classes.representative[c];
    const auto row = detail::binomial_pmf_row(n, p[j]);
    double per_symbol = 0.0;
    for (std::int64_t k = 0; k <= n; ++k) {
      const double prob = row[static_cast<std::size_t>(k)];
      if (prob == 0.0) continue;
      per_symbol += stat.term(j, k, n, m) * prob;
    }
    value += static_cast<double>(classes.multiplicity[c]) * per_symbol;
  }
  return value;
}

AsymptoticMoments asymptotic_moments(const SeparableStatistic& stat, const Pmf& nu, std::int64_t n) {
  const std::size_t m = nu.size();
  require_reference_size(stat, m);
  const double nd = static_cast<double>(n);
  AsymptoticMoments out;
  out.mean = stat.constant(n, m);
  double sum_sq = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    const double f0 = stat.term(j, 0, n, m);
    const double f1 = stat.term(j, 1, n, m);
    const double f2 = stat.term(j, 2, n, m);
    out.mean += f0 + nd * nu[j] * (f1 - f0) + 0.5 * nd * nd * nu[j] * nu[j] * (f0 - 2.0 * f1 + f2);
    sum_sq += nu[j] * nu[j];
  }
  if (stat.symmetric()) {
    const double f0 = stat.term(0, 0, n, m);
    const double f1 = stat.term(0, 1, n, m);
    const double f2 = stat.term(0, 2, n, m);
    if (f0 == 0.0 && f2 != 2.0 * f1) {
      const double d = f2 - 2.0 * f1;
      out.variance = 0.5 * nd * nd * d * d * sum_sq;
    }
  }
  return out;
}

WorstCaseSearch worst_case_bruteforce(std::size_t m, double eps, std::int64_t mesh) {
  if (m < 2 || m > 6) throw Error(ErrorKind::InvalidInput, "brute-force search supports 2 <= m <= 6");
  if (mesh < 1) throw Error(ErrorKind::InvalidInput, "mesh must be positive");
  if (!(eps >= 0.0 && eps <= 1.0)) throw Error(ErrorKind::InvalidEps, "eps must lie in [0, 1]");

  // Work in integers: with q_i = a_i / mesh,
  //   2 m mesh TV = sum |m a_i - mesh|,  chi = m sum a_i^2 / mesh^2.
  const auto mi = static_cast<std::int64_t>(m);
  const double need = 2.0 * eps * static_cast<double>(mi * mesh) - 1e-9;
  std::vector<std::int64_t> parts(m), best_parts;
  std::int64_t best_sq = std::numeric_limits<std::int64_t>::max();

  auto recurse = [&](auto&& self, std::size_t i, std::int64_t remaining, std::int64_t cap,
                     std::int64_t abs_sum, std::int64_t sq_sum) -> void {
    if (i + 1 == m) {
      if (remaining > cap) return;
      parts[i] = remaining;
      const std::int64_t a = abs_sum + std::abs(mi * remaining - mesh);
      const std::int64_t s = sq_sum + remaining * remaining;
      if (static_cast<double>(a) >= need && s < best_sq) {
        best_sq = s;
        best_parts = parts;
      }
      return;
    }
    // The remaining m - i parts are each <= parts[i], so parts[i] >= ceil(remaining / (m - i)).
    const auto slots = static_cast<std::int64_t>(m - i);
    const std::int64_t floor_part = (remaining + slots - 1) / slots;
    for (std::int64_t a = std::min(cap, remaining); a >= floor_part; --a) {
      parts[i] = a;
      self(self, i + 1, remaining - a, a, abs_sum + std::abs(mi * a - mesh), sq_sum + a * a);
    }
  };
  recurse(recurse, 0, mesh, mesh, 0, 0);

  if (best_parts.empty()) {
    throw Error(ErrorKind::Infeasible, "no grid point at TV distance >= eps");
  }
  std::vector<double> probs(m);
  for (std::size_t j = 0; j < m; ++j) {
    probs[j] = static_cast<double>(best_parts[j]) / static_cast<double>(mesh);
  }
  const double md = static_cast<double>(mesh);
  return {Pmf(std::move(probs)), static_cast<double>(mi * best_sq) / (md * md)};
}

}  // namespace gee
