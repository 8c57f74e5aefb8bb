#include "gee/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "binomial.hpp"
#include "gee/error.hpp"
#include "gee/exponents.hpp"

namespace gee {

namespace {

double n_squared_over_m(std::int64_t n, std::size_t m) {
  const double nd = static_cast<double>(n);
  return nd * nd / static_cast<double>(m);
}

void require_reference_size(const SeparableStatistic& stat, std::size_t m) {
  if (stat.reference() && stat.reference()->size() != m) {
    std::ostringstream os;
    os << "reference has " << stat.reference()->size() << " symbols, sample has " << m;
    throw Error(ErrorKind::Dimension, os.str());
  }
}

}  // namespace

OccupancyFingerprint occupancy(std::span<const std::int64_t> counts) {
  OccupancyFingerprint fp;
  fp.m = counts.size();
  for (std::int64_t c : counts) {
    if (c < 0) throw Error(ErrorKind::InvalidInput, "negative count");
    const auto level = static_cast<std::size_t>(c);
    if (level >= fp.phi.size()) fp.phi.resize(level + 1, 0);
    ++fp.phi[level];
    fp.n += c;
  }
  return fp;
}

std::string_view to_string(StatKind kind) noexcept {
  switch (kind) {
    case StatKind::Coincidence: return "coincidence";
    case StatKind::Pearson: return "pearson";
    case StatKind::PearsonTruncated: return "pearson-truncated";
    case StatKind::ExtendedCoincidence: return "extended-coincidence";
    case StatKind::WeightedCoincidence: return "weighted-coincidence";
  }
  return "unknown";
}

StatKind parse_stat_kind(std::string_view name) {
  for (auto kind : {StatKind::Coincidence, StatKind::Pearson, StatKind::PearsonTruncated,
                    StatKind::ExtendedCoincidence, StatKind::WeightedCoincidence}) {
    if (name == to_string(kind)) return kind;
  }
  throw Error(ErrorKind::InvalidInput, "unknown statistic '" + std::string(name) + "'");
}

SeparableStatistic SeparableStatistic::coincidence() {
  return {StatKind::Coincidence, {}, std::nullopt};
}

SeparableStatistic SeparableStatistic::pearson() { return {StatKind::Pearson, {}, std::nullopt}; }

SeparableStatistic SeparableStatistic::pearson(Pmf reference) {
  if (reference.support_size() != reference.size()) {
    throw Error(ErrorKind::AbsoluteContinuity, "Pearson reference needs full support");
  }
  return {StatKind::Pearson, {}, std::move(reference)};
}

SeparableStatistic SeparableStatistic::pearson_truncated() {
  return {StatKind::PearsonTruncated, {}, std::nullopt};
}

SeparableStatistic SeparableStatistic::extended_coincidence(std::vector<double> weights) {
  for (double v : weights) {
    if (!std::isfinite(v)) throw Error(ErrorKind::InvalidInput, "weights must be finite");
  }
  return {StatKind::ExtendedCoincidence, std::move(weights), std::nullopt};
}

SeparableStatistic SeparableStatistic::weighted_coincidence(Pmf reference) {
  return {StatKind::WeightedCoincidence, {}, std::move(reference)};
}

bool SeparableStatistic::weights_valid() const noexcept {
  if (weights_.empty()) return true;
  if (weights_.front() != 0.0) return false;
  return std::all_of(weights_.begin() + 1, weights_.end(), [](double v) { return v >= 0.0; });
}

bool SeparableStatistic::symmetric() const noexcept {
  return !reference_ || reference_->is_uniform();
}

double SeparableStatistic::term(std::size_t symbol, std::int64_t count, std::int64_t n,
                                std::size_t m) const {
  const double k = static_cast<double>(count);
  switch (kind_) {
    case StatKind::Coincidence:
      return count == 1 ? -1.0 : 0.0;
    case StatKind::Pearson:
      if (reference_) return k * k / (static_cast<double>(m) * (*reference_)[symbol]);
      return k * k;
    case StatKind::PearsonTruncated:
      return count == 1 ? 1.0 : count == 2 ? 4.0 : 0.0;
    case StatKind::ExtendedCoincidence:
      if (count == 1) return -1.0;
      if (count >= 2 && static_cast<std::size_t>(count - 2) < weights_.size()) {
        return weights_[static_cast<std::size_t>(count - 2)];
      }
      return 0.0;
    case StatKind::WeightedCoincidence: {
      const double np = static_cast<double>(n) * (*reference_)[symbol];
      if (count == 0) return 0.5 * np * np;
      if (count == 1) return -np;
      return count == 2 ? 1.0 : 0.0;
    }
  }
  return 0.0;
}

double SeparableStatistic::constant(std::int64_t n, std::size_t m) const noexcept {
  if (kind_ == StatKind::Pearson || kind_ == StatKind::PearsonTruncated) {
    return -n_squared_over_m(n, m);
  }
  return 0.0;
}

double evaluate(const SeparableStatistic& stat, const OccupancyFingerprint& fp) {
  require_reference_size(stat, fp.m);
  if (stat.needs_counts()) {
    throw Error(ErrorKind::NeedsCounts,
                std::string(to_string(stat.kind())) + " with a non-uniform reference needs counts");
  }
  const double nm = n_squared_over_m(fp.n, fp.m);
  const auto phi = [&fp](std::size_t l) { return static_cast<double>(fp.at(l)); };
  switch (stat.kind()) {
    case StatKind::Coincidence:
      return -phi(1);
    case StatKind::Pearson: {
      std::int64_t sum = 0;
      for (std::size_t l = 1; l < fp.phi.size(); ++l) {
        sum += static_cast<std::int64_t>(l * l) * fp.phi[l];
      }
      return static_cast<double>(sum) - nm;
    }
    case StatKind::PearsonTruncated:
      return phi(1) + 4.0 * phi(2) - nm;
    case StatKind::ExtendedCoincidence: {
      double value = -phi(1);
      const auto weights = stat.weights();
      for (std::size_t i = 0; i < weights.size(); ++i) value += weights[i] * phi(i + 2);
      return value;
    }
    case StatKind::WeightedCoincidence: {
      const double n = static_cast<double>(fp.n);
      const double m = static_cast<double>(fp.m);
      return phi(0) * n * n / (2.0 * m * m) - phi(1) * n / m + phi(2);
    }
  }
  return 0.0;
}

double evaluate(const SeparableStatistic& stat, std::span<const std::int64_t> counts) {
  const std::size_t m = counts.size();
  require_reference_size(stat, m);
  std::int64_t n = 0;
  for (std::int64_t c : counts) {
    if (c < 0) throw Error(ErrorKind::InvalidInput, "negative count");
    n += c;
  }
  if (stat.kind() == StatKind::Pearson) {
    // (n/m) sum (c - n p)^2 / (n p); n = 0 gives 0 directly.
    if (n == 0) return 0.0;
    const double nd = static_cast<double>(n);
    double total = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const double p = stat.reference() ? (*stat.reference())[j] : 1.0 / static_cast<double>(m);
      const double expected = nd * p;
      const double diff = static_cast<double>(counts[j]) - expected;
      total += diff * diff / expected;
    }
    return nd / static_cast<double>(m) * total;
  }
  double total = stat.constant(n, m);
  for (std::size_t j = 0; j < m; ++j) total += stat.term(j, counts[j], n, m);
  return total;
}

bool ThresholdRule::rejects(double value) const noexcept {
  return value >= threshold - 1e-9 * std::max(1.0, std::abs(threshold));
}

ThresholdRule ThresholdRule::absolute(StatKind kind, double threshold, std::int64_t n,
                                      std::size_t m) {
  ThresholdRule rule;
  rule.kind = kind;
  rule.n = n;
  rule.m = m;
  rule.threshold = threshold;
  rule.center = threshold;
  return rule;
}

double uniform_null_expectation(const SeparableStatistic& stat, std::int64_t n, std::size_t m) {
  if (m < 2) throw Error(ErrorKind::InvalidAlphabet, "alphabet size must be at least 2");
  const double md = static_cast<double>(m);
  const double p = 1.0 / md;
  const double nd = static_cast<double>(n);
  switch (stat.kind()) {
    case StatKind::Coincidence:
      return n == 0 ? 0.0 : -nd * std::exp((nd - 1.0) * std::log1p(-p));
    case StatKind::ExtendedCoincidence: {
      double value = n == 0 ? 0.0 : -nd * std::exp((nd - 1.0) * std::log1p(-p));
      const auto weights = stat.weights();
      for (std::size_t i = 0; i < weights.size(); ++i) {
        value += weights[i] * md * detail::binomial_pmf(n, static_cast<std::int64_t>(i + 2), p);
      }
      return value;
    }
    case StatKind::PearsonTruncated:
      return md * (detail::binomial_pmf(n, 1, p) + 4.0 * detail::binomial_pmf(n, 2, p)) -
             n_squared_over_m(n, m);
    case StatKind::Pearson:
      // E sum c_j^2 = n(1-p) + n^2 p over m symbols, minus n^2/m.
      return nd * (1.0 - p);
    case StatKind::WeightedCoincidence: {
      require_reference_size(stat, m);
      double value = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        for (std::int64_t k = 0; k <= std::min<std::int64_t>(n, 2); ++k) {
          value += stat.term(j, k, n, m) * detail::binomial_pmf(n, k, p);
        }
      }
      return value;
    }
  }
  return 0.0;
}

ThresholdRule make_threshold(const SeparableStatistic& stat, double tau, std::int64_t n,
                             std::size_t m, double eps) {
  if (!(tau >= 0.0)) throw Error(ErrorKind::InvalidThreshold, "tau must be non-negative");
  if (n < 0) throw Error(ErrorKind::InvalidInput, "sample size must be non-negative");
  if (m < 2) throw Error(ErrorKind::InvalidAlphabet, "alphabet size must be at least 2");
  const double kb = kappa_bar(eps);

  ThresholdRule rule;
  rule.kind = stat.kind();
  rule.n = n;
  rule.m = m;
  rule.eps = eps;
  const double scale = n_squared_over_m(n, m);

  switch (stat.kind()) {
    case StatKind::Coincidence:
    case StatKind::ExtendedCoincidence:
    case StatKind::PearsonTruncated:
      if (tau > kb - 1.0 && tau <= kb - 1.0 + 1e-12) tau = kb - 1.0;  // rounding, not a request
      if (tau > kb - 1.0) {
        std::ostringstream os;
        os << "tau = " << tau << " exceeds kappa_bar(eps) - 1 = " << kb - 1.0 << "; clamped";
        warn(os.str());
        tau = kb - 1.0;
        rule.clamped = true;
      }
      rule.center = uniform_null_expectation(stat, n, m);
      break;
    case StatKind::Pearson:
      tau = 0.5 * (kb - 1.0);
      rule.center = static_cast<double>(n);
      break;
    case StatKind::WeightedCoincidence:
      rule.center = 0.0;
      break;
  }
  rule.tau = tau;
  rule.offset = scale * tau;
  rule.threshold = rule.center + rule.offset;
  return rule;
}

}  // namespace gee
