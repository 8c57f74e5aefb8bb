#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "gee/pmf.hpp"

namespace gee {

/// Occupancy fingerprint of a sample: phi[l] is the number of symbols that
/// appear exactly l times. Satisfies sum_l l*phi[l] = n and sum_l phi[l] = m.
struct OccupancyFingerprint {
  std::int64_t n = 0;
  std::size_t m = 0;
  std::vector<std::int64_t> phi;

  std::int64_t at(std::size_t level) const noexcept { return level < phi.size() ? phi[level] : 0; }

  friend bool operator==(const OccupancyFingerprint&, const OccupancyFingerprint&) = default;
};

OccupancyFingerprint occupancy(std::span<const std::int64_t> counts);

enum class StatKind {
  Coincidence,
  Pearson,
  PearsonTruncated,
  ExtendedCoincidence,
  WeightedCoincidence,
};

std::string_view to_string(StatKind kind) noexcept;
StatKind parse_stat_kind(std::string_view name);

/// One of the separable statistics S = constant + sum_j f_j(count_j).
///
/// Conventions (so moment formulas can be applied without guessing shifts):
///   Coincidence          f(1) = -1, others 0, constant 0      (S* = -phi_1)
///   Pearson              f(k) = k^2 / (m p_j), constant -n^2/m
///   PearsonTruncated     f(1) = 1, f(2) = 4, constant -n^2/m
///   ExtendedCoincidence  f(1) = -1, f(l) = v_l for 2 <= l <= lbar
///   WeightedCoincidence  f(0) = n^2 p_j^2 / 2, f(1) = -n p_j, f(2) = 1
/// Pearson without a reference is the uniform-null statistic.
class SeparableStatistic {
 public:
  static SeparableStatistic coincidence();
  static SeparableStatistic pearson();
  static SeparableStatistic pearson(Pmf reference);
  static SeparableStatistic pearson_truncated();
  /// weights[0] is v_2, weights[i] is v_{i+2}; lbar = weights.size() + 1.
  static SeparableStatistic extended_coincidence(std::vector<double> weights);
  static SeparableStatistic weighted_coincidence(Pmf reference);

  StatKind kind() const noexcept { return kind_; }
  std::span<const double> weights() const noexcept { return weights_; }
  const std::optional<Pmf>& reference() const noexcept { return reference_; }

  /// v_2 = 0 and v_l >= 0 for l >= 3. Invalid weights are still evaluable.
  bool weights_valid() const noexcept;

  /// True when every symbol uses the same f (no non-uniform reference).
  bool symmetric() const noexcept;

  /// Fingerprint evaluation is impossible with a non-uniform reference.
  bool needs_counts() const noexcept { return !symmetric(); }

  double term(std::size_t symbol, std::int64_t count, std::int64_t n, std::size_t m) const;
  double constant(std::int64_t n, std::size_t m) const noexcept;

 private:
  SeparableStatistic(StatKind kind, std::vector<double> weights, std::optional<Pmf> reference)
      : kind_(kind), weights_(std::move(weights)), reference_(std::move(reference)) {}

  StatKind kind_;
  std::vector<double> weights_;
  std::optional<Pmf> reference_;
};

double evaluate(const SeparableStatistic& stat, const OccupancyFingerprint& fp);

/// Per-symbol evaluation. Pearson uses the defining form
/// (n/m) sum_j (c_j - n p_j)^2 / (n p_j); everything else sums f_j.
double evaluate(const SeparableStatistic& stat, std::span<const std::int64_t> counts);

/// Decision rule "reject H0 iff S >= threshold".
struct ThresholdRule {
  StatKind kind = StatKind::Coincidence;
  double tau = 0.0;          // normalized threshold
  std::int64_t n = 0;
  std::size_t m = 0;
  double eps = 0.0;
  double center = 0.0;       // E_p[S] (or the Pearson centre n)
  double offset = 0.0;       // (n^2/m) * tau, in statistic units
  double threshold = 0.0;    // center + offset
  bool clamped = false;

  /// Ties count as rejections; comparisons allow 1e-9 relative slack so a
  /// value computed along a different floating-point path still ties.
  bool rejects(double value) const noexcept;

  static ThresholdRule absolute(StatKind kind, double threshold, std::int64_t n, std::size_t m);
};

/// Coincidence / ExtendedCoincidence / PearsonTruncated:
///   reject iff S >= E_p[S] + (n^2/m) tau, with E_p[S] exact under uniform p.
/// Pearson: reject iff S >= n + (n^2/m)(kappa_bar(eps) - 1)/2 (tau is ignored).
/// WeightedCoincidence: reject iff S >= (n^2/m) tau.
/// tau < 0 throws; tau > kappa_bar(eps) - 1 is clamped with a warning for the
/// coincidence family.
ThresholdRule make_threshold(const SeparableStatistic& stat, double tau, std::int64_t n,
                             std::size_t m, double eps);

/// Exact E_p[S] under uniform(m) via binomial marginals (closed form for
/// the coincidence family: E_p[S*] = -n (1 - 1/m)^(n-1)).
double uniform_null_expectation(const SeparableStatistic& stat, std::int64_t n, std::size_t m);

}  // namespace gee
