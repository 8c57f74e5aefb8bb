#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "gee/pmf.hpp"
#include "gee/statistics.hpp"

namespace gee {

/// Exact law of a statistic: support values in increasing order with their
/// probabilities.
struct ExactDistribution {
  std::vector<double> support;
  std::vector<double> probs;

  double total() const noexcept;
  double mean() const noexcept;
  double variance() const noexcept;
  /// P{S >= threshold} under `rule`'s tie convention.
  double reject_probability(const ThresholdRule& rule) const noexcept;
};

/// Integer-valued per-symbol table: the statistic equals
/// sum_j value(j, k_j) / scale + offset.
struct IntegerTable {
  std::function<std::int64_t(std::size_t symbol, std::int64_t count)> value;
  std::int64_t scale = 1;
  double offset = 0.0;
};

struct OracleOptions {
  /// Upper bound on n * m * (integer value range) for the dynamic program.
  std::uint64_t budget = 100'000'000;
  /// Largest common denominator accepted when scaling a real-valued statistic.
  std::int64_t max_scale = 1'000'000'000;
};

/// Rescales `stat` to an integer table for sample size n on alphabet size m
/// (terms are recovered as exact rationals). Throws Scaling when no common
/// denominator up to `max_scale` reproduces every term.
IntegerTable integer_table(const SeparableStatistic& stat, std::int64_t n, std::size_t m,
                           const OracleOptions& options = {});

/// Exact law under n i.i.d. draws from p. Dynamic program over
/// (symbols processed, counts used, partial integer sum) accumulating
/// log(p_j^k / k!) weights, with the n! factor applied at the end.
ExactDistribution exact_distribution(const IntegerTable& table, const Pmf& p, std::int64_t n,
                                     const OracleOptions& options = {});
ExactDistribution exact_distribution(const SeparableStatistic& stat, const Pmf& p,
                                     std::int64_t n, const OracleOptions& options = {});

struct ErrorProbabilities {
  double pf = 0.0;
  double pm = 0.0;
};

ErrorProbabilities exact_error_probs(const SeparableStatistic& stat, const ThresholdRule& rule,
                                     const Pmf& p_null, const Pmf& p_alt, std::int64_t n,
                                     const OracleOptions& options = {});

/// E[sum_j f_j(B_j)] with B_j ~ Binomial(n, p_j); symbols sharing the same
/// (p_j, f_j) are summed once and multiplied by their multiplicity.
double exact_expectation(const SeparableStatistic& stat, const Pmf& p, std::int64_t n);

struct AsymptoticMoments {
  double mean = 0.0;
  std::optional<double> variance;  // empty when the variance expansion does not apply
};

/// Second-order moment expansions for nu with bounded likelihood ratio:
///   mean ~ constant + sum f_j(0) + n sum nu_j (f_j(1) - f_j(0))
///          + n^2/2 sum nu_j^2 (f_j(0) - 2 f_j(1) + f_j(2))
///   var  ~ (n^2/2) (f(2) - 2 f(1))^2 sum nu_j^2
/// The variance needs a symmetric f with f(0) = 0 and f(2) != 2 f(1); the
/// f used is the table from SeparableStatistic (Pearson's k^2 core, so its
/// constant -n^2/m drops out).
AsymptoticMoments asymptotic_moments(const SeparableStatistic& stat, const Pmf& nu, std::int64_t n);

struct WorstCaseSearch {
  Pmf argmin;
  double min_value;
};

/// Minimizes the chi-square functional against uniform(m) over the simplex
/// grid with mesh 1/mesh, restricted to points at TV distance >= eps.
/// Enumerates non-increasing compositions only (the objective and the
/// constraint are symmetric), so the returned argmin is sorted. m <= 6.
WorstCaseSearch worst_case_bruteforce(std::size_t m, double eps, std::int64_t mesh);

}  // namespace gee
