#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

namespace gee::detail {

/// Binomial(n, p) probabilities for k = 0..n. Starts from k = 0 when
/// (1-p)^n is representable (the ratio recurrence then keeps a few-ulp
/// relative error on the small-k terms), otherwise from the mode.
inline std::vector<double> binomial_pmf_row(std::int64_t n, double p) {
  std::vector<double> row(static_cast<std::size_t>(n + 1), 0.0);
  if (p <= 0.0) {
    row.front() = 1.0;
    return row;
  }
  if (p >= 1.0) {
    row.back() = 1.0;
    return row;
  }
  const double ratio = p / (1.0 - p);
  const double log_zero = static_cast<double>(n) * std::log1p(-p);
  std::int64_t start = 0;
  if (log_zero > -700.0) {
    row[0] = std::exp(log_zero);
  } else {
    start = static_cast<std::int64_t>(std::floor(static_cast<double>(n + 1) * p));
    start = std::min(start, n);
    const double log_mode = std::lgamma(static_cast<double>(n) + 1.0) -
                            std::lgamma(static_cast<double>(start) + 1.0) -
                            std::lgamma(static_cast<double>(n - start) + 1.0) +
                            static_cast<double>(start) * std::log(p) +
                            static_cast<double>(n - start) * std::log1p(-p);
    row[static_cast<std::size_t>(start)] = std::exp(log_mode);
  }
  for (std::int64_t k = start; k < n; ++k) {
    row[static_cast<std::size_t>(k + 1)] =
        row[static_cast<std::size_t>(k)] * static_cast<double>(n - k) / static_cast<double>(k + 1) * ratio;
  }
  for (std::int64_t k = start; k > 0; --k) {
    row[static_cast<std::size_t>(k - 1)] =
        row[static_cast<std::size_t>(k)] * static_cast<double>(k) / static_cast<double>(n - k + 1) / ratio;
  }
  return row;
}

/// Single binomial probability, same accuracy profile as the row for small k.
inline double binomial_pmf(std::int64_t n, std::int64_t k, double p) {
  if (k < 0 || k > n) return 0.0;
  if (p <= 0.0) return k == 0 ? 1.0 : 0.0;
  if (p >= 1.0) return k == n ? 1.0 : 0.0;
  double value = std::exp(static_cast<double>(n - k) * std::log1p(-p));
  for (std::int64_t i = 0; i < k; ++i) {
    value *= static_cast<double>(n - i) / static_cast<double>(i + 1) * p;
  }
  return value;
}

}  // namespace gee::detail
