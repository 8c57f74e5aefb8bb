#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace gee {

/// Probability mass function on the symbols 0..m-1 (m >= 2).
///
/// Entries are non-negative and sum to one within 1e-12. Construction
/// renormalizes drift up to 1e-9 and rejects anything larger.
class Pmf {
 public:
  explicit Pmf(std::vector<double> probs);

  std::size_t size() const noexcept { return probs_.size(); }
  double operator[](std::size_t j) const noexcept { return probs_[j]; }
  std::span<const double> probs() const noexcept { return probs_; }

  /// Number of symbols with positive mass.
  std::size_t support_size() const noexcept;
  bool is_uniform() const noexcept;

  friend bool operator==(const Pmf&, const Pmf&) = default;

 private:
  std::vector<double> probs_;
};

Pmf uniform(std::size_t m);

/// Uniform on the first k symbols of an alphabet of size m, zero elsewhere.
Pmf uniform_on_support(std::size_t m, std::size_t k);

/// Least-favourable alternative at total-variation distance eps from
/// uniform(m): two-valued below eps = 0.5, uniform on floor(m(1-eps))
/// symbols above.
Pmf biuniform_worst_case(std::size_t m, double eps);

/// The eps < 0.5 worst case with the heavy half placed on `subset`
/// (0-based indices, |subset| = floor(m/2)).
Pmf permuted_worst_case(std::size_t m, double eps, std::span<const std::size_t> subset);

double tv_distance(const Pmf& q, const Pmf& p);

/// sum_j q_j^2 / p_j over supp(p). At least 1, with equality iff q = p.
double chi_square_functional(const Pmf& q, const Pmf& p);

/// max_j q_j / p_j over supp(p). Membership in the bounded-ratio class is
/// `likelihood_ratio_bound(q, p) <= gamma`.
double likelihood_ratio_bound(const Pmf& q, const Pmf& p);

using ScalarFunction = std::function<double(double)>;

/// sum_{j: p_j > 0} p_j f(q_j / p_j).
double f_divergence(const Pmf& q, const Pmf& p, const ScalarFunction& f);

struct FdivGrid {
  std::size_t cond1_points = 1000;  // interior points of (0, 1)
  double cond2_range = 100.0;       // condition 2 sampled on [0, cond2_range]
  std::size_t cond2_points = 100000;
  double alpha_cap = 1e6;           // alpha above this counts as unbounded
};

struct FdivCertificate {
  bool cond1 = false;
  double witness = 0.0;  // first x with (f(1-x) + f(1+x)) / 2 > f(1)
  bool cond2 = false;
  double alpha = 0.0;    // grid sup of f(x) / (x-1)^2
};

/// Grid certificate for the two f-divergence conditions:
///   (1) (f(1-x) + f(1+x)) / 2 > f(1) for some x in (0, 1)
///   (2) f(x) <= alpha (x-1)^2 on [0, X].
/// Condition 2 also probes x = 1 +- 10^-k, k = 1..8, so a ratio that blows
/// up at x = 1 is caught by `alpha_cap`. Not a proof.
FdivCertificate check_fdiv_conditions(const ScalarFunction& f, const FdivGrid& grid = {});

}  // namespace gee
