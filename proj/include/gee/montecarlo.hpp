#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gee/pmf.hpp"
#include "gee/rng.hpp"
#include "gee/statistics.hpp"

namespace gee {

/// Walker alias table. One 64-bit draw yields one symbol: the high half of
/// x * m picks the column, the low half decides column vs alias.
class AliasTable {
  __extension__ using u128 = unsigned __int128;

 public:
  explicit AliasTable(const Pmf& p);

  std::size_t size() const noexcept { return size_; }

  std::size_t sample(std::uint64_t bits) const noexcept {
    const u128 wide = static_cast<u128>(bits) * size_;
    const auto column = static_cast<std::size_t>(wide >> 64);
    if (flat_) return column;
    const auto fraction = static_cast<std::uint32_t>(static_cast<std::uint64_t>(wide) >> 32);
    const Entry& e = entries_[column];
    return fraction < e.accept || e.accept == kFull ? column : e.alias;
  }

 private:
  static constexpr std::uint32_t kFull = 0xffffffffu;
  struct Entry {
    std::uint32_t accept;  // acceptance threshold scaled to 2^32; kFull means always
    std::uint32_t alias;
  };
  std::vector<Entry> entries_;
  std::size_t size_ = 0;
  bool flat_ = false;  // every column full: the column itself is the draw
};

enum class SamplingPath { Auto, Alias, Binomial };

/// Draws occupancy fingerprints of n i.i.d. symbols from p. The alias path
/// draws symbols one by one (O(n) per sample); the binomial path draws the
/// count vector as a chain of conditional binomials (O(m)). Auto takes the
/// alias path while n <= 4m. Both paths produce the same law.
class OccupancySampler {
 public:
  explicit OccupancySampler(const Pmf& p, SamplingPath path = SamplingPath::Auto);

  const OccupancyFingerprint& sample(std::int64_t n, TrialRng& rng);

  /// Per-symbol counts of the last sample (materialized on demand, O(m)).
  std::span<const std::int64_t> counts();

  SamplingPath path_for(std::int64_t n) const noexcept;

 private:
  void sample_alias(std::int64_t n, TrialRng& rng);
  void sample_binomial(std::int64_t n, TrialRng& rng);

  std::vector<double> probs_;
  AliasTable alias_;
  SamplingPath path_;
  std::vector<std::int64_t> counts_;
  bool counts_valid_ = false;
  // Alias path: open-addressing table symbol+1 -> count, sized to stay cache resident.
  std::vector<std::uint32_t> slot_key_;
  std::vector<std::uint32_t> slot_count_;
  std::vector<std::uint32_t> used_slots_;
  OccupancyFingerprint fp_;
};

OccupancyFingerprint sample_occupancy(const Pmf& p, std::int64_t n, TrialRng& rng);

/// Monte Carlo error estimate; ci95_halfwidth = 1.96 sqrt(p(1-p)/trials),
/// reported as 0 when no trial or every trial exceeded.
struct ErrorEstimate {
  double p_hat = 0.0;
  std::uint64_t exceed_count = 0;
  std::uint64_t trials = 0;
  double ci95_halfwidth = 0.0;
};

ErrorEstimate make_estimate(std::uint64_t exceed_count, std::uint64_t trials);

struct SimPlan {
  std::int64_t n = 1;
  std::size_t m = 2;
  double eps = 0.35;
  SeparableStatistic stat = SeparableStatistic::coincidence();
  ThresholdRule rule;
  std::optional<Pmf> null_pmf;     // defaults to uniform(m)
  std::optional<Pmf> alternative;  // defaults to biuniform_worst_case(m, eps)
  std::uint64_t trials = 1;
  std::uint64_t seed = 0;
  std::size_t streams = 1;
};

/// Trial-level domain tags mixed into the Philox key.
enum class SampleRole : std::uint64_t { Null = 0x6e756c6c, Alternative = 0x616c7400 };

/// Values of each statistic on the same `trials` samples of size n from p
/// (paired across statistics). Trials are split into `streams` contiguous
/// blocks run on worker threads; trial t always uses TrialRng(key, t), so
/// the output is identical for every `streams`.
std::vector<std::vector<double>> simulate_values(const Pmf& p, std::int64_t n,
                                                 std::span<const SeparableStatistic> stats,
                                                 std::uint64_t trials, std::uint64_t key,
                                                 std::size_t streams);

std::uint64_t count_rejections(std::span<const double> values, const ThresholdRule& rule);

/// Key used for a plan's samples; exposed so paired re-analysis can redraw them.
std::uint64_t plan_key(const SimPlan& plan, SampleRole role);

ErrorEstimate estimate_pf(const SimPlan& plan);
ErrorEstimate estimate_pm(const SimPlan& plan);

/// m as a function of n: "n^A" gives ceil(n^A), "C*n" gives ceil(C n).
struct MRule {
  enum class Form { Power, Linear } form = Form::Power;
  double a = 1.5;

  static MRule parse(const std::string& text);
  std::size_t apply(std::int64_t n) const;
  std::string to_string() const;
};

struct SweepRow {
  std::int64_t n = 0;
  std::size_t m = 0;
  double r = 0.0;  // n^2 / m
  double threshold = 0.0;
  ErrorEstimate pf;
  ErrorEstimate pm;
  std::vector<std::string> flags;  // zero-pf, zero-pm, low-pf, low-pm
};

struct SweepConfig {
  double eps = 0.45;
  SeparableStatistic stat = SeparableStatistic::coincidence();
  double tau = 0.0;
  std::vector<std::int64_t> n_list;
  MRule m_rule;
  std::uint64_t trials = 1'000'000;
  std::uint64_t seed = 0;
  std::size_t streams = 1;
};

/// One row per n (in the given order, which callers keep increasing); P_M is
/// estimated at the bi-uniform worst case. Rows with an all-zero estimate
/// are kept and flagged.
std::vector<SweepRow> sweep(const SweepConfig& config);

/// Maps observations to equal-probability cells of the null law: symbol j
/// (0-based) covers [quantile(j/m), quantile((j+1)/m)).
class PartitionMap {
 public:
  PartitionMap(std::function<double(double)> quantile, std::size_t m);

  std::size_t operator()(double y) const;
  std::size_t size() const noexcept { return edges_.size() - 1; }

 private:
  std::vector<double> edges_;  // quantile(j/m), j = 0..m
};

}  // namespace gee
