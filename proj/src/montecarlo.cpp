#include "gee/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <random>
#include <sstream>
#include <thread>

#include "gee/error.hpp"

namespace gee {

AliasTable::AliasTable(const Pmf& p) : entries_(p.size()), size_(p.size()) {
  const std::size_t m = p.size();
  const double md = static_cast<double>(m);
  std::vector<double> scaled(m);
  std::vector<std::size_t> small, large;
  for (std::size_t j = 0; j < m; ++j) {
    scaled[j] = p[j] * md;
    (scaled[j] < 1.0 ? small : large).push_back(j);
  }
  if (m > kFull) throw Error(ErrorKind::InvalidAlphabet, "alias table supports m < 2^32");
  constexpr double kTwo32 = 4294967296.0;
  auto set_column = [&](std::size_t col, double accept, std::size_t alias) {
    entries_[col].alias = static_cast<std::uint32_t>(alias);
    entries_[col].accept = accept >= 1.0 ? kFull : static_cast<std::uint32_t>(accept * kTwo32);
  };
  while (!small.empty() && !large.empty()) {
    const std::size_t s = small.back();
    small.pop_back();
    const std::size_t l = large.back();
    set_column(s, scaled[s], l);
    scaled[l] -= 1.0 - scaled[s];
    if (scaled[l] < 1.0) {
      large.pop_back();
      small.push_back(l);
    }
  }
  // Leftovers are full columns up to rounding; they alias to themselves.
  for (std::size_t j : large) set_column(j, 1.0, j);
  for (std::size_t j : small) set_column(j, 1.0, j);
  flat_ = std::all_of(entries_.begin(), entries_.end(), [](const Entry& e) { return e.accept == kFull; });
}

OccupancySampler::OccupancySampler(const Pmf& p, SamplingPath path)
    : probs_(p.probs().begin(), p.probs().end()), alias_(p), path_(path), counts_(p.size(), 0) {
  fp_.m = p.size();
}

SamplingPath OccupancySampler::path_for(std::int64_t n) const noexcept {
  if (path_ != SamplingPath::Auto) return path_;
  return static_cast<std::uint64_t>(n) <= 4 * static_cast<std::uint64_t>(probs_.size())
             ? SamplingPath::Alias
             : SamplingPath::Binomial;
}

void OccupancySampler::sample_alias(std::int64_t n, TrialRng& rng) {
  std::size_t slots = 16;
  while (slots < 2 * static_cast<std::size_t>(n)) slots <<= 1;
  if (slot_key_.size() != slots) {
    slot_key_.assign(slots, 0);
    slot_count_.assign(slots, 0);
    used_slots_.clear();
  }
  for (std::uint32_t s : used_slots_) slot_key_[s] = 0;
  used_slots_.clear();
  const std::size_t mask = slots - 1;
  for (std::int64_t i = 0; i < n; ++i) {
    const auto key = static_cast<std::uint32_t>(alias_.sample(rng()) + 1);
    std::size_t s = (key * 0x9E3779B1u) & mask;
    while (slot_key_[s] != 0 && slot_key_[s] != key) s = (s + 1) & mask;
    if (slot_key_[s] == 0) {
      slot_key_[s] = key;
      slot_count_[s] = 1;
      used_slots_.push_back(static_cast<std::uint32_t>(s));
    } else {
      ++slot_count_[s];
    }
  }
  auto& phi = fp_.phi;
  std::fill(phi.begin(), phi.end(), 0);
  if (phi.empty()) phi.resize(1, 0);
  phi[0] = static_cast<std::int64_t>(probs_.size() - used_slots_.size());
  for (std::uint32_t s : used_slots_) {
    const std::size_t level = slot_count_[s];
    if (level >= phi.size()) phi.resize(level + 1, 0);
    ++phi[level];
  }
}

void OccupancySampler::sample_binomial(std::int64_t n, TrialRng& rng) {
  std::int64_t remaining = n;
  double mass = 1.0;
  const std::size_t m = probs_.size();
  for (std::size_t j = 0; j < m; ++j) {
    std::int64_t c = 0;
    if (j + 1 == m) {
      c = remaining;
    } else if (remaining > 0 && probs_[j] > 0.0) {
      const double prob = mass > 0.0 ? std::min(1.0, probs_[j] / mass) : 1.0;
      c = std::binomial_distribution<std::int64_t>(remaining, prob)(rng);
    }
    counts_[j] = c;
    remaining -= c;
    mass -= probs_[j];
  }
  auto& phi = fp_.phi;
  std::fill(phi.begin(), phi.end(), 0);
  for (std::int64_t c : counts_) {
    const auto level = static_cast<std::size_t>(c);
    if (level >= phi.size()) phi.resize(level + 1, 0);
    ++phi[level];
  }
}

const OccupancyFingerprint& OccupancySampler::sample(std::int64_t n, TrialRng& rng) {
  if (n < 0) throw Error(ErrorKind::InvalidInput, "sample size must be non-negative");
  fp_.n = n;
  if (path_for(n) == SamplingPath::Alias) {
    if (n > static_cast<std::int64_t>(std::numeric_limits<std::uint32_t>::max() / 4)) {
      throw Error(ErrorKind::InvalidInput, "sample size too large for the alias path");
    }
    sample_alias(n, rng);
    counts_valid_ = false;
  } else {
    sample_binomial(n, rng);
    counts_valid_ = true;
  }
  // Trailing zero levels are not part of the fingerprint.
  while (fp_.phi.size() > 1 && fp_.phi.back() == 0) fp_.phi.pop_back();
  return fp_;
}

std::span<const std::int64_t> OccupancySampler::counts() {
  if (!counts_valid_) {
    std::fill(counts_.begin(), counts_.end(), 0);
    for (std::uint32_t s : used_slots_) counts_[slot_key_[s] - 1] = slot_count_[s];
    counts_valid_ = true;
  }
  return counts_;
}

OccupancyFingerprint sample_occupancy(const Pmf& p, std::int64_t n, TrialRng& rng) {
  OccupancySampler sampler(p);
  return sampler.sample(n, rng);
}

ErrorEstimate make_estimate(std::uint64_t exceed_count, std::uint64_t trials) {
  ErrorEstimate est;
  est.exceed_count = exceed_count;
  est.trials = trials;
  if (trials == 0) return est;
  est.p_hat = static_cast<double>(exceed_count) / static_cast<double>(trials);
  if (exceed_count != 0 && exceed_count != trials) {
    est.ci95_halfwidth = 1.96 * std::sqrt(est.p_hat * (1.0 - est.p_hat) / static_cast<double>(trials));
  }
  return est;
}

std::vector<std::vector<double>> simulate_values(const Pmf& p, std::int64_t n,
                                                 std::span<const SeparableStatistic> stats,
                                                 std::uint64_t trials, std::uint64_t key,
                                                 std::size_t streams) {
  if (streams == 0) throw Error(ErrorKind::InvalidInput, "streams must be positive");
  for (const auto& stat : stats) {
    if (stat.reference() && stat.reference()->size() != p.size()) {
      throw Error(ErrorKind::Dimension, "statistic reference and sampling pmf differ in size");
    }
  }
  std::vector<std::vector<double>> values(stats.size(), std::vector<double>(trials));

  auto run_stream = [&](std::size_t s) {
    const std::uint64_t begin = trials * s / streams;
    const std::uint64_t end = trials * (s + 1) / streams;
    OccupancySampler sampler(p);
    for (std::uint64_t t = begin; t < end; ++t) {
      TrialRng rng(key, t);
      const auto& fp = sampler.sample(n, rng);
      for (std::size_t i = 0; i < stats.size(); ++i) {
        values[i][t] = stats[i].needs_counts() ? evaluate(stats[i], sampler.counts())
                                               : evaluate(stats[i], fp);
      }
    }
  };

  const std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t workers = std::min(streams, hw);
  if (workers <= 1) {
    for (std::size_t s = 0; s < streams; ++s) run_stream(s);
    return values;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t s = w; s < streams; s += workers) run_stream(s);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (const auto& err : errors) {
    if (err) std::rethrow_exception(err);
  }
  return values;
}

std::uint64_t count_rejections(std::span<const double> values, const ThresholdRule& rule) {
  return static_cast<std::uint64_t>(
      std::count_if(values.begin(), values.end(), [&rule](double v) { return rule.rejects(v); }));
}

std::uint64_t plan_key(const SimPlan& plan, SampleRole role) {
  return derive_key(plan.seed, static_cast<std::uint64_t>(role), static_cast<std::uint64_t>(plan.n),
                    static_cast<std::uint64_t>(plan.m));
}

namespace {

void validate(const SimPlan& plan) {
  if (plan.n < 1) throw Error(ErrorKind::InvalidInput, "n must be at least 1");
  if (plan.m < 2) throw Error(ErrorKind::InvalidAlphabet, "alphabet size must be at least 2");
  if (plan.trials < 1) throw Error(ErrorKind::InvalidInput, "trials must be at least 1");
}

}  // namespace

ErrorEstimate estimate_pf(const SimPlan& plan) {
  validate(plan);
  const Pmf null = plan.null_pmf ? *plan.null_pmf : uniform(plan.m);
  const auto values = simulate_values(null, plan.n, std::span(&plan.stat, 1), plan.trials,
                                      plan_key(plan, SampleRole::Null), plan.streams);
  return make_estimate(count_rejections(values[0], plan.rule), plan.trials);
}

ErrorEstimate estimate_pm(const SimPlan& plan) {
  validate(plan);
  const Pmf alt = plan.alternative ? *plan.alternative : biuniform_worst_case(plan.m, plan.eps);
  const auto values = simulate_values(alt, plan.n, std::span(&plan.stat, 1), plan.trials,
                                      plan_key(plan, SampleRole::Alternative), plan.streams);
  return make_estimate(plan.trials - count_rejections(values[0], plan.rule), plan.trials);
}

MRule MRule::parse(const std::string& text) {
  MRule rule;
  std::string coefficient;
  if (text.rfind("n^", 0) == 0) {
    rule.form = Form::Power;
    coefficient = text.substr(2);
  } else if (text.size() > 2 && text.compare(text.size() - 2, 2, "*n") == 0) {
    rule.form = Form::Linear;
    coefficient = text.substr(0, text.size() - 2);
  } else {
    throw Error(ErrorKind::InvalidInput, "m-rule must look like 'n^A' or 'C*n', got '" + text + "'");
  }
  std::size_t used = 0;
  try {
    rule.a = std::stod(coefficient, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != coefficient.size() || !(rule.a > 0.0)) {
    throw Error(ErrorKind::InvalidInput, "bad m-rule coefficient in '" + text + "'");
  }
  return rule;
}

std::size_t MRule::apply(std::int64_t n) const {
  const double nd = static_cast<double>(n);
  const double raw = form == Form::Power ? std::pow(nd, a) : a * nd;
  // Integer-valued results (e.g. 100^1.5) must not be bumped up by rounding noise.
  const double nearest = std::round(raw);
  const double value = std::abs(raw - nearest) <= 1e-9 * std::max(1.0, raw) ? nearest : std::ceil(raw);
  if (!(value >= 2.0) || value > 4e18) {
    throw Error(ErrorKind::InvalidAlphabet, "m-rule gives m = " + std::to_string(value) +
                                                " for n = " + std::to_string(n));
  }
  return static_cast<std::size_t>(value);
}

std::string MRule::to_string() const {
  std::ostringstream os;
  os.precision(12);
  if (form == Form::Power) {
    os << "n^" << a;
  } else {
    os << a << "*n";
  }
  return os.str();
}

std::vector<SweepRow> sweep(const SweepConfig& config) {
  std::vector<SweepRow> rows;
  rows.reserve(config.n_list.size());
  for (std::int64_t n : config.n_list) {
    SimPlan plan;
    plan.n = n;
    plan.m = config.m_rule.apply(n);
    plan.eps = config.eps;
    plan.stat = config.stat;
    plan.rule = make_threshold(config.stat, config.tau, n, plan.m, config.eps);
    plan.trials = config.trials;
    plan.seed = config.seed;
    plan.streams = config.streams;

    SweepRow row;
    row.n = n;
    row.m = plan.m;
    row.r = static_cast<double>(n) * static_cast<double>(n) / static_cast<double>(plan.m);
    row.threshold = plan.rule.threshold;
    row.pf = estimate_pf(plan);
    row.pm = estimate_pm(plan);
    if (row.pf.exceed_count == 0) row.flags.emplace_back("zero-pf");
    if (row.pm.exceed_count == 0) row.flags.emplace_back("zero-pm");
    if (row.pf.exceed_count < 20) row.flags.emplace_back("low-pf");
    if (row.pm.exceed_count < 20) row.flags.emplace_back("low-pm");
    if (row.pf.exceed_count < 20 || row.pm.exceed_count < 20) {
      warn("n = " + std::to_string(n) + ": fewer than 20 error events; increase trials");
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

PartitionMap::PartitionMap(std::function<double(double)> quantile, std::size_t m) {
  if (m < 2) throw Error(ErrorKind::InvalidAlphabet, "alphabet size must be at least 2");
  edges_.reserve(m + 1);
  for (std::size_t j = 0; j <= m; ++j) {
    const double edge = quantile(static_cast<double>(j) / static_cast<double>(m));
    if (std::isnan(edge) || (!edges_.empty() && edge < edges_.back())) {
      throw Error(ErrorKind::InvalidInput, "quantile must be monotone and defined on [0, 1]");
    }
    edges_.push_back(edge);
  }
}

std::size_t PartitionMap::operator()(double y) const {
  if (std::isnan(y) || y < edges_.front() || y > edges_.back()) {
    std::ostringstream os;
    os << "observation " << y << " outside [" << edges_.front() << ", " << edges_.back() << "]";
    throw Error(ErrorKind::Domain, os.str());
  }
  const auto it = std::upper_bound(edges_.begin() + 1, edges_.end() - 1, y);
  return static_cast<std::size_t>(it - (edges_.begin() + 1));
}

}  // namespace gee
