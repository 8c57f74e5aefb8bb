// Acceptance harness: one PASS/FAIL line per criterion.
//
//   acceptance [--only 1,2,...] [--skip 8] [--cli PATH]
//
// Exit status is 0 when every selected criterion passes.

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "gee/error.hpp"
#include "gee/exponents.hpp"
#include "gee/montecarlo.hpp"
#include "gee/oracle.hpp"
#include "gee/pmf.hpp"
#include "gee/statistics.hpp"
#include "support/oracles.hpp"

namespace {

using Clock = std::chrono::steady_clock;
using Counts = std::vector<std::int64_t>;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* format, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, a);
  return buf;
}

std::string sci(double v) { return fmt("%.3g", v); }

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

const std::vector<double> kEpsGrid{0.1, 0.35, 0.45, 0.6, 0.8};

Outcome exponent_formulas() {
  const auto start = Clock::now();
  double worst = 0.0;
  for (double eps : kEpsGrid) {
    const double kb = gee::kappa_bar(eps);
    for (int i = 0; i < 100; ++i) {
      const double tau = (kb - 1.0) * i / 99.0;
      worst = std::max(worst, std::abs(gee::jf_star(tau) - oracle::jf_numeric(tau)));
      worst = std::max(worst, std::abs(gee::jm_star(tau, eps) - oracle::jm_numeric(tau, kb)));
    }
  }
  const double elapsed = seconds_since(start);
  return {worst <= 1e-9 && elapsed < 1.0,
          "max |closed - golden-section| = " + sci(worst) + " (tol 1e-9), " + fmt("%.3f", elapsed) +
              " s (limit 1 s)"};
}

Outcome rate_identity() {
  double worst = 0.0;
  for (double eps : kEpsGrid) {
    const double kb = gee::kappa_bar(eps);
    for (int i = 0; i < 100; ++i) {
      const double tau = (kb - 1.0) * i / 99.0;
      worst = std::max(worst, std::abs(gee::jm_star(tau, eps) - gee::rate_function(tau, kb)));
    }
  }
  return {worst <= 1e-9, "max |jm_star - rate_function| = " + sci(worst) + " (tol 1e-9)"};
}

Outcome equalizer() {
  struct Target {
    double eps, tau, j;
  };
  bool ok = true;
  std::string detail;
  for (const Target& t : {Target{0.35, 0.228761, 0.012180}, Target{0.45, 0.365183, 0.029889}}) {
    const double kb = gee::kappa_bar(t.eps);
    const double tau = gee::equalizing_tau(t.eps);
    const double root = oracle::bisect(
        [kb](double x) { return oracle::jf_numeric(x) - oracle::jm_numeric(x, kb); }, 0.0, kb - 1.0);
    const double jf = gee::jf_star(tau), jm = gee::jm_star(tau, t.eps);
    const double jf_oracle = oracle::jf_numeric(root), jm_oracle = oracle::jm_numeric(root, kb);
    ok = ok && std::abs(tau - t.tau) <= 1e-5 && std::abs(root - t.tau) <= 1e-5 &&
         std::abs(jf - t.j) <= 1e-5 && std::abs(jm - t.j) <= 1e-5 && std::abs(jf_oracle - t.j) <= 1e-5 &&
         std::abs(jm_oracle - t.j) <= 1e-5;
    detail += fmt("eps=%.2f: ", t.eps) + "tau*=" + fmt("%.7f", tau) + " (bisection " + fmt("%.7f", root) +
              "), jf=" + fmt("%.7f", jf) + " jm=" + fmt("%.7f", jm) + "; ";
  }
  return {ok, detail + "tol 1e-5"};
}

Outcome worst_case_lemma() {
  const auto start = Clock::now();
  double worst_margin = 1e9;
  bool ok = true;
  for (std::size_t m : {3, 4, 5}) {
    for (double eps : {0.2, 0.25, 0.3}) {
      const auto found = gee::worst_case_bruteforce(m, eps, 200);
      const double margin = found.min_value - (1 + 4 * eps * eps);
      worst_margin = std::min(worst_margin, margin);
      ok = ok && margin >= -0.02;
    }
  }
  // Exact attainment holds for even m; odd m cannot split the mass evenly.
  double attain = 0.0;
  for (double eps : {0.2, 0.25, 0.3}) {
    const double v = gee::chi_square_functional(gee::biuniform_worst_case(4, eps), gee::uniform(4));
    attain = std::max(attain, std::abs(v - (1 + 4 * eps * eps)));
  }
  const double elapsed = seconds_since(start);
  ok = ok && attain <= 1e-12 && elapsed < 120.0;
  return {ok, "min over grid - (1+4eps^2) >= " + sci(worst_margin) + " (floor -0.02); bi-uniform m=4 error " +
                  sci(attain) + "; " + fmt("%.2f", elapsed) + " s (limit 120 s)"};
}

Outcome oracle_exactness() {
  const std::vector<double> weights{0.0, 0.5, 2.0};
  double prob_err = 0.0, support_err = 0.0, mean_err = 0.0;
  bool same_support = true;
  for (std::size_t m = 2; m <= 4; ++m) {
    std::vector<double> ref(m);
    for (std::size_t j = 0; j < m; ++j) ref[j] = static_cast<double>(j + 1) / static_cast<double>(m * (m + 1) / 2);
    const std::vector<double> uni(m, 1.0 / static_cast<double>(m));
    struct Case {
      gee::SeparableStatistic stat;
      std::function<double(const Counts&)> value;
    };
    auto pearson_with = [](std::vector<double> p) {
      return [p](const Counts& c) {
        double n = 0;
        for (auto k : c) n += static_cast<double>(k);
        return n == 0 ? 0.0 : oracle::pearson(c, p);
      };
    };
    const std::vector<Case> cases{
        {gee::SeparableStatistic::coincidence(), oracle::coincidence},
        {gee::SeparableStatistic::pearson(), pearson_with(uni)},
        {gee::SeparableStatistic::pearson(gee::Pmf(ref)), pearson_with(ref)},
        {gee::SeparableStatistic::pearson_truncated(), oracle::pearson_truncated},
        {gee::SeparableStatistic::extended_coincidence(weights),
         [&weights](const Counts& c) { return oracle::extended(c, weights); }},
        {gee::SeparableStatistic::weighted_coincidence(gee::uniform(m)),
         [uni](const Counts& c) { return oracle::weighted(c, uni); }},
        {gee::SeparableStatistic::weighted_coincidence(gee::Pmf(ref)),
         [ref](const Counts& c) { return oracle::weighted(c, ref); }},
    };
    const auto alt = gee::biuniform_worst_case(m, 0.3);
    const std::vector<std::vector<double>> laws{uni, ref, {alt.probs().begin(), alt.probs().end()}};
    for (const auto& c : cases) {
      for (const auto& p : laws) {
        for (int n = 0; n <= 5; ++n) {
          const auto dp = gee::exact_distribution(c.stat, gee::Pmf(p), n);
          const auto law = oracle::enumerate_law(p, n, c.value);
          if (law.size() != dp.support.size()) {
            same_support = false;
            continue;
          }
          std::size_t i = 0;
          for (const auto& [value, prob] : law) {
            support_err = std::max(support_err, std::abs(dp.support[i] - value));
            prob_err = std::max(prob_err, std::abs(dp.probs[i] - prob));
            ++i;
          }
          mean_err = std::max(mean_err, std::abs(gee::exact_expectation(c.stat, gee::Pmf(p), n) - dp.mean()));
        }
      }
    }
  }
  double closed_err = 0.0;
  const auto star = gee::SeparableStatistic::coincidence();
  for (std::int64_t n = 1; n <= 200; ++n) {
    for (std::size_t m : {2, 3, 7, 10, 31, 100, 997, 1000, 5000, 10000}) {
      // log1p keeps 1 - 1/m from rounding before the power.
      const double closed = -static_cast<double>(n) *
                            std::exp(static_cast<double>(n - 1) * std::log1p(-1.0 / static_cast<double>(m)));
      closed_err = std::max(closed_err, std::abs(gee::exact_expectation(star, gee::uniform(m), n) - closed));
      closed_err = std::max(closed_err, std::abs(gee::uniform_null_expectation(star, n, m) - closed));
    }
  }
  same_support = same_support && support_err <= 1e-9;
  const bool ok = same_support && prob_err <= 1e-12 && mean_err <= 1e-10 && closed_err <= 1e-12;
  return {ok, std::string("supports ") + (same_support ? "identical" : "DIFFER") + ", max prob err " +
                  sci(prob_err) + " (tol 1e-12), mean err " + sci(mean_err) + " (tol 1e-10), E[S*] err " +
                  sci(closed_err) + " (tol 1e-12)"};
}

Outcome monte_carlo_calibration() {
  const auto start = Clock::now();
  const std::int64_t n = 12;
  const std::size_t m = 30;
  const double eps = 0.35;
  gee::SimPlan plan;
  plan.n = n;
  plan.m = m;
  plan.eps = eps;
  plan.rule = gee::make_threshold(plan.stat, 0.2, n, m, eps);
  plan.trials = 100000;
  const auto exact = gee::exact_error_probs(plan.stat, plan.rule, gee::uniform(m),
                                            gee::biuniform_worst_case(m, eps), n);
  const double sf = std::sqrt(exact.pf * (1 - exact.pf) / 1e5);
  const double sm = std::sqrt(exact.pm * (1 - exact.pm) / 1e5);
  std::string detail;
  bool ok = false;
  for (std::uint64_t seed : {20240601ull, 20240602ull}) {  // one re-seed permitted
    plan.seed = seed;
    const auto pf = gee::estimate_pf(plan);
    const auto pm = gee::estimate_pm(plan);
    const double zf = (pf.p_hat - exact.pf) / sf, zm = (pm.p_hat - exact.pm) / sm;
    detail += "seed " + std::to_string(seed) + ": pf " + fmt("%.5f", pf.p_hat) + " vs " + fmt("%.5f", exact.pf) +
              " (z=" + fmt("%.2f", zf) + "), pm " + fmt("%.5f", pm.p_hat) + " vs " + fmt("%.5f", exact.pm) +
              " (z=" + fmt("%.2f", zm) + "); ";
    if (std::abs(zf) <= 4 && std::abs(zm) <= 4) {
      ok = true;
      break;
    }
  }
  const double elapsed = seconds_since(start);
  return {ok && elapsed < 30.0, detail + fmt("%.2f", elapsed) + " s (limit 30 s)"};
}

Outcome structural_identities() {
  std::mt19937_64 pick(31337);
  std::uniform_int_distribution<std::size_t> msize(2, 200);
  const auto star = gee::SeparableStatistic::coincidence();
  const auto pearson = gee::SeparableStatistic::pearson();
  const auto ext = gee::SeparableStatistic::extended_coincidence({0.0, 0.5, 2.0, 1.0});
  std::uint64_t two_form = 0, coupling = 0, domination = 0, occupancy = 0;
  const int samples = 10000;
  for (int i = 0; i < samples; ++i) {
    const std::size_t m = msize(pick);
    std::uniform_int_distribution<std::int64_t> nsize(1, static_cast<std::int64_t>(2 * m));
    const std::int64_t n = nsize(pick);
    const auto p = (i % 2 == 0) ? gee::uniform(m) : gee::biuniform_worst_case(m, 0.3);
    gee::OccupancySampler sampler(p);
    gee::TrialRng rng(gee::derive_key(7, 7), static_cast<std::uint64_t>(i));
    const auto fp = sampler.sample(n, rng);
    const auto counts = sampler.counts();
    const Counts c(counts.begin(), counts.end());
    const double nd = static_cast<double>(n), md = static_cast<double>(m);

    const double occ_form = gee::evaluate(pearson, fp);
    const double direct = oracle::pearson(c, std::vector<double>(m, 1.0 / md));
    if (std::abs(occ_form - direct) > 1e-9 * std::max(1.0, std::abs(direct))) ++two_form;
    const double s_star = gee::evaluate(star, fp);
    if (occ_form < 2 * nd + s_star - nd * nd / md - 1e-9 * std::max(1.0, nd * nd / md)) ++coupling;
    if (gee::evaluate(ext, fp) < s_star) ++domination;
    std::int64_t level_sum = 0, total = 0;
    for (std::size_t l = 0; l < fp.phi.size(); ++l) {
      level_sum += static_cast<std::int64_t>(l) * fp.phi[l];
      total += fp.phi[l];
    }
    if (level_sum != n || total != static_cast<std::int64_t>(m)) ++occupancy;
  }
  const bool ok = two_form == 0 && coupling == 0 && domination == 0 && occupancy == 0;
  return {ok, std::to_string(samples) + " samples each; violations: two-form " + std::to_string(two_form) +
                  ", coupling " + std::to_string(coupling) + ", S*+ >= S* " + std::to_string(domination) +
                  ", occupancy " + std::to_string(occupancy)};
}

Outcome slope_reproduction() {
  const auto start = Clock::now();
  const double eps = 0.45;
  const double target = 0.029889;
  gee::SweepConfig config;
  config.eps = eps;
  config.tau = gee::equalizing_tau(eps);
  config.n_list = {1000, 2000, 4000, 8000};
  config.m_rule = gee::MRule::parse("n^1.5");
  config.trials = 1'000'000;
  config.seed = 7;
  const auto rows = gee::sweep(config);
  std::vector<gee::SlopeSample> pf, pm;
  std::string detail;
  for (const auto& row : rows) {
    pf.push_back({row.r, row.pf.p_hat});
    pm.push_back({row.r, row.pm.p_hat});
    detail += "n=" + std::to_string(row.n) + " r=" + fmt("%.2f", row.r) + " pf=" + fmt("%.3e", row.pf.p_hat) +
              " pm=" + fmt("%.3e", row.pm.p_hat) + "; ";
  }
  try {
    const double sf = gee::estimate_exponent(pf).slope;
    const double sm = gee::estimate_exponent(pm).slope;
    const bool ok = std::abs(sf - target) <= 0.35 * target && std::abs(sm - target) <= 0.35 * target;
    return {ok, detail + "slopes pf " + fmt("%.5f", sf) + " (" + fmt("%+.1f", 100 * (sf / target - 1)) +
                    "%), pm " + fmt("%.5f", sm) + " (" + fmt("%+.1f", 100 * (sm / target - 1)) +
                    "%), target 0.029889 +-35%; " + fmt("%.0f", seconds_since(start)) + " s"};
  } catch (const gee::Error& e) {
    return {false, detail + e.what()};
  }
}

Outcome pearson_degradation() {
  const double eps = 0.45;
  const std::int64_t n = 2000;
  const std::size_t m = gee::MRule::parse("n^1.5").apply(n);
  const std::uint64_t trials = 1'000'000;
  const std::vector<gee::SeparableStatistic> stats{gee::SeparableStatistic::coincidence(),
                                                   gee::SeparableStatistic::pearson()};
  gee::SimPlan plan;
  plan.n = n;
  plan.m = m;
  plan.eps = eps;
  plan.seed = 7;
  // Paired: both statistics see the same null samples as `sweep` would draw.
  const auto values = gee::simulate_values(gee::uniform(m), n, stats, trials,
                                           gee::plan_key(plan, gee::SampleRole::Null), 1);
  const auto coin_rule = gee::make_threshold(stats[0], gee::equalizing_tau(eps), n, m, eps);
  const auto pear_rule = gee::make_threshold(stats[1], 0.0, n, m, eps);
  const auto coin = gee::make_estimate(gee::count_rejections(values[0], coin_rule), trials);
  const auto pear = gee::make_estimate(gee::count_rejections(values[1], pear_rule), trials);
  const bool ok = pear.p_hat > coin.p_hat && pear.p_hat - pear.ci95_halfwidth > coin.p_hat + coin.ci95_halfwidth;
  return {ok, "n=2000 m=" + std::to_string(m) + ": Pearson pf " + fmt("%.5f", pear.p_hat) + " +- " +
                  fmt("%.5f", pear.ci95_halfwidth) + " (threshold " + fmt("%.3f", pear_rule.threshold) +
                  "), coincidence pf " + fmt("%.5f", coin.p_hat) + " +- " + fmt("%.5f", coin.ci95_halfwidth) +
                  "; required Pearson > coincidence with disjoint 95% CIs"};
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string cli_path;

Outcome determinism() {
  if (cli_path.empty()) return {false, "no --cli path given"};
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / ("gee_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const std::string flags =
      " sweep --eps 0.45 --equalize --n 200,400,800 --m-rule n^1.5 --trials 1e5 --seed 7 --no-timestamp";
  std::vector<std::string> outputs;
  bool ran = true;
  for (int streams : {1, 1, 8, 8}) {
    const fs::path out = dir / ("run" + std::to_string(outputs.size()) + ".csv");
    const std::string cmd = "\"" + cli_path + "\"" + flags + " --streams " + std::to_string(streams) + " --out \"" +
                            out.string() + "\" 2>/dev/null";
    const int status = std::system(cmd.c_str());
    ran = ran && WIFEXITED(status) && WEXITSTATUS(status) == 0;
    outputs.push_back(read_file(out));
  }
  std::error_code ec;
  fs::remove_all(dir, ec);
  auto body = [](const std::string& csv) { return csv.substr(csv.find('\n') + 1); };
  const bool same1 = outputs[0] == outputs[1];
  const bool same8 = outputs[2] == outputs[3];
  const bool cross = body(outputs[0]) == body(outputs[2]);
  const bool ok = ran && same1 && same8 && !outputs[0].empty();
  return {ok, std::string("streams=1 repeat ") + (same1 ? "identical" : "DIFFERENT") + ", streams=8 repeat " +
                  (same8 ? "identical" : "DIFFERENT") + "; data rows across 1 vs 8 " +
                  (cross ? "identical" : "DIFFERENT") + " (" + std::to_string(outputs[0].size()) + " bytes)"};
}

struct Criterion {
  int id;
  const char* name;
  Outcome (*run)();
};

const Criterion kCriteria[] = {
    {1, "exponent formula agreement", exponent_formulas},
    {2, "rate-function identity", rate_identity},
    {3, "equalizer reproduction", equalizer},
    {4, "worst-case lemma at desk scale", worst_case_lemma},
    {5, "oracle exactness", oracle_exactness},
    {6, "Monte Carlo calibration", monte_carlo_calibration},
    {7, "structural identities", structural_identities},
    {8, "slope reproduction (long-running)", slope_reproduction},
    {9, "Pearson degradation", pearson_degradation},
    {10, "sweep determinism", determinism},
};

std::set<int> parse_ids(const std::string& text) {
  std::set<int> ids;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    if (!item.empty()) ids.insert(std::stoi(item));
  }
  return ids;
}

void quiet_sink(std::string_view) {}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only, skip;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--only" && i + 1 < argc) {
      only = parse_ids(argv[++i]);
    } else if (arg == "--skip" && i + 1 < argc) {
      skip = parse_ids(argv[++i]);
    } else if (arg == "--cli" && i + 1 < argc) {
      cli_path = argv[++i];
    } else {
      std::cerr << "usage: acceptance [--only LIST] [--skip LIST] [--cli PATH]\n";
      return 2;
    }
  }
  gee::set_warning_sink(quiet_sink);

  int failures = 0;
  for (const auto& c : kCriteria) {
    if ((!only.empty() && !only.count(c.id)) || skip.count(c.id)) continue;
    Outcome outcome;
    try {
      outcome = c.run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    failures += outcome.pass ? 0 : 1;
    std::cout << (outcome.pass ? "[PASS] " : "[FAIL] ") << "criterion " << c.id << ": " << c.name << " | "
              << outcome.detail << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
