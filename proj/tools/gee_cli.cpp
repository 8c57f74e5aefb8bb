// gee: command-line front end for the generalized-error-exponent toolkit.
//
// Exit codes: 0 success, 2 usage error, 3 computation error.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gee/error.hpp"
#include "gee/exponents.hpp"
#include "gee/montecarlo.hpp"
#include "gee/oracle.hpp"
#include "gee/pmf.hpp"
#include "gee/statistics.hpp"
#include "gee/version.hpp"

using json = nlohmann::ordered_json;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitCompute = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

bool is_usage_kind(gee::ErrorKind kind) {
  using gee::ErrorKind;
  switch (kind) {
    case ErrorKind::InvalidAlphabet:
    case ErrorKind::InvalidEps:
    case ErrorKind::InvalidThreshold:
    case ErrorKind::InvalidInput:
    case ErrorKind::InvalidSubset:
    case ErrorKind::InvalidKappa:
      return true;
    default:
      return false;
  }
}

std::string format_float(double v) {
  if (v == 0.0) return "0";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct Common {
  std::string out;
  bool no_timestamp = false;
};

json metadata(const std::string& command, const json& params, const Common& common,
              std::optional<std::uint64_t> seed = std::nullopt) {
  json meta;
  meta["tool"] = "gee";
  meta["version"] = std::string(gee::kVersion);
  meta["command"] = command;
  if (seed) {
    meta["seed"] = *seed;
    meta["rng"] = std::string(gee::kRngAlgorithm);
  }
  if (!common.no_timestamp) meta["timestamp"] = utc_timestamp();
  meta["params"] = params;
  return meta;
}

void emit(const std::string& text, const Common& common) {
  if (common.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream file(common.out, std::ios::binary);
  if (!file) throw IoError("cannot open '" + common.out + "' for writing");
  file << text;
  file.flush();
  if (!file) throw IoError("failed writing '" + common.out + "'");
}

void emit_json(json body, const json& meta, const Common& common) {
  body["metadata"] = meta;
  emit(body.dump(2) + "\n", common);
}

/// CSV with one leading "# {metadata}" comment line, then the header.
std::string csv_preamble(const json& meta) { return "# " + meta.dump() + "\n"; }

void add_common(CLI::App* cmd, Common& common) {
  cmd->add_option("--out", common.out, "Output file (stdout when omitted)");
  cmd->add_flag("--no-timestamp", common.no_timestamp, "Omit the timestamp from metadata");
}

void require_eps(double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw UsageError("--eps must lie in (0, 1)");
}

std::uint64_t parse_trials(const std::string& text) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    throw UsageError("--trials: not a number: " + text);
  }
  if (used != text.size() || !(value >= 1.0) || value != std::floor(value) || value > 1e15) {
    throw UsageError("--trials must be a positive integer, got " + text);
  }
  return static_cast<std::uint64_t>(value);
}

std::vector<std::int64_t> parse_n_list(const std::string& text) {
  std::vector<std::int64_t> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    long long v = 0;
    try {
      v = std::stoll(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size() || v < 1) throw UsageError("--n: bad sample size '" + item + "'");
    values.push_back(v);
  }
  return values;
}

struct StatOptions {
  std::string stat = "coincidence";
  std::vector<double> weights;
};

void add_stat_options(CLI::App* cmd, StatOptions& opts) {
  cmd->add_option("--stat", opts.stat,
                  "coincidence | pearson | pearson-truncated | extended-coincidence | "
                  "weighted-coincidence")
      ->capture_default_str();
  cmd->add_option("--weights", opts.weights, "Extended-coincidence weights v_2,v_3,...")
      ->delimiter(',');
}

gee::SeparableStatistic build_stat(const StatOptions& opts, std::size_t m) {
  switch (gee::parse_stat_kind(opts.stat)) {
    case gee::StatKind::Coincidence: return gee::SeparableStatistic::coincidence();
    case gee::StatKind::Pearson: return gee::SeparableStatistic::pearson();
    case gee::StatKind::PearsonTruncated: return gee::SeparableStatistic::pearson_truncated();
    case gee::StatKind::ExtendedCoincidence:
      return gee::SeparableStatistic::extended_coincidence(opts.weights);
    case gee::StatKind::WeightedCoincidence:
      return gee::SeparableStatistic::weighted_coincidence(gee::uniform(m));
  }
  throw UsageError("unknown statistic");
}

struct ThresholdOptions {
  std::optional<double> tau;
  std::optional<double> tau_abs;
  bool equalize = false;
};

void add_threshold_options(CLI::App* cmd, ThresholdOptions& opts) {
  auto* tau = cmd->add_option("--tau", opts.tau, "Normalized threshold");
  auto* eq = cmd->add_flag("--equalize", opts.equalize, "Use the threshold with J_F = J_M");
  auto* abs = cmd->add_option("--tau-abs", opts.tau_abs, "Absolute threshold in statistic units");
  tau->excludes(eq)->excludes(abs);
  eq->excludes(abs);
}

gee::ThresholdRule build_rule(const gee::SeparableStatistic& stat, const ThresholdOptions& opts,
                              std::int64_t n, std::size_t m, std::optional<double> eps) {
  if (opts.tau_abs) return gee::ThresholdRule::absolute(stat.kind(), *opts.tau_abs, n, m);
  if (!eps) throw UsageError("--eps is required unless --tau-abs is given");
  double tau = 0.0;
  if (opts.equalize) {
    tau = gee::equalizing_tau(*eps);
  } else if (opts.tau) {
    tau = *opts.tau;
  } else if (stat.kind() != gee::StatKind::Pearson) {
    throw UsageError("one of --tau, --equalize, --tau-abs is required");
  }
  return gee::make_threshold(stat, tau, n, m, *eps);
}

json rule_json(const gee::ThresholdRule& rule) {
  json j;
  j["kind"] = std::string(gee::to_string(rule.kind));
  j["tau"] = rule.tau;
  j["center"] = rule.center;
  j["offset"] = rule.offset;
  j["threshold"] = rule.threshold;
  j["clamped"] = rule.clamped;
  return j;
}

json estimate_json(const gee::ErrorEstimate& est) {
  return json{{"p_hat", est.p_hat},
              {"exceed_count", est.exceed_count},
              {"trials", est.trials},
              {"ci95_halfwidth", est.ci95_halfwidth}};
}

json threshold_params(const ThresholdOptions& opts) {
  json j;
  if (opts.tau) j["tau"] = *opts.tau;
  if (opts.tau_abs) j["tau_abs"] = *opts.tau_abs;
  j["equalize"] = opts.equalize;
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Identity testing on large alphabets: exponents, exact laws, simulation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(gee::kVersion));

  Common common;
  std::uint64_t seed = 0;
  std::size_t streams = 1;

  // region
  double region_eps = 0.0;
  std::size_t region_points = 101;
  auto* region = app.add_subcommand("region", "Achievable-region boundary as CSV tau,jf,jm");
  region->add_option("--eps", region_eps, "TV radius of the alternative set")->required();
  region->add_option("--points", region_points, "Number of boundary points")->capture_default_str();
  add_common(region, common);

  // exponents
  double exp_eps = 0.0;
  std::optional<double> exp_tau;
  bool exp_equalize = false;
  auto* exponents = app.add_subcommand("exponents", "Exponent pair at one threshold as JSON");
  exponents->add_option("--eps", exp_eps)->required();
  auto* exp_tau_opt = exponents->add_option("--tau", exp_tau, "Normalized threshold");
  auto* exp_eq_opt = exponents->add_flag("--equalize", exp_equalize, "Use the equalizing threshold");
  exp_tau_opt->excludes(exp_eq_opt);
  add_common(exponents, common);

  // worst-case
  std::size_t wc_m = 0;
  double wc_eps = 0.0;
  bool wc_brute = false;
  std::int64_t wc_mesh = 200;
  auto* worst = app.add_subcommand("worst-case", "Least-favourable bi-uniform alternative");
  worst->add_option("--m", wc_m)->required();
  worst->add_option("--eps", wc_eps)->required();
  worst->add_flag("--bruteforce", wc_brute, "Also search the simplex grid (m <= 6)");
  worst->add_option("--mesh", wc_mesh, "Grid resolution 1/mesh")->capture_default_str();
  add_common(worst, common);

  // simulate
  StatOptions sim_stat;
  ThresholdOptions sim_thr;
  std::int64_t sim_n = 0;
  std::size_t sim_m = 0;
  double sim_eps = 0.0;
  std::string sim_trials = "100000";
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo estimates of P_F and P_M");
  add_stat_options(simulate, sim_stat);
  add_threshold_options(simulate, sim_thr);
  simulate->add_option("--n", sim_n)->required();
  simulate->add_option("--m", sim_m)->required();
  simulate->add_option("--eps", sim_eps)->required();
  simulate->add_option("--trials", sim_trials)->capture_default_str();
  simulate->add_option("--seed", seed)->envname("GEE_SEED");
  simulate->add_option("--streams", streams)->capture_default_str();
  add_common(simulate, common);

  // sweep
  StatOptions sw_stat;
  ThresholdOptions sw_thr;
  double sw_eps = 0.0;
  std::string sw_n = "1000,2000,4000";
  std::string sw_rule = "n^1.5";
  std::string sw_trials = "1000000";
  auto* sweep = app.add_subcommand("sweep", "Regime sweep as CSV n,m,r,pf_hat,pf_ci,pm_hat,pm_ci,flags");
  add_stat_options(sweep, sw_stat);
  add_threshold_options(sweep, sw_thr);
  sweep->add_option("--eps", sw_eps)->required();
  sweep->add_option("--n", sw_n, "Comma-separated sample sizes")->capture_default_str();
  sweep->add_option("--m-rule", sw_rule, "n^A or C*n")->capture_default_str();
  sweep->add_option("--trials", sw_trials)->capture_default_str();
  sweep->add_option("--seed", seed)->envname("GEE_SEED");
  sweep->add_option("--streams", streams)->capture_default_str();
  add_common(sweep, common);

  // oracle
  StatOptions or_stat;
  ThresholdOptions or_thr;
  std::int64_t or_n = 0;
  std::size_t or_m = 0;
  std::optional<double> or_eps;
  std::uint64_t or_budget = gee::OracleOptions{}.budget;
  bool or_dist = false;
  auto* oracle = app.add_subcommand("oracle", "Exact error probabilities by dynamic programming");
  add_stat_options(oracle, or_stat);
  add_threshold_options(oracle, or_thr);
  oracle->add_option("--n", or_n)->required();
  oracle->add_option("--m", or_m)->required();
  oracle->add_option("--eps", or_eps, "Alternative radius; enables P_M at the worst case");
  oracle->add_option("--budget", or_budget, "DP cell budget")->capture_default_str();
  oracle->add_flag("--dist", or_dist, "Include the exact null distribution");
  add_common(oracle, common);

  // fdiv-check
  std::string fd_name = "kl";
  double fd_range = 100.0;
  std::size_t fd_points = 100000;
  auto* fdiv = app.add_subcommand("fdiv-check", "Grid certificate for the f-divergence conditions");
  fdiv->add_option("--f", fd_name, "kl | chi2 | tv-like")->capture_default_str();
  fdiv->add_option("--range", fd_range, "Condition-2 range [0, X]")->capture_default_str();
  fdiv->add_option("--points", fd_points, "Condition-2 grid points")->capture_default_str();
  add_common(fdiv, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*region) {
      require_eps(region_eps);
      if (region_points < 2) throw UsageError("--points must be at least 2");
      const auto curve = gee::region_curve(region_eps, region_points);
      const json params{{"eps", region_eps}, {"points", region_points}};
      std::string text = csv_preamble(metadata("region", params, common));
      text += "tau,jf,jm\n";
      for (const auto& pt : curve) {
        text += format_float(pt.tau) + "," + format_float(pt.jf) + "," + format_float(pt.jm) + "\n";
      }
      emit(text, common);
    } else if (*exponents) {
      require_eps(exp_eps);
      if (!exp_tau && !exp_equalize) throw UsageError("one of --tau or --equalize is required");
      const double kb = gee::kappa_bar(exp_eps);
      const double tau = exp_equalize ? gee::equalizing_tau(exp_eps) : *exp_tau;
      if (!(tau >= 0.0 && tau <= kb - 1.0 + 1e-12)) {
        throw UsageError("--tau must lie in [0, kappa_bar(eps) - 1] = [0, " + format_float(kb - 1.0) + "]");
      }
      json body{{"eps", exp_eps},
                {"kappa_bar", kb},
                {"tau", tau},
                {"jf", gee::jf_star(tau)},
                {"jm", gee::jm_star(tau, exp_eps)}};
      json params{{"eps", exp_eps}, {"equalize", exp_equalize}};
      if (exp_tau) params["tau"] = *exp_tau;
      emit_json(body, metadata("exponents", params, common), common);
    } else if (*worst) {
      require_eps(wc_eps);
      if (wc_m < 2) throw UsageError("--m must be at least 2");
      const auto q = gee::biuniform_worst_case(wc_m, wc_eps);
      const auto p = gee::uniform(wc_m);
      const double value = gee::chi_square_functional(q, p);
      json body{{"m", wc_m},
                {"eps", wc_eps},
                {"pmf", std::vector<double>(q.probs().begin(), q.probs().end())},
                {"chi_square_functional", value},
                {"tv_distance", gee::tv_distance(q, p)},
                {"kappa_bar", gee::kappa_bar(wc_eps)}};
      if (wc_brute) {
        if (wc_m > 6) throw UsageError("--bruteforce supports m <= 6");
        if (wc_mesh < 1) throw UsageError("--mesh must be positive");
        const auto search = gee::worst_case_bruteforce(wc_m, wc_eps, wc_mesh);
        body["bruteforce"] = json{
            {"mesh", wc_mesh},
            {"argmin", std::vector<double>(search.argmin.probs().begin(), search.argmin.probs().end())},
            {"min_value", search.min_value},
            {"gap", std::abs(value - search.min_value)}};
      }
      const json params{{"m", wc_m}, {"eps", wc_eps}, {"bruteforce", wc_brute}, {"mesh", wc_mesh}};
      emit_json(body, metadata("worst-case", params, common), common);
    } else if (*simulate) {
      require_eps(sim_eps);
      if (sim_n < 1 || sim_m < 2) throw UsageError("need --n >= 1 and --m >= 2");
      if (streams < 1) throw UsageError("--streams must be positive");
      gee::SimPlan plan;
      plan.n = sim_n;
      plan.m = sim_m;
      plan.eps = sim_eps;
      plan.stat = build_stat(sim_stat, sim_m);
      plan.rule = build_rule(plan.stat, sim_thr, sim_n, sim_m, sim_eps);
      plan.trials = parse_trials(sim_trials);
      plan.seed = seed;
      plan.streams = streams;
      json body{{"n", sim_n},
                {"m", sim_m},
                {"r", static_cast<double>(sim_n) * static_cast<double>(sim_n) / static_cast<double>(sim_m)},
                {"rule", rule_json(plan.rule)},
                {"pf", estimate_json(gee::estimate_pf(plan))},
                {"pm", estimate_json(gee::estimate_pm(plan))}};
      json params{{"stat", sim_stat.stat}, {"weights", sim_stat.weights}, {"n", sim_n}, {"m", sim_m},
                  {"eps", sim_eps}, {"trials", plan.trials}, {"streams", streams},
                  {"threshold", threshold_params(sim_thr)}};
      emit_json(body, metadata("simulate", params, common, seed), common);
    } else if (*sweep) {
      require_eps(sw_eps);
      if (streams < 1) throw UsageError("--streams must be positive");
      gee::SweepConfig config;
      config.eps = sw_eps;
      config.n_list = parse_n_list(sw_n);
      config.m_rule = gee::MRule::parse(sw_rule);
      config.trials = parse_trials(sw_trials);
      config.seed = seed;
      config.streams = streams;
      if (sw_thr.tau_abs) throw UsageError("sweep takes --tau or --equalize, not --tau-abs");
      if (sw_thr.equalize) {
        config.tau = gee::equalizing_tau(sw_eps);
      } else if (sw_thr.tau) {
        config.tau = *sw_thr.tau;
      } else if (sw_stat.stat != "pearson") {
        throw UsageError("one of --tau or --equalize is required");
      }
      // The statistic's reference (weighted test) depends on m; rebuilt per row.
      if (gee::parse_stat_kind(sw_stat.stat) == gee::StatKind::WeightedCoincidence) {
        throw UsageError("sweep does not support weighted-coincidence; use simulate per (n, m)");
      }
      config.stat = build_stat(sw_stat, 2);
      const auto rows = gee::sweep(config);
      json params{{"stat", sw_stat.stat}, {"weights", sw_stat.weights}, {"eps", sw_eps},
                  {"tau", config.tau}, {"n", config.n_list}, {"m_rule", config.m_rule.to_string()},
                  {"trials", config.trials}, {"streams", streams},
                  {"threshold", threshold_params(sw_thr)}};
      std::string text = csv_preamble(metadata("sweep", params, common, seed));
      text += "n,m,r,pf_hat,pf_ci,pm_hat,pm_ci,flags\n";
      for (const auto& row : rows) {
        std::string flags;
        for (const auto& f : row.flags) flags += (flags.empty() ? "" : "|") + f;
        text += std::to_string(row.n) + "," + std::to_string(row.m) + "," + format_float(row.r) + "," +
                format_float(row.pf.p_hat) + "," + format_float(row.pf.ci95_halfwidth) + "," +
                format_float(row.pm.p_hat) + "," + format_float(row.pm.ci95_halfwidth) + "," + flags +
                "\n";
      }
      emit(text, common);
    } else if (*oracle) {
      if (or_n < 0 || or_m < 2) throw UsageError("need --n >= 0 and --m >= 2");
      if (or_eps) require_eps(*or_eps);
      const auto stat = build_stat(or_stat, or_m);
      const auto rule = build_rule(stat, or_thr, or_n, or_m, or_eps);
      gee::OracleOptions options;
      options.budget = or_budget;
      const auto null = gee::uniform(or_m);
      const auto law = gee::exact_distribution(stat, null, or_n, options);
      json body{{"stat", or_stat.stat}, {"n", or_n}, {"m", or_m}, {"rule", rule_json(rule)},
                {"pf", law.reject_probability(rule)}, {"null_mean", law.mean()}};
      if (or_eps) {
        const auto alt = gee::biuniform_worst_case(or_m, *or_eps);
        const auto alt_law = gee::exact_distribution(stat, alt, or_n, options);
        body["pm"] = alt_law.total() - alt_law.reject_probability(rule);
      }
      if (or_dist) body["null_distribution"] = json{{"support", law.support}, {"probs", law.probs}};
      json params{{"stat", or_stat.stat}, {"weights", or_stat.weights}, {"n", or_n}, {"m", or_m},
                  {"budget", or_budget}, {"threshold", threshold_params(or_thr)}};
      if (or_eps) params["eps"] = *or_eps;
      emit_json(body, metadata("oracle", params, common), common);
    } else if (*fdiv) {
      gee::ScalarFunction f;
      if (fd_name == "kl") {
        f = [](double x) { return (x > 0.0 ? x * std::log(x) : 0.0) - (x - 1.0); };
      } else if (fd_name == "chi2") {
        f = [](double x) { return (x - 1.0) * (x - 1.0); };
      } else if (fd_name == "tv-like") {
        f = [](double x) { return 0.5 * std::abs(x - 1.0); };
      } else {
        throw UsageError("--f must be one of kl, chi2, tv-like");
      }
      if (!(fd_range > 0.0) || fd_points < 1) throw UsageError("need --range > 0 and --points >= 1");
      gee::FdivGrid grid;
      grid.cond2_range = fd_range;
      grid.cond2_points = fd_points;
      const auto cert = gee::check_fdiv_conditions(f, grid);
      json body{{"f", fd_name}, {"cond1", cert.cond1}, {"witness", cert.witness},
                {"cond2", cert.cond2}, {"alpha", cert.alpha}};
      const json params{{"f", fd_name}, {"range", fd_range}, {"points", fd_points}};
      emit_json(body, metadata("fdiv-check", params, common), common);
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const gee::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return is_usage_kind(e.kind()) ? kExitUsage : kExitCompute;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitCompute;
  }
  return 0;
}
