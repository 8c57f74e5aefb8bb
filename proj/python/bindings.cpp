#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gee/error.hpp"
#include "gee/exponents.hpp"
#include "gee/montecarlo.hpp"
#include "gee/oracle.hpp"
#include "gee/pmf.hpp"
#include "gee/statistics.hpp"
#include "gee/version.hpp"

namespace py = pybind11;

namespace {

std::vector<double> to_vector(const gee::Pmf& p) { return {p.probs().begin(), p.probs().end()}; }

gee::SeparableStatistic make_stat(const std::string& name, std::optional<std::vector<double>> weights,
                                  std::optional<std::vector<double>> reference) {
  switch (gee::parse_stat_kind(name)) {
    case gee::StatKind::Coincidence:
      return gee::SeparableStatistic::coincidence();
    case gee::StatKind::Pearson:
      return reference ? gee::SeparableStatistic::pearson(gee::Pmf(*reference))
                       : gee::SeparableStatistic::pearson();
    case gee::StatKind::PearsonTruncated:
      return gee::SeparableStatistic::pearson_truncated();
    case gee::StatKind::ExtendedCoincidence:
      if (!weights) throw gee::Error(gee::ErrorKind::InvalidInput, "extended-coincidence needs weights");
      return gee::SeparableStatistic::extended_coincidence(*weights);
    case gee::StatKind::WeightedCoincidence:
      if (!reference) throw gee::Error(gee::ErrorKind::InvalidInput, "weighted-coincidence needs a reference");
      return gee::SeparableStatistic::weighted_coincidence(gee::Pmf(*reference));
  }
  throw gee::Error(gee::ErrorKind::InvalidInput, "unknown statistic");
}

}  // namespace

PYBIND11_MODULE(_gee, mod) {
  mod.doc() = "Native core of the gee package.";
  mod.attr("__version__") = std::string(gee::kVersion);

  static py::exception<gee::Error> gee_error(mod, "GeeError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr ptr) {
    try {
      if (ptr) std::rethrow_exception(ptr);
    } catch (const gee::Error& e) {
      py::set_error(gee_error, e.what());
    }
  });

  mod.def("kappa_bar", &gee::kappa_bar, py::arg("eps"));
  mod.def("jf_star", &gee::jf_star, py::arg("tau"));
  mod.def("jm_star", &gee::jm_star, py::arg("tau"), py::arg("eps"));
  mod.def("rate_function", &gee::rate_function, py::arg("tau"), py::arg("kappa"));
  mod.def("equalizing_tau", &gee::equalizing_tau, py::arg("eps"));
  mod.def(
      "region_curve",
      [](double eps, std::size_t npoints) {
        std::vector<std::tuple<double, double, double>> out;
        for (const auto& pt : gee::region_curve(eps, npoints)) out.emplace_back(pt.tau, pt.jf, pt.jm);
        return out;
      },
      py::arg("eps"), py::arg("npoints") = 50, "List of (tau, jf, jm) along the region boundary.");
  mod.def(
      "estimate_exponent",
      [](const std::vector<std::pair<double, double>>& rows) {
        std::vector<gee::SlopeSample> samples;
        for (const auto& [r, p] : rows) samples.push_back({r, p});
        const auto fit = gee::estimate_exponent(samples);
        return py::make_tuple(fit.slope, fit.intercept);
      },
      py::arg("rows"), "Least-squares slope and intercept of -ln p_hat against r.");

  mod.def("uniform", [](std::size_t m) { return to_vector(gee::uniform(m)); }, py::arg("m"));
  mod.def(
      "biuniform_worst_case", [](std::size_t m, double eps) { return to_vector(gee::biuniform_worst_case(m, eps)); },
      py::arg("m"), py::arg("eps"));
  mod.def(
      "tv_distance",
      [](const std::vector<double>& q, const std::vector<double>& p) {
        return gee::tv_distance(gee::Pmf(q), gee::Pmf(p));
      },
      py::arg("q"), py::arg("p"));
  mod.def(
      "chi_square_functional",
      [](const std::vector<double>& q, const std::vector<double>& p) {
        return gee::chi_square_functional(gee::Pmf(q), gee::Pmf(p));
      },
      py::arg("q"), py::arg("p"));
  mod.def(
      "f_divergence",
      [](const std::vector<double>& q, const std::vector<double>& p, const std::function<double(double)>& f) {
        return gee::f_divergence(gee::Pmf(q), gee::Pmf(p), f);
      },
      py::arg("q"), py::arg("p"), py::arg("f"));

  mod.def(
      "evaluate",
      [](const std::string& stat, const std::vector<std::int64_t>& counts,
         std::optional<std::vector<double>> weights, std::optional<std::vector<double>> reference) {
        return gee::evaluate(make_stat(stat, weights, reference), counts);
      },
      py::arg("stat"), py::arg("counts"), py::arg("weights") = py::none(), py::arg("reference") = py::none());
  mod.def(
      "occupancy",
      [](const std::vector<std::int64_t>& counts) { return gee::occupancy(counts).phi; }, py::arg("counts"));
  mod.def(
      "threshold",
      [](const std::string& stat, double tau, std::int64_t n, std::size_t m, double eps,
         std::optional<std::vector<double>> weights, std::optional<std::vector<double>> reference) {
        return gee::make_threshold(make_stat(stat, weights, reference), tau, n, m, eps).threshold;
      },
      py::arg("stat"), py::arg("tau"), py::arg("n"), py::arg("m"), py::arg("eps"), py::arg("weights") = py::none(),
      py::arg("reference") = py::none(), "Absolute rejection threshold of the calibrated rule.");

  mod.def(
      "exact_distribution",
      [](const std::string& stat, const std::vector<double>& p, std::int64_t n,
         std::optional<std::vector<double>> weights, std::optional<std::vector<double>> reference,
         std::uint64_t budget) {
        gee::OracleOptions options;
        options.budget = budget;
        const auto law = gee::exact_distribution(make_stat(stat, weights, reference), gee::Pmf(p), n, options);
        return py::make_tuple(law.support, law.probs);
      },
      py::arg("stat"), py::arg("p"), py::arg("n"), py::arg("weights") = py::none(),
      py::arg("reference") = py::none(), py::arg("budget") = 100'000'000, "(support, probs) of the exact law.");
  mod.def(
      "exact_expectation",
      [](const std::string& stat, const std::vector<double>& p, std::int64_t n,
         std::optional<std::vector<double>> weights, std::optional<std::vector<double>> reference) {
        return gee::exact_expectation(make_stat(stat, weights, reference), gee::Pmf(p), n);
      },
      py::arg("stat"), py::arg("p"), py::arg("n"), py::arg("weights") = py::none(),
      py::arg("reference") = py::none());
  mod.def(
      "exact_error_probs",
      [](const std::string& stat, double tau, std::int64_t n, std::size_t m, double eps) {
        const auto s = make_stat(stat, std::nullopt, std::nullopt);
        const auto rule = gee::make_threshold(s, tau, n, m, eps);
        const auto probs =
            gee::exact_error_probs(s, rule, gee::uniform(m), gee::biuniform_worst_case(m, eps), n);
        return py::make_tuple(probs.pf, probs.pm);
      },
      py::arg("stat"), py::arg("tau"), py::arg("n"), py::arg("m"), py::arg("eps"),
      "(pf, pm) against the bi-uniform worst case.");

  mod.def(
      "estimate_errors",
      [](const std::string& stat, double tau, std::int64_t n, std::size_t m, double eps, std::uint64_t trials,
         std::uint64_t seed, std::size_t streams) {
        gee::SimPlan plan;
        plan.n = n;
        plan.m = m;
        plan.eps = eps;
        plan.stat = make_stat(stat, std::nullopt, std::nullopt);
        plan.rule = gee::make_threshold(plan.stat, tau, n, m, eps);
        plan.trials = trials;
        plan.seed = seed;
        plan.streams = streams;
        py::gil_scoped_release release;
        const auto pf = gee::estimate_pf(plan);
        const auto pm = gee::estimate_pm(plan);
        return std::make_tuple(pf.p_hat, pf.ci95_halfwidth, pm.p_hat, pm.ci95_halfwidth);
      },
      py::arg("stat"), py::arg("tau"), py::arg("n"), py::arg("m"), py::arg("eps"), py::arg("trials"),
      py::arg("seed") = 0, py::arg("streams") = 1, "(pf, pf_ci, pm, pm_ci) by Monte Carlo.");
  mod.def(
      "sweep",
      [](double eps, double tau, const std::vector<std::int64_t>& n_list, const std::string& m_rule,
         std::uint64_t trials, std::uint64_t seed, std::size_t streams, const std::string& stat) {
        gee::SweepConfig config;
        config.eps = eps;
        config.tau = tau;
        config.n_list = n_list;
        config.m_rule = gee::MRule::parse(m_rule);
        config.trials = trials;
        config.seed = seed;
        config.streams = streams;
        config.stat = make_stat(stat, std::nullopt, std::nullopt);
        std::vector<py::dict> rows;
        std::vector<gee::SweepRow> result;
        {
          py::gil_scoped_release release;
          result = gee::sweep(config);
        }
        for (const auto& row : result) {
          py::dict d;
          d["n"] = row.n;
          d["m"] = row.m;
          d["r"] = row.r;
          d["pf_hat"] = row.pf.p_hat;
          d["pf_ci"] = row.pf.ci95_halfwidth;
          d["pm_hat"] = row.pm.p_hat;
          d["pm_ci"] = row.pm.ci95_halfwidth;
          d["flags"] = row.flags;
          rows.push_back(d);
        }
        return rows;
      },
      py::arg("eps"), py::arg("tau"), py::arg("n_list"), py::arg("m_rule") = "n^1.5", py::arg("trials") = 1'000'000,
      py::arg("seed") = 0, py::arg("streams") = 1, py::arg("stat") = "coincidence");
}
