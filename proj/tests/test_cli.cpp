#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

namespace fs = std::filesystem;
using doctest::Approx;
using json = nlohmann::json;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Scratch {
  fs::path dir = fs::temp_directory_path() / ("gee_cli_test_" + std::to_string(::getpid()));
  Scratch() { fs::create_directories(dir); }
  ~Scratch() {
    std::error_code ec;
    fs::remove_all(dir, ec);
  }
};

const fs::path& scratch() {
  static const Scratch s;
  return s.dir;
}

Run gee(const std::string& args, const std::string& env = "") {
  const auto out = scratch() / "stdout.txt";
  const auto err = scratch() / "stderr.txt";
  const std::string cmd = env + " \"" GEE_CLI_PATH "\" " + args + " >\"" + out.string() + "\" 2>\"" +
                          err.string() + "\"";
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream ss(text);
  for (std::string line; std::getline(ss, line);) out.push_back(line);
  return out;
}

}  // namespace

TEST_CASE("region") {
  const auto r = gee("region --eps 0.35 --points 2 --no-timestamp");
  REQUIRE(r.code == 0);
  const auto rows = lines(r.out);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].rfind("# ", 0) == 0);
  const auto meta = json::parse(rows[0].substr(2));
  CHECK(meta["version"] == "0.1.0");
  CHECK(meta["params"]["eps"] == 0.35);
  CHECK_FALSE(meta.contains("timestamp"));
  CHECK(rows[1] == "tau,jf,jm");
  CHECK(rows[2] == "0,0,0.0456119400213");
  CHECK(rows[3] == "0.49,0.0520882093682,0");

  CHECK(json::parse(lines(gee("region --eps 0.35 --points 2").out)[0].substr(2)).contains("timestamp"));

  const auto file = scratch() / "region.csv";
  CHECK(gee("region --eps 0.45 --points 5 --no-timestamp --out " + file.string()).code == 0);
  CHECK(lines(slurp(file)).size() == 7);

  CHECK(gee("region --eps 0.35 --points 1").code == 2);
  CHECK(gee("region --eps 1.5").code == 2);
  CHECK(gee("region").code == 2);
  const auto unwritable = gee("region --eps 0.35 --out /nonexistent-dir/x.csv");
  CHECK(unwritable.code == 3);
  CHECK(unwritable.err.find("cannot open") != std::string::npos);
}

TEST_CASE("exponents") {
  const auto eq = gee("exponents --eps 0.45 --equalize");
  REQUIRE(eq.code == 0);
  const auto j = json::parse(eq.out);
  CHECK(std::abs(j["tau"].get<double>() - 0.365183) < 1e-6);
  CHECK(std::abs(j["jf"].get<double>() - 0.029889) < 1e-5);
  CHECK(std::abs(j["jf"].get<double>() - 0.0298914470726487) < 1e-9);
  CHECK(std::abs(j["jm"].get<double>() - j["jf"].get<double>()) < 1e-12);
  CHECK(j["kappa_bar"].get<double>() == Approx(1.81));
  CHECK(j["eps"].get<double>() == 0.45);

  CHECK(json::parse(gee("exponents --eps 0.35 --tau 0").out)["jf"].get<double>() == 0.0);
  CHECK(json::parse(gee("exponents --eps 0.35 --tau 0.49").out)["jm"].get<double>() == Approx(0.0));
  CHECK(gee("exponents --eps 0.35 --tau 0.6").code == 2);
  CHECK(gee("exponents --eps 0.35 --tau -0.1").code == 2);
  CHECK(gee("exponents --eps 0.35").code == 2);
  CHECK(gee("exponents --eps 0.35 --tau 0.1 --equalize").code == 2);
}

TEST_CASE("worst-case") {
  const auto r = gee("worst-case --m 4 --eps 0.25");
  REQUIRE(r.code == 0);
  const auto j = json::parse(r.out);
  CHECK(j["pmf"] == json::array({0.375, 0.375, 0.125, 0.125}));
  CHECK(j["chi_square_functional"].get<double>() == Approx(1.25));

  const auto b = json::parse(gee("worst-case --m 4 --eps 0.25 --bruteforce --mesh 200").out);
  CHECK(b["bruteforce"]["gap"].get<double>() <= 0.02);

  const auto degenerate = gee("worst-case --m 2 --eps 0.9");
  CHECK(degenerate.code == 3);
  CHECK(degenerate.err.find("degenerate") != std::string::npos);
  CHECK(gee("worst-case --m 8 --eps 0.2 --bruteforce").code == 2);
}

TEST_CASE("oracle") {
  const auto r = gee("oracle --stat coincidence --n 3 --m 3 --tau-abs 0 --dist");
  REQUIRE(r.code == 0);
  const auto j = json::parse(r.out);
  CHECK(j["pf"].get<double>() == Approx(3.0 / 27).epsilon(1e-14));
  CHECK(j["null_distribution"]["support"] == json::array({-3.0, -1.0, 0.0}));

  const auto pm = json::parse(gee("oracle --n 3 --m 3 --eps 0.3 --tau-abs 0").out);
  CHECK(pm.contains("pm"));

  const auto big = gee("oracle --n 200 --m 5000 --eps 0.35 --tau 0.2 --budget 1000000");
  CHECK(big.code == 3);
  CHECK(big.err.find("1000000") != std::string::npos);
  CHECK(gee("oracle --n 3 --m 3").code == 2);
  CHECK(gee("oracle --stat nonsense --n 3 --m 3 --tau-abs 0").code == 2);
}

TEST_CASE("fdiv-check") {
  const auto kl = json::parse(gee("fdiv-check --f kl").out);
  CHECK(kl["cond1"] == true);
  CHECK(kl["cond2"] == true);
  CHECK(kl["alpha"].get<double>() <= 1.0 + 1e-12);
  const auto chi2 = json::parse(gee("fdiv-check --f chi2").out);
  CHECK(chi2["alpha"].get<double>() == Approx(1.0));
  const auto tv = json::parse(gee("fdiv-check --f tv-like").out);
  CHECK(tv["cond2"] == false);
  CHECK(gee("fdiv-check --f cubic").code == 2);
}

TEST_CASE("simulate") {
  const std::string args = "simulate --n 12 --m 30 --eps 0.35 --tau 0.2 --trials 1e4 --no-timestamp";
  const auto r = gee(args + " --seed 7");
  REQUIRE(r.code == 0);
  const auto j = json::parse(r.out);
  CHECK(j["pf"]["trials"] == 10000);
  CHECK(j["metadata"]["seed"] == 7);
  CHECK(j["metadata"]["rng"] == "philox4x32-10");
  CHECK(gee(args, "GEE_SEED=7").out == r.out);
  CHECK(gee(args + " --seed 8").out != r.out);
  CHECK(gee(args + " --seed 7 --streams 8").out.size() == r.out.size());
  CHECK(gee("simulate --n 12 --m 30 --eps 0.35 --tau 0.2 --trials 0.5").code == 2);
  CHECK(gee("simulate --n 12 --m 30 --eps 0.35 --tau 0.2 --trials many").code == 2);
}

TEST_CASE("sweep is byte-identical across runs and stream counts") {
  const std::string args =
      "sweep --eps 0.45 --equalize --n 100,200,400 --m-rule n^1.5 --trials 2e4 --seed 7 --no-timestamp";
  const auto a = gee(args + " --streams 1");
  const auto b = gee(args + " --streams 1");
  const auto c = gee(args + " --streams 8");
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  const auto la = lines(a.out), lc = lines(c.out);
  REQUIRE(la.size() == 5);
  CHECK(la[1] == "n,m,r,pf_hat,pf_ci,pm_hat,pm_ci,flags");
  // Only the echoed --streams value differs.
  CHECK(std::vector<std::string>(la.begin() + 1, la.end()) == std::vector<std::string>(lc.begin() + 1, lc.end()));
  CHECK(la[2].rfind("100,1000,10,", 0) == 0);
  CHECK(gee("sweep --eps 0.45 --equalize --m-rule n^x").code == 2);
  CHECK(gee("sweep --eps 0.45 --n 10,abc --equalize").code == 2);
}

TEST_CASE("usage errors") {
  CHECK(gee("").code == 2);
  CHECK(gee("bogus").code == 2);
  CHECK(gee("--version").code == 0);
  CHECK(gee("region --help").code == 0);
}
