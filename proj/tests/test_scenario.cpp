#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "voltarget/scenario.hpp"

using namespace voltarget;

namespace {

std::string scenario_dir() { return VOLTARGET_SCENARIO_DIR; }
std::string cli() { return VOLTARGET_CLI_PATH; }

int run(const std::string& args) {
  const int rc = std::system((cli() + " " + args + " > cli_stdout.txt 2> cli_stderr.txt").c_str());
  return WEXITSTATUS(rc);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

TEST_SUITE_BEGIN("scenario_cli");

TEST_CASE("scenario json loads every block") {
  const Scenario sc = load_scenario(scenario_dir() + "/heston_capped.json");
  CHECK(sc.market.r == 0.042);
  CHECK(sc.market.T == 1.0);
  CHECK(sc.strategy.sigma_hat == 0.2);
  CHECK(sc.strategy.leverage_cap.has_value());
  CHECK(*sc.strategy.leverage_cap == 2.0);
  CHECK(sc.option.strike == 100.0);
  CHECK(sc.portfolio.v == 100.0);
  REQUIRE(sc.heston.has_value());
  CHECK(sc.heston->theta == 0.1707);
  CHECK(sc.heston->nu0 == 0.1654);
  REQUIRE(sc.sim.has_value());
  CHECK(sc.sim->n_steps == 1000);
  CHECK(sc.sim->scheme == Scheme::EulerMaruyama);
  CHECK(sc.sim->measure == Measure::RealWorld);
}

TEST_CASE("scenario parsing rejects malformed input") {
  CHECK_THROWS_AS(parse_scenario("not json"), std::invalid_argument);
  CHECK_THROWS_AS(parse_scenario("[1,2,3]"), std::invalid_argument);
  CHECK_THROWS_AS(parse_scenario(R"({"market":{"r":0.05,"t0":0,"T":1}})"),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse_scheme("heun"), std::invalid_argument);
  CHECK_THROWS_AS(parse_measure("qq"), std::invalid_argument);
  CHECK_THROWS_AS(parse_option_kind("straddle"), std::invalid_argument);
  CHECK_THROWS_AS(load_scenario("/nonexistent/file.json"), std::invalid_argument);
}

TEST_CASE("cli prices the plain strategy scenario") {
  REQUIRE(run("price --scenario " + scenario_dir() + "/vts_atm.json --out cli_price.csv") == 0);
  const std::string out = slurp("cli_price.csv");
  CHECK(out.find("strategy,kind,price,d1,d2,total_variance") == 0);
  CHECK(out.find("vts,call,2.616904394684731,") != std::string::npos);
}

TEST_CASE("cli picks the capped strategy from the scenario and flags override") {
  REQUIRE(run("price --scenario " + scenario_dir() + "/mlvts_lowvol.json --out cli_mlvts.csv") == 0);
  const std::string capped = slurp("cli_mlvts.csv");
  CHECK(capped.find("mlvts,call,") != std::string::npos);
  CHECK(capped.find("0.0256") != std::string::npos);  // total variance (2*0.08)^2

  REQUIRE(run("price --scenario " + scenario_dir() +
              "/mlvts_lowvol.json --strategy vts --option put --out cli_vtsput.csv") == 0);
  const std::string plain = slurp("cli_vtsput.csv");
  CHECK(plain.find("vts,put,") != std::string::npos);
}

TEST_CASE("cli exit codes distinguish configuration errors") {
  std::ofstream("cli_broken.json") << "{ this is not json";
  CHECK(run("price --scenario cli_broken.json") == 2);
  CHECK(run("price --scenario /nonexistent.json") == 2);
  // Single-rung ladder: configuration error.
  CHECK(run("converge --scenario " + scenario_dir() +
            "/mc_vts_flat.json --ladder 64 --paths 100") == 2);
  // Unknown flag: CLI parse error.
  CHECK(run("price --scenario x --bogus") == 2);
  // Requesting the capped strategy without a cap in the scenario.
  CHECK(run("price --scenario " + scenario_dir() + "/vts_atm.json --strategy mlvts") == 2);
}

TEST_CASE("cli greeks sweep reproduces the vega shape") {
  REQUIRE(run("greeks --scenario " + scenario_dir() +
              "/mlvts_lowvol.json --sweep sigma:0.02:0.4:20 --out cli_sweep.csv") == 0);
  const std::string out = slurp("cli_sweep.csv");
  CHECK(out.find("sigma,price,vega,delta,gamma,branch") == 0);

  std::istringstream lines(out);
  std::string line;
  std::getline(lines, line);  // header
  int positive_below = 0, zero_above = 0;
  while (std::getline(lines, line)) {
    std::istringstream cells(line);
    std::string sigma_s, price_s, vega_s;
    std::getline(cells, sigma_s, ',');
    std::getline(cells, price_s, ',');
    std::getline(cells, vega_s, ',');
    const double sigma = std::stod(sigma_s);
    const double vega = std::stod(vega_s);
    if (sigma < 0.1 && vega > 0.0) ++positive_below;
    if (sigma > 0.1 && vega == 0.0) ++zero_above;
  }
  CHECK(positive_below >= 4);
  CHECK(zero_above >= 10);
}

TEST_CASE("cli value sweep peaks where the closed-form maximizer says") {
  // sigma = 0.08, L = 2, K = 10, r = 5%, tau = 1:
  // v* = K exp(-(r - L^2 sigma^2 / 2)) ~ 9.6348.
  REQUIRE(run("greeks --scenario " + scenario_dir() +
              "/mlvts_lowvol.json --sweep v:5:20:151 --out cli_vsweep.csv") == 0);
  std::istringstream lines(slurp("cli_vsweep.csv"));
  std::string line;
  std::getline(lines, line);
  CHECK(line == "v,price,vega,delta,gamma,branch");
  double best_v = 0.0, best_vega = -1.0;
  while (std::getline(lines, line)) {
    std::istringstream cells(line);
    std::string v_s, price_s, vega_s;
    std::getline(cells, v_s, ',');
    std::getline(cells, price_s, ',');
    std::getline(cells, vega_s, ',');
    if (std::stod(vega_s) > best_vega) {
      best_vega = std::stod(vega_s);
      best_v = std::stod(v_s);
    }
  }
  CHECK(std::abs(best_v - 9.6348341939422151) <= 0.11);  // one grid cell
}

TEST_CASE("cli simulate writes one csv per path and is reproducible") {
  const std::string cmd = "simulate --scenario " + scenario_dir() +
                          "/heston_capped.json --paths 2 --steps 200 --out cli_sim.csv";
  REQUIRE(run(cmd) == 0);
  const std::string first = slurp("cli_sim_p0.csv");
  const std::string second = slurp("cli_sim_p1.csv");
  CHECK(first.find("t,S,nu,alpha,B,V") == 0);
  CHECK(first != second);

  REQUIRE(run(cmd) == 0);
  CHECK(slurp("cli_sim_p0.csv") == first);
  CHECK(slurp("cli_sim_p1.csv") == second);
  std::remove("cli_sim_p0.csv");
  std::remove("cli_sim_p1.csv");
}

TEST_CASE("cli mcprice reports a z-score against the closed form") {
  REQUIRE(run("mcprice --scenario " + scenario_dir() +
              "/mc_vts_flat.json --paths 2000 --steps 100 --out cli_mc.csv") == 0);
  const std::string out = slurp("cli_mc.csv");
  CHECK(out.find("estimate,std_error,closed_form,z_score") == 0);
  std::istringstream lines(out);
  std::string header, row;
  std::getline(lines, header);
  std::getline(lines, row);
  std::istringstream cells(row);
  std::string est_s, se_s, closed_s, z_s;
  std::getline(cells, est_s, ',');
  std::getline(cells, se_s, ',');
  std::getline(cells, closed_s, ',');
  std::getline(cells, z_s, ',');
  CHECK(std::abs(std::stod(z_s)) < 4.0);
  CHECK(std::stod(se_s) > 0.0);
}

TEST_SUITE_END();
