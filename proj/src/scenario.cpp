#include "voltarget/scenario.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace voltarget {

namespace {

using nlohmann::json;

double get_num(const json& obj, const char* key) {
  if (!obj.contains(key) || !obj[key].is_number()) {
    throw std::invalid_argument(std::string("scenario: missing numeric field '") + key + "'");
  }
  return obj[key].get<double>();
}

MarketParams parse_market(const json& j) {
  MarketParams m{get_num(j, "r"), get_num(j, "t0"), get_num(j, "T")};
  m.validate();
  return m;
}

StrategyConfig parse_strategy(const json& j) {
  StrategyConfig cfg;
  cfg.sigma_hat = get_num(j, "sigma_hat");
  if (j.contains("leverage_cap") && !j["leverage_cap"].is_null()) {
    cfg.leverage_cap = j["leverage_cap"].get<double>();
  }
  cfg.validate();
  return cfg;
}

OptionSpec parse_option(const json& j) {
  OptionSpec opt;
  opt.strike = get_num(j, "strike");
  if (j.contains("kind")) opt.kind = parse_option_kind(j["kind"].get<std::string>());
  opt.validate();
  return opt;
}

PortfolioState parse_portfolio(const json& j) {
  PortfolioState st{get_num(j, "v"), get_num(j, "s"), get_num(j, "b")};
  st.validate();
  return st;
}

VolCurve parse_curve(const json& j) {
  VolCurve curve;
  if (!j.contains("breakpoints") || !j.contains("values")) {
    throw std::invalid_argument("scenario: vol_curve needs 'breakpoints' and 'values'");
  }
  curve.breakpoints = j["breakpoints"].get<std::vector<double>>();
  curve.values = j["values"].get<std::vector<double>>();
  curve.validate();
  return curve;
}

HestonParams parse_heston(const json& j) {
  HestonParams p;
  p.kappa = get_num(j, "kappa");
  p.theta = get_num(j, "theta");
  p.xi = get_num(j, "xi");
  p.rho = get_num(j, "rho");
  p.nu0 = get_num(j, "nu0");
  p.mu = get_num(j, "mu");
  p.s0 = get_num(j, "s0");
  p.validate();
  return p;
}

SimConfig parse_sim(const json& j) {
  SimConfig sim;
  sim.n_steps = static_cast<std::size_t>(get_num(j, "n_steps"));
  sim.n_paths = static_cast<std::size_t>(get_num(j, "n_paths"));
  if (j.contains("seed")) sim.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("scheme")) sim.scheme = parse_scheme(j["scheme"].get<std::string>());
  if (j.contains("measure")) sim.measure = parse_measure(j["measure"].get<std::string>());
  if (j.contains("weight_bound")) sim.weight_bound = j["weight_bound"].get<double>();
  sim.validate();
  return sim;
}

}  // namespace

Scheme parse_scheme(const std::string& name) {
  if (name == "euler") return Scheme::EulerMaruyama;
  if (name == "milstein") return Scheme::Milstein;
  throw std::invalid_argument("unknown scheme '" + name + "' (expected euler|milstein)");
}

Measure parse_measure(const std::string& name) {
  if (name == "real_world") return Measure::RealWorld;
  if (name == "risk_neutral") return Measure::RiskNeutral;
  throw std::invalid_argument("unknown measure '" + name +
                              "' (expected real_world|risk_neutral)");
}

OptionKind parse_option_kind(const std::string& name) {
  if (name == "call") return OptionKind::Call;
  if (name == "put") return OptionKind::Put;
  throw std::invalid_argument("unknown option kind '" + name + "' (expected call|put)");
}

Scenario parse_scenario(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("scenario: JSON parse error: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("scenario: top level must be an object");

  for (const char* key : {"market", "strategy", "option", "portfolio"}) {
    if (!j.contains(key)) {
      throw std::invalid_argument(std::string("scenario: missing required block '") + key + "'");
    }
  }

  Scenario sc;
  sc.market = parse_market(j["market"]);
  sc.strategy = parse_strategy(j["strategy"]);
  sc.option = parse_option(j["option"]);
  sc.portfolio = parse_portfolio(j["portfolio"]);
  if (j.contains("sigma") && !j["sigma"].is_null()) sc.sigma = j["sigma"].get<double>();
  if (j.contains("vol_curve")) sc.vol_curve = parse_curve(j["vol_curve"]);
  if (j.contains("heston")) sc.heston = parse_heston(j["heston"]);
  if (j.contains("sim")) sc.sim = parse_sim(j["sim"]);
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("scenario: cannot open file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

}  // namespace voltarget
