#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "voltarget/csv.hpp"
#include "voltarget/greeks.hpp"
#include "voltarget/pricing.hpp"
#include "voltarget/scenario.hpp"
#include "voltarget/simulation.hpp"
#include "voltarget/types.hpp"

namespace {

using namespace voltarget;

constexpr int kExitOk = 0;
constexpr int kExitNumerical = 1;
constexpr int kExitConfig = 2;

struct CommonFlags {
  std::string scenario_path;
  std::string strategy;  // "", "vts", "mlvts"
  std::string option;    // "", "call", "put"
  std::string scheme;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> steps;
  std::optional<std::size_t> paths;
  std::string out;
};

void add_common(CLI::App* cmd, CommonFlags& flags, bool needs_sim) {
  cmd->add_option("--scenario", flags.scenario_path, "Scenario JSON file")->required();
  cmd->add_option("--strategy", flags.strategy, "vts|mlvts (default: mlvts when the scenario has a leverage cap)")
      ->check(CLI::IsMember({"vts", "mlvts"}));
  cmd->add_option("--option", flags.option, "call|put (overrides scenario)")
      ->check(CLI::IsMember({"call", "put"}));
  cmd->add_option("--out", flags.out, "Output CSV path");
  if (needs_sim) {
    cmd->add_option("--scheme", flags.scheme, "euler|milstein (overrides scenario)")
        ->check(CLI::IsMember({"euler", "milstein"}));
    cmd->add_option("--seed", flags.seed, "RNG seed (overrides scenario)");
    cmd->add_option("--steps", flags.steps, "Grid steps (overrides scenario)");
    cmd->add_option("--paths", flags.paths, "Path count (overrides scenario)");
  }
}

// Flags win over scenario fields.
Scenario apply_overrides(Scenario sc, const CommonFlags& flags) {
  if (!flags.option.empty()) sc.option.kind = parse_option_kind(flags.option);
  if (flags.seed || flags.steps || flags.paths || !flags.scheme.empty()) {
    if (!sc.sim) throw std::invalid_argument("scenario: sim block required for sim overrides");
    if (flags.seed) sc.sim->seed = *flags.seed;
    if (flags.steps) sc.sim->n_steps = *flags.steps;
    if (flags.paths) sc.sim->n_paths = *flags.paths;
    if (!flags.scheme.empty()) sc.sim->scheme = parse_scheme(flags.scheme);
    sc.sim->validate();
  }
  return sc;
}

bool use_mlvts(const Scenario& sc, const CommonFlags& flags) {
  if (flags.strategy == "vts") return false;
  if (flags.strategy == "mlvts") {
    sc.strategy.cap();  // throws when the cap is missing
    return true;
  }
  return sc.strategy.leverage_cap.has_value();
}

// Plain-strategy runs must ignore a leverage cap that happens to be present.
StrategyConfig strategy_for(const Scenario& sc, bool mlvts) {
  StrategyConfig cfg = sc.strategy;
  if (!mlvts) cfg.leverage_cap.reset();
  return cfg;
}

const char* kind_name(OptionKind kind) {
  return kind == OptionKind::Call ? "call" : "put";
}

std::string fmt(double x) { return csv::format_double(x); }

const SimConfig& require_sim(const Scenario& sc) {
  if (!sc.sim) throw std::invalid_argument("scenario: sim block required for this command");
  return *sc.sim;
}

const HestonParams& require_heston(const Scenario& sc) {
  if (!sc.heston) throw std::invalid_argument("scenario: heston block required for this command");
  return *sc.heston;
}

double require_sigma(const Scenario& sc) {
  if (sc.sigma) return *sc.sigma;
  // A flat curve doubles as a constant-volatility declaration.
  if (sc.vol_curve && sc.vol_curve->values.size() == 1) return sc.vol_curve->values[0];
  throw std::invalid_argument(
      "scenario: constant volatility required (set 'sigma' or a one-segment vol_curve)");
}

bool constant_vol_heston(const HestonParams& p) {
  return p.xi == 0.0 && p.nu0 == p.theta;
}

int cmd_price(const CommonFlags& flags) {
  const Scenario sc = apply_overrides(load_scenario(flags.scenario_path), flags);
  const bool mlvts = use_mlvts(sc, flags);
  const StrategyConfig cfg = strategy_for(sc, mlvts);

  PriceResult res;
  if (mlvts) {
    if (!sc.vol_curve) {
      throw std::invalid_argument("scenario: vol_curve required for mlvts pricing");
    }
    res = mlvts_price(sc.portfolio, cfg, sc.market, sc.option, *sc.vol_curve);
  } else {
    res = vts_price(sc.portfolio, cfg, sc.market, sc.option);
  }

  const char* strategy_name = mlvts ? "mlvts" : "vts";
  std::cout << "strategy = " << strategy_name << "\n"
            << "kind = " << kind_name(sc.option.kind) << "\n"
            << "price = " << fmt(res.price) << "\n"
            << "d1 = " << fmt(res.d1) << "\n"
            << "d2 = " << fmt(res.d2) << "\n"
            << "total_variance = " << fmt(res.total_variance) << "\n";
  if (!flags.out.empty()) {
    csv::write_file(flags.out, "strategy,kind,price,d1,d2,total_variance",
                    {csv::join_row({strategy_name, kind_name(sc.option.kind),
                                    fmt(res.price), fmt(res.d1), fmt(res.d2),
                                    fmt(res.total_variance)})});
  }
  return kExitOk;
}

struct Sweep {
  std::string param;
  double lo = 0.0;
  double hi = 0.0;
  std::size_t n = 0;
};

Sweep parse_sweep(const std::string& text) {
  Sweep sw;
  std::istringstream in(text);
  std::string tok;
  std::vector<std::string> parts;
  while (std::getline(in, tok, ':')) parts.push_back(tok);
  if (parts.size() != 4) {
    throw std::invalid_argument("--sweep expects param:lo:hi:n");
  }
  sw.param = parts[0];
  sw.lo = std::stod(parts[1]);
  sw.hi = std::stod(parts[2]);
  const long n = std::stol(parts[3]);
  if (n < 2 || sw.hi <= sw.lo) {
    throw std::invalid_argument("--sweep needs hi > lo and n >= 2");
  }
  sw.n = static_cast<std::size_t>(n);
  return sw;
}

int cmd_greeks(const CommonFlags& flags, const std::string& sweep_text) {
  const Scenario sc = apply_overrides(load_scenario(flags.scenario_path), flags);
  const bool mlvts = use_mlvts(sc, flags);
  const StrategyConfig cfg = strategy_for(sc, mlvts);
  const Strategy strategy = mlvts ? Strategy::Mlvts : Strategy::Vts;

  if (sweep_text.empty()) {
    const double sigma = require_sigma(sc);
    const GreekReport rep = greeks(sc.portfolio, sigma, cfg, sc.market, sc.option, strategy);
    std::cout << "strategy = " << (mlvts ? "mlvts" : "vts") << "\n"
              << "kind = " << kind_name(sc.option.kind) << "\n"
              << "sigma = " << fmt(sigma) << "\n"
              << "vega = " << fmt(rep.vega) << "\n"
              << "delta = " << fmt(rep.delta) << "\n"
              << "gamma = " << fmt(rep.gamma) << "\n"
              << "branch = " << to_string(rep.branch) << "\n";
    if (!flags.out.empty()) {
      csv::write_file(flags.out, "sigma,price,vega,delta,gamma,branch",
                      {csv::join_row({fmt(sigma),
                                      fmt(mlvts ? mlvts_price_const_vol(sc.portfolio, cfg,
                                                                        sc.market, sc.option, sigma)
                                                      .price
                                                : vts_price(sc.portfolio, cfg, sc.market,
                                                            sc.option)
                                                      .price),
                                      fmt(rep.vega), fmt(rep.delta), fmt(rep.gamma),
                                      to_string(rep.branch)})});
    }
    return kExitOk;
  }

  const Sweep sw = parse_sweep(sweep_text);
  if (sw.param != "sigma" && sw.param != "v") {
    throw std::invalid_argument("--sweep param must be 'sigma' or 'v'");
  }
  if (flags.out.empty()) {
    throw std::invalid_argument("--sweep requires --out");
  }

  std::vector<std::string> rows;
  rows.reserve(sw.n);
  for (std::size_t i = 0; i < sw.n; ++i) {
    const double x = sw.lo + (sw.hi - sw.lo) * (static_cast<double>(i) /
                                                static_cast<double>(sw.n - 1));
    PortfolioState state = sc.portfolio;
    double sigma;
    if (sw.param == "sigma") {
      sigma = x;
    } else {
      state.v = x;
      sigma = require_sigma(sc);
    }
    const GreekReport rep = greeks(state, sigma, cfg, sc.market, sc.option, strategy);
    const PriceResult price =
        mlvts ? mlvts_price_const_vol(state, cfg, sc.market, sc.option, sigma)
              : vts_price(state, cfg, sc.market, sc.option);
    rows.push_back(csv::join_row({fmt(x), fmt(price.price), fmt(rep.vega), fmt(rep.delta),
                                  fmt(rep.gamma), to_string(rep.branch)}));
  }
  csv::write_file(flags.out, sw.param + ",price,vega,delta,gamma,branch", rows);
  std::cout << "wrote " << sw.n << " rows to " << flags.out << "\n";
  return kExitOk;
}

std::string path_file_name(const std::string& out, std::size_t index) {
  const std::size_t dot = out.rfind('.');
  if (dot == std::string::npos || out.find('/', dot) != std::string::npos) {
    return out + "_p" + std::to_string(index);
  }
  return out.substr(0, dot) + "_p" + std::to_string(index) + out.substr(dot);
}

int cmd_simulate(const CommonFlags& flags) {
  const Scenario sc = apply_overrides(load_scenario(flags.scenario_path), flags);
  const bool mlvts = use_mlvts(sc, flags);
  const StrategyConfig cfg = strategy_for(sc, mlvts);
  const HestonParams& heston = require_heston(sc);
  const SimConfig& sim = require_sim(sc);
  if (flags.out.empty()) {
    throw std::invalid_argument("simulate: --out required (per-path CSV files)");
  }
  sim.validate();

  std::size_t var_clamps = 0, weight_clamps = 0, floors = 0;
  for (std::size_t k = 0; k < sim.n_paths; ++k) {
    const HestonPath hp = simulate_heston(heston, sc.market, sim, k);
    const SimulatedPath sp = simulate_portfolio(hp, sc.portfolio, cfg, sc.market, sim);
    std::vector<std::string> rows;
    rows.reserve(sp.times.size());
    for (std::size_t i = 0; i < sp.times.size(); ++i) {
      rows.push_back(csv::join_row({fmt(sp.times[i]), fmt(sp.asset[i]), fmt(sp.variance[i]),
                                    fmt(sp.weight[i]), fmt(sp.bond[i]),
                                    fmt(sp.portfolio[i])}));
    }
    const std::string file = path_file_name(flags.out, k);
    csv::write_file(file, "t,S,nu,alpha,B,V", rows);
    std::cout << "path " << k << " -> " << file << "\n";
    var_clamps += sp.variance_clamps;
    weight_clamps += sp.weight_clamps;
    floors += sp.value_floors;
  }
  std::cout << "paths = " << sim.n_paths << ", variance_clamps = " << var_clamps
            << ", weight_clamps = " << weight_clamps << ", value_floors = " << floors
            << "\n";
  return kExitOk;
}

int cmd_mcprice(const CommonFlags& flags) {
  Scenario sc = apply_overrides(load_scenario(flags.scenario_path), flags);
  const bool mlvts = use_mlvts(sc, flags);
  const StrategyConfig cfg = strategy_for(sc, mlvts);
  const HestonParams& heston = require_heston(sc);
  SimConfig sim = require_sim(sc);
  sim.measure = Measure::RiskNeutral;  // pricing is always risk neutral

  const McResult res = mc_price(heston, sc.portfolio, cfg, sc.market, sc.option, sim);

  std::optional<double> closed;
  if (!mlvts) {
    closed = vts_price(sc.portfolio, cfg, sc.market, sc.option).price;
  } else if (constant_vol_heston(heston)) {
    closed = mlvts_price_const_vol(sc.portfolio, cfg, sc.market, sc.option,
                                   std::sqrt(heston.theta))
                 .price;
  }

  std::cout << "estimate = " << fmt(res.estimate) << "\n"
            << "std_error = " << fmt(res.std_error) << "\n";
  std::string closed_cell, z_cell;
  if (closed) {
    const double z = (res.estimate - *closed) / res.std_error;
    closed_cell = fmt(*closed);
    z_cell = fmt(z);
    std::cout << "closed_form = " << closed_cell << "\n"
              << "z_score = " << z_cell << "\n";
  }
  std::cout << "discounted_mean_vt = " << fmt(res.discounted_mean_vt) << "\n"
            << "variance_clamps = " << res.variance_clamps
            << ", weight_clamps = " << res.weight_clamps
            << ", value_floors = " << res.value_floors << "\n";
  if (!flags.out.empty()) {
    csv::write_file(flags.out, "estimate,std_error,closed_form,z_score",
                    {csv::join_row({fmt(res.estimate), fmt(res.std_error), closed_cell,
                                    z_cell})});
  }
  return kExitOk;
}

std::vector<std::size_t> parse_ladder(const std::string& text) {
  std::vector<std::size_t> ladder;
  std::istringstream in(text);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    const long v = std::stol(tok);
    if (v < 1) throw std::invalid_argument("--ladder entries must be >= 1");
    ladder.push_back(static_cast<std::size_t>(v));
  }
  return ladder;
}

int cmd_converge(const CommonFlags& flags, const std::string& ladder_text) {
  const Scenario sc = apply_overrides(load_scenario(flags.scenario_path), flags);
  const bool mlvts = use_mlvts(sc, flags);
  const StrategyConfig cfg = strategy_for(sc, mlvts);
  const HestonParams& heston = require_heston(sc);
  const SimConfig& sim = require_sim(sc);
  if (ladder_text.empty()) throw std::invalid_argument("converge: --ladder required");
  const std::vector<std::size_t> ladder = parse_ladder(ladder_text);

  const ConvergenceReport rep = convergence_study(
      heston, sc.portfolio, cfg, WeightRule::from_strategy(cfg), sc.market, sim, ladder);

  std::vector<std::string> rows;
  for (std::size_t i = 0; i < rep.step_sizes.size(); ++i) {
    rows.push_back(csv::join_row({fmt(rep.step_sizes[i]), fmt(rep.strong_errors[i]),
                                  fmt(rep.standard_errors[i])}));
    std::cout << "dt = " << fmt(rep.step_sizes[i])
              << ", strong_error = " << fmt(rep.strong_errors[i])
              << ", se = " << fmt(rep.standard_errors[i]) << "\n";
  }
  rows.push_back(csv::join_row({"fitted_order", fmt(rep.fitted_order),
                                fmt(rep.order_half_width)}));
  std::cout << "fitted_order = " << fmt(rep.fitted_order) << " +/- "
            << fmt(rep.order_half_width) << "\n";
  if (!flags.out.empty()) {
    csv::write_file(flags.out, "dt,strong_error,se", rows);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Closed-form pricing, Greeks and Monte Carlo simulation for "
               "target-volatility portfolios"};
  app.require_subcommand(1);

  CommonFlags price_flags, greeks_flags, sim_flags, mc_flags, conv_flags;
  std::string sweep_text, ladder_text;

  CLI::App* price = app.add_subcommand("price", "Closed-form option price");
  add_common(price, price_flags, false);

  CLI::App* greeks_cmd = app.add_subcommand("greeks", "Closed-form sensitivities");
  add_common(greeks_cmd, greeks_flags, false);
  greeks_cmd->add_option("--sweep", sweep_text, "param:lo:hi:n over sigma or v");

  CLI::App* simulate = app.add_subcommand("simulate", "Simulated portfolio paths");
  add_common(simulate, sim_flags, true);

  CLI::App* mcprice = app.add_subcommand("mcprice", "Monte Carlo price vs closed form");
  add_common(mcprice, mc_flags, true);

  CLI::App* converge = app.add_subcommand("converge", "Strong convergence-order study");
  add_common(converge, conv_flags, true);
  converge->add_option("--ladder", ladder_text, "Comma-separated nested step counts");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (price->parsed()) return cmd_price(price_flags);
    if (greeks_cmd->parsed()) return cmd_greeks(greeks_flags, sweep_text);
    if (simulate->parsed()) return cmd_simulate(sim_flags);
    if (mcprice->parsed()) return cmd_mcprice(mc_flags);
    if (converge->parsed()) return cmd_converge(conv_flags, ladder_text);
  } catch (const std::invalid_argument& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::domain_error& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitConfig;
}
