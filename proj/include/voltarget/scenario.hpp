#pragma once

#include <optional>
#include <string>

#include "voltarget/simulation.hpp"
#include "voltarget/types.hpp"

namespace voltarget {

// Everything a command needs, loaded from one JSON object. market, strategy,
// option and portfolio are always required; the rest only by the commands
// that use them (and only then validated for presence).
struct Scenario {
  MarketParams market;
  StrategyConfig strategy;
  OptionSpec option;
  PortfolioState portfolio;
  std::optional<double> sigma;  // constant risky-asset vol for the Greeks regime
  std::optional<VolCurve> vol_curve;
  std::optional<HestonParams> heston;
  std::optional<SimConfig> sim;
};

// Throws std::invalid_argument on missing/malformed content
// (nlohmann::json parse errors propagate as such).
Scenario load_scenario(const std::string& path);
Scenario parse_scenario(const std::string& json_text);

Scheme parse_scheme(const std::string& name);
Measure parse_measure(const std::string& name);
OptionKind parse_option_kind(const std::string& name);

}  // namespace voltarget
