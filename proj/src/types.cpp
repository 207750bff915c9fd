#include "voltarget/types.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace voltarget {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace

void MarketParams::validate() const {
  require(std::isfinite(r), "MarketParams: r must be finite");
  require(std::isfinite(t0) && std::isfinite(T), "MarketParams: times must be finite");
  require(T >= t0, "MarketParams: T must be >= t0");
}

void StrategyConfig::validate() const {
  require(std::isfinite(sigma_hat) && sigma_hat > 0.0,
          "StrategyConfig: sigma_hat must be > 0");
  if (leverage_cap) {
    require(std::isfinite(*leverage_cap) && *leverage_cap >= 1.0,
            "StrategyConfig: leverage_cap must be >= 1");
  }
}

double StrategyConfig::cap() const {
  if (!leverage_cap) {
    throw std::invalid_argument("StrategyConfig: leverage_cap required for capped strategy");
  }
  return *leverage_cap;
}

void OptionSpec::validate() const {
  require(std::isfinite(strike) && strike >= 0.0, "OptionSpec: strike must be >= 0");
}

void VolCurve::validate() const {
  require(breakpoints.size() >= 2, "VolCurve: need at least two breakpoints");
  require(values.size() + 1 == breakpoints.size(),
          "VolCurve: values must have one entry per segment");
  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
    require(breakpoints[i] < breakpoints[i + 1],
            "VolCurve: breakpoints must be strictly increasing");
  }
  for (double sigma : values) {
    require(std::isfinite(sigma) && sigma > 0.0, "VolCurve: values must be > 0");
  }
}

bool VolCurve::covers(double t0, double T) const {
  return breakpoints.front() <= t0 && breakpoints.back() >= T;
}

double VolCurve::value_at(double t) const {
  if (t < breakpoints.front() || t > breakpoints.back()) {
    throw std::invalid_argument("VolCurve: time outside curve support");
  }
  // Last segment is closed on the right so value_at(T) is defined.
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (t < breakpoints[i + 1]) return values[i];
  }
  return values.back();
}

void PortfolioState::validate() const {
  require(std::isfinite(v) && v > 0.0, "PortfolioState: v must be > 0");
  require(std::isfinite(s) && s > 0.0, "PortfolioState: s must be > 0");
  require(std::isfinite(b) && b > 0.0, "PortfolioState: b must be > 0");
}

void HestonParams::validate() const {
  require(std::isfinite(kappa) && kappa > 0.0, "HestonParams: kappa must be > 0");
  require(std::isfinite(theta) && theta > 0.0, "HestonParams: theta must be > 0");
  require(std::isfinite(xi) && xi >= 0.0, "HestonParams: xi must be >= 0");
  require(std::isfinite(rho) && rho >= -1.0 && rho <= 1.0,
          "HestonParams: rho must be in [-1, 1]");
  require(std::isfinite(nu0) && nu0 > 0.0, "HestonParams: nu0 must be > 0");
  require(std::isfinite(s0) && s0 > 0.0, "HestonParams: s0 must be > 0");
  require(std::isfinite(mu), "HestonParams: mu must be finite");
}

double vts_weight(double sigma, const StrategyConfig& cfg) {
  cfg.validate();
  if (!(sigma > 0.0)) throw std::domain_error("vts_weight: sigma must be > 0");
  return cfg.sigma_hat / sigma;
}

double mlvts_weight(double sigma, const StrategyConfig& cfg) {
  cfg.validate();
  if (!(sigma > 0.0)) throw std::domain_error("mlvts_weight: sigma must be > 0");
  const double cap = cfg.cap();
  return cap * sigma <= cfg.sigma_hat ? cap : cfg.sigma_hat / sigma;
}

double effective_vol(double sigma, const StrategyConfig& cfg) {
  return mlvts_weight(sigma, cfg) * sigma;
}

}  // namespace voltarget
