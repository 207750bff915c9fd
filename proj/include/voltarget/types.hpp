#pragma once

#include <optional>
#include <vector>

namespace voltarget {

enum class OptionKind { Call, Put };

// Risk-free rate and the valuation window shared by every pricer.
// Times are plain year fractions; no calendar or day-count logic.
struct MarketParams {
  double r = 0.0;   // continuously compounded rate per year, decimal
  double t0 = 0.0;  // valuation time
  double T = 0.0;   // maturity, T >= t0

  double tau() const { return T - t0; }
  void validate() const;
};

// Target volatility level, optionally capped at a maximum leverage L.
// leverage_cap absent -> plain target-volatility strategy.
struct StrategyConfig {
  double sigma_hat = 0.0;             // target volatility, per sqrt(year)
  std::optional<double> leverage_cap;  // L >= 1 when present

  void validate() const;
  // Throws when leverage_cap is missing; used by the capped-strategy paths.
  double cap() const;
};

struct OptionSpec {
  double strike = 0.0;  // K >= 0, currency units
  OptionKind kind = OptionKind::Call;

  void validate() const;
};

// Deterministic piecewise-constant volatility term structure:
// sigma(t) = values[i] on [breakpoints[i], breakpoints[i+1]).
struct VolCurve {
  std::vector<double> breakpoints;  // strictly increasing, size m+1
  std::vector<double> values;       // strictly positive, size m

  void validate() const;
  bool covers(double t0, double T) const;
  double value_at(double t) const;
};

// Portfolio snapshot: total value, risky asset price, bond price.
struct PortfolioState {
  double v = 0.0;
  double s = 0.0;
  double b = 0.0;

  void validate() const;
};

// Square-root stochastic variance parameters plus the real-world asset drift.
struct HestonParams {
  double kappa = 0.0;  // mean-reversion rate
  double theta = 0.0;  // long-run variance
  double xi = 0.0;     // vol of vol
  double rho = 0.0;    // Brownian correlation, in [-1, 1]
  double nu0 = 0.0;    // initial variance
  double mu = 0.0;     // real-world drift
  double s0 = 0.0;     // initial asset price

  void validate() const;
};

// Risky-asset weight of the plain strategy: sigma_hat / sigma.
// May exceed 1 (leverage); sigma must be strictly positive.
double vts_weight(double sigma, const StrategyConfig& cfg);

// Capped weight: min{L, sigma_hat / sigma}. Requires leverage_cap.
// The cap branch is taken whenever L * sigma <= sigma_hat, so the tie at
// sigma == sigma_hat / L reports the cap.
double mlvts_weight(double sigma, const StrategyConfig& cfg);

// Instantaneous portfolio volatility min{L * sigma, sigma_hat}, computed as
// mlvts_weight(sigma) * sigma so the two agree bit-for-bit.
double effective_vol(double sigma, const StrategyConfig& cfg);

}  // namespace voltarget
