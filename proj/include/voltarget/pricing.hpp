#pragma once

#include "voltarget/types.hpp"

namespace voltarget {

// Standard normal CDF via erfc; absolute error below 1e-15.
double norm_cdf(double x);
double norm_pdf(double x);

// Closed-form price plus the auxiliary quantities every formula shares.
// total_variance is the integrated squared portfolio volatility over the
// option life; d1 - d2 == sqrt(total_variance) holds bit-exactly whenever the
// general formula path is taken. Degenerate evaluations (tau == 0, K == 0)
// return the analytic limit with d1 == d2 set to the limiting +/-infinity.
struct PriceResult {
  double price = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
  double total_variance = 0.0;
};

// Plain Black-Scholes on a lognormal underlying; the cross-validation oracle
// for everything else. tau == 0 returns intrinsic value.
PriceResult bs_price(double spot, double strike, double r, double vol, double tau,
                     OptionKind kind);

// Option on the plain target-volatility portfolio. Equals Black-Scholes with
// the target volatility in place of the asset volatility; in particular the
// value does not depend on the current risky-asset volatility at all.
PriceResult vts_price(const PortfolioState& state, const StrategyConfig& cfg,
                      const MarketParams& mkt, const OptionSpec& opt);

// Integral of min{L * sigma(t), sigma_hat}^2 over [t0, T], summed segment by
// segment (the curve is piecewise constant, so the sum is exact).
double total_variance(const VolCurve& curve, const StrategyConfig& cfg,
                      const MarketParams& mkt);

// Option on the leverage-capped portfolio under the deterministic curve.
PriceResult mlvts_price(const PortfolioState& state, const StrategyConfig& cfg,
                        const MarketParams& mkt, const OptionSpec& opt,
                        const VolCurve& curve);

// Same, for a constant risky-asset volatility (the sensitivity-analysis
// regime): effective vol is min{L * sigma, sigma_hat} throughout.
PriceResult mlvts_price_const_vol(const PortfolioState& state, const StrategyConfig& cfg,
                                  const MarketParams& mkt, const OptionSpec& opt,
                                  double sigma);

// C - P - (v - K e^{-r tau}); zero up to rounding when call/put were priced
// on identical inputs.
double parity_gap(double call_price, double put_price, const PortfolioState& state,
                  const OptionSpec& opt, const MarketParams& mkt);

namespace detail {
// Shared closed-form engine: lognormal terminal value with the given total
// variance. Every public pricer funnels through this, which is what makes the
// algebraic reductions between them exact rather than approximate.
PriceResult price_from_total_variance(double v, double strike, double r, double tau,
                                      double total_variance, OptionKind kind);
}  // namespace detail

}  // namespace voltarget
