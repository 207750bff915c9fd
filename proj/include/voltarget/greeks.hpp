#pragma once

#include <functional>

#include "voltarget/pricing.hpp"
#include "voltarget/types.hpp"

namespace voltarget {

enum class Strategy { Vts, Mlvts };

// Which formula branch produced a sensitivity. The capped strategy switches
// branch at sigma == sigma_hat / L; ties report CapBinding.
enum class GreekBranch { PlainVts, CapBinding, CapSlack };

const char* to_string(GreekBranch branch);

struct Sensitivity {
  double value = 0.0;
  GreekBranch branch = GreekBranch::PlainVts;
};

struct GreekReport {
  double vega = 0.0;
  double delta = 0.0;
  double gamma = 0.0;
  GreekBranch branch = GreekBranch::PlainVts;
};

// Instantaneous number of shares and bonds replicating the portfolio:
// phi = v * weight / s, psi = v * (1 - weight) / b.
struct PortfolioDecomposition {
  double phi = 0.0;
  double psi = 0.0;
};

PortfolioDecomposition decompose(const PortfolioState& state, double weight);

// Sensitivity of the portfolio value itself to the risky asset:
// v * weight / s, with the capped weight when leverage_cap is present.
double portfolio_delta(const PortfolioState& state, double sigma,
                       const StrategyConfig& cfg);

// Option sensitivities in the constant-volatility regime. Vega is identically
// zero for the plain strategy and for the capped strategy above the branch
// point; gamma is singular at tau == 0 and throws there.
Sensitivity vega(const PortfolioState& state, double sigma, const StrategyConfig& cfg,
                 const MarketParams& mkt, const OptionSpec& opt, Strategy strategy);
Sensitivity delta(const PortfolioState& state, double sigma, const StrategyConfig& cfg,
                  const MarketParams& mkt, const OptionSpec& opt, Strategy strategy);
Sensitivity gamma(const PortfolioState& state, double sigma, const StrategyConfig& cfg,
                  const MarketParams& mkt, const OptionSpec& opt, Strategy strategy);

GreekReport greeks(const PortfolioState& state, double sigma, const StrategyConfig& cfg,
                   const MarketParams& mkt, const OptionSpec& opt, Strategy strategy);

// Portfolio value at which the capped-strategy vega peaks:
// v* = K e^{-tau (r - L^2 sigma^2 / 2)}. Only defined in the cap-binding
// regime; the slack regime has vega identically zero and throws.
double vega_argmax_v(const StrategyConfig& cfg, const MarketParams& mkt,
                     const OptionSpec& opt, double sigma);

// Central finite-difference check of a closed-form sensitivity.
// derivative_order 1 uses (f(x+h) - f(x-h)) / 2h, order 2 the three-point
// second difference. Non-finite evaluations raise a diagnostic error; the gap
// is always reported, never judged here.
struct FdResult {
  double closed_form = 0.0;
  double fd_estimate = 0.0;
  double abs_gap = 0.0;
};

FdResult fd_check(const std::function<double(double)>& price_of, double x0, double h,
                  double closed_form, int derivative_order = 1);

}  // namespace voltarget
