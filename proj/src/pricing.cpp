#include "voltarget/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace voltarget {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;
}  // namespace

double norm_cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }

double norm_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

namespace detail {

PriceResult price_from_total_variance(double v, double strike, double r, double tau,
                                      double total_variance, OptionKind kind) {
  PriceResult res;
  res.total_variance = total_variance;

  if (strike == 0.0) {
    // Zero strike: a call pays the full terminal value, a put pays nothing.
    res.d1 = res.d2 = kInf;
    res.price = kind == OptionKind::Call ? v : 0.0;
    return res;
  }
  if (tau == 0.0) {
    res.price = kind == OptionKind::Call ? std::max(v - strike, 0.0)
                                         : std::max(strike - v, 0.0);
    res.d1 = res.d2 = v > strike ? kInf : (v < strike ? -kInf : 0.0);
    return res;
  }
  if (total_variance == 0.0) {
    // Deterministic terminal value v e^{r tau}; discounted payoff.
    const double fwd_gap = v - strike * std::exp(-r * tau);
    res.price = kind == OptionKind::Call ? std::max(fwd_gap, 0.0) : std::max(-fwd_gap, 0.0);
    res.d1 = res.d2 = fwd_gap > 0.0 ? kInf : (fwd_gap < 0.0 ? -kInf : 0.0);
    return res;
  }

  const double sq = std::sqrt(total_variance);
  res.d1 = (std::log(v / strike) + r * tau) / sq + 0.5 * sq;
  res.d2 = res.d1 - sq;
  const double disc = std::exp(-r * tau);
  if (kind == OptionKind::Call) {
    res.price = v * norm_cdf(res.d1) - strike * disc * norm_cdf(res.d2);
  } else {
    res.price = strike * disc * norm_cdf(-res.d2) - v * norm_cdf(-res.d1);
  }
  return res;
}

}  // namespace detail

PriceResult bs_price(double spot, double strike, double r, double vol, double tau,
                     OptionKind kind) {
  if (!(spot > 0.0)) throw std::domain_error("bs_price: spot must be > 0");
  if (!(strike >= 0.0)) throw std::domain_error("bs_price: strike must be >= 0");
  if (!(tau >= 0.0)) throw std::domain_error("bs_price: tau must be >= 0");
  if (tau > 0.0 && !(vol > 0.0)) throw std::domain_error("bs_price: vol must be > 0");
  return detail::price_from_total_variance(spot, strike, r, tau, vol * vol * tau, kind);
}

PriceResult vts_price(const PortfolioState& state, const StrategyConfig& cfg,
                      const MarketParams& mkt, const OptionSpec& opt) {
  state.validate();
  cfg.validate();
  mkt.validate();
  opt.validate();
  const double tau = mkt.tau();
  return detail::price_from_total_variance(state.v, opt.strike, mkt.r, tau,
                                           cfg.sigma_hat * cfg.sigma_hat * tau, opt.kind);
}

double total_variance(const VolCurve& curve, const StrategyConfig& cfg,
                      const MarketParams& mkt) {
  curve.validate();
  cfg.validate();
  mkt.validate();
  const double cap = cfg.cap();
  if (!curve.covers(mkt.t0, mkt.T)) {
    throw std::domain_error("total_variance: curve does not cover [t0, T]");
  }

  double acc = 0.0;
  for (std::size_t i = 0; i < curve.values.size(); ++i) {
    const double lo = std::max(curve.breakpoints[i], mkt.t0);
    const double hi = std::min(curve.breakpoints[i + 1], mkt.T);
    if (hi <= lo) continue;
    const double eff = std::min(cap * curve.values[i], cfg.sigma_hat);
    acc += eff * eff * (hi - lo);
  }
  return acc;
}

PriceResult mlvts_price(const PortfolioState& state, const StrategyConfig& cfg,
                        const MarketParams& mkt, const OptionSpec& opt,
                        const VolCurve& curve) {
  state.validate();
  opt.validate();
  const double varsigma = total_variance(curve, cfg, mkt);
  return detail::price_from_total_variance(state.v, opt.strike, mkt.r, mkt.tau(),
                                           varsigma, opt.kind);
}

PriceResult mlvts_price_const_vol(const PortfolioState& state, const StrategyConfig& cfg,
                                  const MarketParams& mkt, const OptionSpec& opt,
                                  double sigma) {
  state.validate();
  cfg.validate();
  mkt.validate();
  opt.validate();
  if (!(sigma > 0.0)) throw std::domain_error("mlvts_price_const_vol: sigma must be > 0");
  const double tau = mkt.tau();
  const double eff = std::min(cfg.cap() * sigma, cfg.sigma_hat);
  return detail::price_from_total_variance(state.v, opt.strike, mkt.r, tau,
                                           eff * eff * tau, opt.kind);
}

double parity_gap(double call_price, double put_price, const PortfolioState& state,
                  const OptionSpec& opt, const MarketParams& mkt) {
  return call_price - put_price -
         (state.v - opt.strike * std::exp(-mkt.r * mkt.tau()));
}

}  // namespace voltarget
