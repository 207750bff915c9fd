#include "voltarget/greeks.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace voltarget {

namespace {

GreekBranch classify(double sigma, const StrategyConfig& cfg, Strategy strategy) {
  if (strategy == Strategy::Vts) return GreekBranch::PlainVts;
  return cfg.cap() * sigma <= cfg.sigma_hat ? GreekBranch::CapBinding
                                            : GreekBranch::CapSlack;
}

// d1 of the reduced constant-volatility price with the given effective vol.
double d1_for_vol(double v, double strike, double r, double tau, double vol) {
  const double sq = vol * std::sqrt(tau);
  return (std::log(v / strike) + r * tau) / sq + 0.5 * sq;
}

void check_inputs(const PortfolioState& state, double sigma, const StrategyConfig& cfg,
                  const MarketParams& mkt, const OptionSpec& opt) {
  state.validate();
  cfg.validate();
  mkt.validate();
  opt.validate();
  if (!(sigma > 0.0)) throw std::domain_error("greeks: sigma must be > 0");
}

}  // namespace

const char* to_string(GreekBranch branch) {
  switch (branch) {
    case GreekBranch::PlainVts: return "plain_vts";
    case GreekBranch::CapBinding: return "cap_binding";
    case GreekBranch::CapSlack: return "cap_slack";
  }
  return "unknown";
}

PortfolioDecomposition decompose(const PortfolioState& state, double weight) {
  state.validate();
  if (!std::isfinite(weight)) throw std::domain_error("decompose: weight must be finite");
  return {state.v * weight / state.s, state.v * (1.0 - weight) / state.b};
}

double portfolio_delta(const PortfolioState& state, double sigma,
                       const StrategyConfig& cfg) {
  state.validate();
  if (!(sigma > 0.0)) throw std::domain_error("portfolio_delta: sigma must be > 0");
  const double weight =
      cfg.leverage_cap ? mlvts_weight(sigma, cfg) : vts_weight(sigma, cfg);
  return state.v * weight / state.s;
}

Sensitivity vega(const PortfolioState& state, double sigma, const StrategyConfig& cfg,
                 const MarketParams& mkt, const OptionSpec& opt, Strategy strategy) {
  check_inputs(state, sigma, cfg, mkt, opt);
  const GreekBranch branch = classify(sigma, cfg, strategy);
  if (branch != GreekBranch::CapBinding) return {0.0, branch};

  const double tau = mkt.tau();
  if (tau == 0.0 || opt.strike == 0.0) return {0.0, branch};
  const double cap = cfg.cap();
  const double d1t = d1_for_vol(state.v, opt.strike, mkt.r, tau, cap * sigma);
  // Identical for calls and puts.
  return {state.v * norm_pdf(d1t) * cap * std::sqrt(tau), branch};
}

Sensitivity delta(const PortfolioState& state, double sigma, const StrategyConfig& cfg,
                  const MarketParams& mkt, const OptionSpec& opt, Strategy strategy) {
  check_inputs(state, sigma, cfg, mkt, opt);
  const GreekBranch branch = classify(sigma, cfg, strategy);
  const double tau = mkt.tau();
  if (tau == 0.0) throw std::domain_error("delta: tau == 0 (intrinsic regime)");

  double scale;    // number-of-shares factor in front of N(d1)
  double d1;
  if (branch == GreekBranch::CapBinding) {
    const double cap = cfg.cap();
    scale = cap * state.v / state.s;
    d1 = opt.strike == 0.0 ? std::numeric_limits<double>::infinity()
                           : d1_for_vol(state.v, opt.strike, mkt.r, tau, cap * sigma);
  } else {
    scale = state.v * cfg.sigma_hat / (state.s * sigma);
    d1 = opt.strike == 0.0 ? std::numeric_limits<double>::infinity()
                           : d1_for_vol(state.v, opt.strike, mkt.r, tau, cfg.sigma_hat);
  }
  const double n1 = norm_cdf(d1);
  return {opt.kind == OptionKind::Call ? scale * n1 : scale * (n1 - 1.0), branch};
}

Sensitivity gamma(const PortfolioState& state, double sigma, const StrategyConfig& cfg,
                  const MarketParams& mkt, const OptionSpec& opt, Strategy strategy) {
  check_inputs(state, sigma, cfg, mkt, opt);
  const GreekBranch branch = classify(sigma, cfg, strategy);
  const double tau = mkt.tau();
  if (tau == 0.0) throw std::domain_error("gamma: tau == 0 (formula singular)");
  if (opt.strike == 0.0) return {0.0, branch};

  const double sqt = std::sqrt(tau);
  // Same for calls and puts.
  if (branch == GreekBranch::CapBinding) {
    const double cap = cfg.cap();
    const double d1t = d1_for_vol(state.v, opt.strike, mkt.r, tau, cap * sigma);
    return {cap * state.v / (state.s * state.s * sigma * sqt) * norm_pdf(d1t), branch};
  }
  const double d1 = d1_for_vol(state.v, opt.strike, mkt.r, tau, cfg.sigma_hat);
  return {state.v * cfg.sigma_hat / (state.s * state.s * sigma * sigma * sqt) *
              norm_pdf(d1),
          branch};
}

GreekReport greeks(const PortfolioState& state, double sigma, const StrategyConfig& cfg,
                   const MarketParams& mkt, const OptionSpec& opt, Strategy strategy) {
  GreekReport report;
  const Sensitivity nu = vega(state, sigma, cfg, mkt, opt, strategy);
  report.vega = nu.value;
  report.branch = nu.branch;
  report.delta = delta(state, sigma, cfg, mkt, opt, strategy).value;
  report.gamma = gamma(state, sigma, cfg, mkt, opt, strategy).value;
  return report;
}

double vega_argmax_v(const StrategyConfig& cfg, const MarketParams& mkt,
                     const OptionSpec& opt, double sigma) {
  cfg.validate();
  mkt.validate();
  opt.validate();
  if (!(sigma > 0.0)) throw std::domain_error("vega_argmax_v: sigma must be > 0");
  const double cap = cfg.cap();
  if (cap * sigma > cfg.sigma_hat) {
    throw std::domain_error("vega_argmax_v: vega is identically zero above sigma_hat/L");
  }
  const double tau = mkt.tau();
  return opt.strike * std::exp(-tau * (mkt.r - 0.5 * cap * cap * sigma * sigma));
}

FdResult fd_check(const std::function<double(double)>& price_of, double x0, double h,
                  double closed_form, int derivative_order) {
  if (!(h > 0.0)) throw std::invalid_argument("fd_check: h must be > 0");
  if (derivative_order != 1 && derivative_order != 2) {
    throw std::invalid_argument("fd_check: derivative_order must be 1 or 2");
  }
  const double up = price_of(x0 + h);
  const double dn = price_of(x0 - h);
  double estimate;
  if (derivative_order == 1) {
    estimate = (up - dn) / (2.0 * h);
  } else {
    const double mid = price_of(x0);
    if (!std::isfinite(mid)) {
      throw std::runtime_error("fd_check: non-finite evaluation at x0=" + std::to_string(x0));
    }
    estimate = (up - 2.0 * mid + dn) / (h * h);
  }
  if (!std::isfinite(up) || !std::isfinite(dn) || !std::isfinite(estimate)) {
    throw std::runtime_error("fd_check: non-finite evaluation near x0=" + std::to_string(x0));
  }
  return {closed_form, estimate, std::abs(estimate - closed_form)};
}

}  // namespace voltarget
