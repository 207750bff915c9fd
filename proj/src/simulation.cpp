#include "voltarget/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <stdexcept>

#include "voltarget/greeks.hpp"
#include "voltarget/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace voltarget {

namespace {

struct Counters {
  std::size_t var_clamps = 0;
  std::size_t weight_clamps = 0;
  std::size_t floors = 0;
};

double drift_of(const HestonParams& p, const MarketParams& mkt, Measure measure) {
  return measure == Measure::RiskNeutral ? mkt.r : p.mu;
}

// Weight at one grid node, with the plain-strategy explosion guard. The
// capped strategy needs no guard: min{L, .} is already bounded.
double weight_for(double sigma, const StrategyConfig& cfg, const WeightRule& rule,
                  double bound, Counters& counters) {
  switch (rule.kind) {
    case WeightRule::Kind::Fixed:
      return rule.fixed_value;
    case WeightRule::Kind::Mlvts: {
      const double cap = cfg.cap();
      return cap * sigma <= cfg.sigma_hat ? cap : cfg.sigma_hat / sigma;
    }
    case WeightRule::Kind::Vts:
    default: {
      if (sigma * bound <= cfg.sigma_hat) {
        ++counters.weight_clamps;
        return bound;
      }
      return cfg.sigma_hat / sigma;
    }
  }
}

// Full-truncation Euler step for the raw square-root variance state.
double step_raw_variance(double x, const HestonParams& p, double dt, double dw2,
                         Counters& counters) {
  const double nu_plus = x > 0.0 ? x : 0.0;
  if (x < 0.0) ++counters.var_clamps;
  return x + p.kappa * (p.theta - nu_plus) * dt + p.xi * std::sqrt(nu_plus) * dw2;
}

// Log-space asset step with the drift integrated exactly over the step.
double step_asset(double s, double drift, double nu_plus, double dt, double dw1) {
  return s * std::exp((drift - 0.5 * nu_plus) * dt + std::sqrt(nu_plus) * dw1);
}

// One portfolio update. Euler is literally phi dS + psi dB on top of the
// share/bond decomposition; Milstein subtracts the weight-dependent
// correction. The value is floored at a tiny positive multiple of the
// starting value so a violent discrete move cannot take it non-positive.
double step_portfolio(double v, double alpha, double s, double b, double ds, double db,
                      double nu_plus, double dt, Scheme scheme, double floor_value,
                      Counters& counters) {
  const PortfolioDecomposition parts = decompose({v, s, b}, alpha);
  double next = v + parts.phi * ds + parts.psi * db;
  if (scheme == Scheme::Milstein) {
    const double rel = ds / s;
    next -= v * (0.5 * alpha * (1.0 - alpha)) * (rel * rel - nu_plus * dt);
  }
  if (!(next > 0.0)) {
    ++counters.floors;
    next = floor_value;
  }
  return next;
}

void run_paths(std::size_t n, int workers,
               const std::function<void(std::size_t)>& body) {
#ifdef _OPENMP
  if (workers > 1) {
#pragma omp parallel for schedule(static) num_threads(workers)
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
      body(static_cast<std::size_t>(i));
    }
    return;
  }
#else
  (void)workers;
#endif
  for (std::size_t i = 0; i < n; ++i) body(i);
}

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

// Fixed-order two-pass reduction; identical for any worker count.
MeanSe mean_and_se(const std::vector<double>& xs) {
  const std::size_t n = xs.size();
  double sum = 0.0;
  for (double x : xs) sum += x;
  const double mean = sum / static_cast<double>(n);
  if (n < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : xs) {
    const double d = x - mean;
    ss += d * d;
  }
  return {mean, std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n))};
}

double grid_time(const MarketParams& mkt, std::size_t n, std::size_t n_steps) {
  return mkt.t0 + mkt.tau() * (static_cast<double>(n) / static_cast<double>(n_steps));
}

}  // namespace

void SimConfig::validate() const {
  if (n_steps < 1) throw std::invalid_argument("SimConfig: n_steps must be >= 1");
  if (n_paths < 1) throw std::domain_error("SimConfig: n_paths must be >= 1");
  if (!(weight_bound > 0.0)) throw std::invalid_argument("SimConfig: weight_bound must be > 0");
}

int worker_count() {
  if (const char* env = std::getenv("VOLTARGET_THREADS")) {
    char* end = nullptr;
    const long parsed = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && parsed >= 1) {
      return static_cast<int>(std::min(parsed, 4096L));
    }
  }
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

FellerResult feller_check(const HestonParams& p) {
  p.validate();
  const double margin = 2.0 * p.kappa * p.theta - p.xi * p.xi;
  return {margin > 0.0, margin};
}

HestonPath simulate_heston(const HestonParams& p, const MarketParams& mkt,
                           const SimConfig& cfg, std::uint64_t path_index) {
  p.validate();
  mkt.validate();
  cfg.validate();

  const std::size_t n = cfg.n_steps;
  HestonPath path;
  path.times.resize(n + 1);
  path.asset.resize(n + 1);
  path.variance.resize(n + 1);

  const double drift = drift_of(p, mkt, cfg.measure);
  const double rho_c = std::sqrt(1.0 - p.rho * p.rho);

  PathRng rng(cfg.seed, path_index);
  Counters counters;

  double s = p.s0;
  double x = p.nu0;  // raw variance state, may dip below zero
  path.times[0] = mkt.t0;
  path.asset[0] = s;
  path.variance[0] = p.nu0;

  for (std::size_t i = 0; i < n; ++i) {
    const double t_next = grid_time(mkt, i + 1, n);
    const double dt = t_next - path.times[i];
    const double sq_dt = std::sqrt(dt);
    const double z1 = rng.normal();
    const double z2 = rng.normal();
    const double dw1 = sq_dt * z1;
    const double dw2 = sq_dt * (p.rho * z1 + rho_c * z2);

    const double nu_plus = x > 0.0 ? x : 0.0;
    const double x_next = step_raw_variance(x, p, dt, dw2, counters);
    s = step_asset(s, drift, nu_plus, dt, dw1);
    x = x_next;

    path.times[i + 1] = t_next;
    path.asset[i + 1] = s;
    path.variance[i + 1] = x > 0.0 ? x : 0.0;
  }
  if (!std::isfinite(s) || !std::isfinite(x)) {
    throw std::runtime_error("simulate_heston: non-finite state encountered");
  }
  path.variance_clamps = counters.var_clamps;
  return path;
}

SimulatedPath simulate_portfolio(const HestonPath& path, const PortfolioState& state,
                                 const StrategyConfig& cfg, const MarketParams& mkt,
                                 const SimConfig& sim) {
  return simulate_portfolio(path, state, cfg, WeightRule::from_strategy(cfg), mkt, sim);
}

SimulatedPath simulate_portfolio(const HestonPath& path, const PortfolioState& state,
                                 const StrategyConfig& cfg, const WeightRule& rule,
                                 const MarketParams& mkt, const SimConfig& sim) {
  state.validate();
  cfg.validate();
  mkt.validate();
  sim.validate();
  if (path.times.size() < 2 || path.asset.size() != path.times.size() ||
      path.variance.size() != path.times.size()) {
    throw std::invalid_argument("simulate_portfolio: malformed asset path");
  }

  const std::size_t n = path.times.size() - 1;
  SimulatedPath out;
  out.times = path.times;
  out.asset = path.asset;
  out.variance = path.variance;
  out.variance_clamps = path.variance_clamps;
  out.weight.resize(n + 1);
  out.bond.resize(n + 1);
  out.portfolio.resize(n + 1);

  Counters counters;
  const double floor_value = state.v * 1e-12;

  double v = state.v;
  double b = state.b;
  out.bond[0] = b;
  out.portfolio[0] = v;

  for (std::size_t i = 0; i < n; ++i) {
    const double sigma = std::sqrt(out.variance[i]);
    const double alpha = weight_for(sigma, cfg, rule, sim.weight_bound, counters);
    out.weight[i] = alpha;

    const double dt = out.times[i + 1] - out.times[i];
    const double b_next = state.b * std::exp(mkt.r * (out.times[i + 1] - mkt.t0));
    const double ds = out.asset[i + 1] - out.asset[i];
    const double db = b_next - b;

    v = step_portfolio(v, alpha, out.asset[i], b, ds, db, out.variance[i], dt,
                       sim.scheme, floor_value, counters);
    b = b_next;
    out.bond[i + 1] = b;
    out.portfolio[i + 1] = v;
  }
  // Terminal weight recorded for plotting; it never drives a step.
  {
    const double sigma = std::sqrt(out.variance[n]);
    Counters scratch;
    out.weight[n] = weight_for(sigma, cfg, rule, sim.weight_bound, scratch);
  }

  out.weight_clamps = counters.weight_clamps;
  out.value_floors = counters.floors;
  return out;
}

namespace {

McResult mc_price_core(const HestonParams& p, const PortfolioState& state,
                       const StrategyConfig& cfg, const MarketParams& mkt,
                       const OptionSpec& opt, const SimConfig& sim, int workers) {
  p.validate();
  state.validate();
  cfg.validate();
  mkt.validate();
  opt.validate();
  sim.validate();
  if (sim.measure != Measure::RiskNeutral) {
    throw std::invalid_argument("mc_price: requires the risk-neutral measure");
  }

  const std::size_t n_paths = sim.n_paths;
  const WeightRule rule = WeightRule::from_strategy(cfg);
  std::vector<double> payoff(n_paths);
  std::vector<double> terminal(n_paths);
  std::vector<std::size_t> vc(n_paths), wc(n_paths), fl(n_paths);

  run_paths(n_paths, workers, [&](std::size_t i) {
    const HestonPath hp = simulate_heston(p, mkt, sim, i);
    const SimulatedPath sp = simulate_portfolio(hp, state, cfg, rule, mkt, sim);
    const double vt = sp.portfolio.back();
    terminal[i] = vt;
    payoff[i] = opt.kind == OptionKind::Call ? std::max(vt - opt.strike, 0.0)
                                             : std::max(opt.strike - vt, 0.0);
    vc[i] = sp.variance_clamps;
    wc[i] = sp.weight_clamps;
    fl[i] = sp.value_floors;
  });

  const double disc = std::exp(-mkt.r * mkt.tau());
  const MeanSe pay = mean_and_se(payoff);
  const MeanSe vt = mean_and_se(terminal);

  McResult res;
  res.estimate = disc * pay.mean;
  res.std_error = disc * pay.se;
  res.discounted_mean_vt = disc * vt.mean;
  res.discounted_vt_std_error = disc * vt.se;
  for (std::size_t i = 0; i < n_paths; ++i) {
    res.variance_clamps += vc[i];
    res.weight_clamps += wc[i];
    res.value_floors += fl[i];
  }
  return res;
}

// Simulates one path of (S, nu, V) on a coarse grid whose increments are
// block sums of the fine increments; the level must divide the fine count.
double level_terminal_value(std::size_t n_level, const std::vector<double>& dw1_fine,
                            const std::vector<double>& dw2_fine, const HestonParams& p,
                            const PortfolioState& state, const StrategyConfig& cfg,
                            const WeightRule& rule, const MarketParams& mkt,
                            const SimConfig& sim, double drift) {
  const std::size_t stride = dw1_fine.size() / n_level;
  const double floor_value = state.v * 1e-12;
  Counters counters;

  double s = p.s0;
  double x = p.nu0;
  double v = state.v;
  double b = state.b;
  double t = mkt.t0;

  for (std::size_t i = 0; i < n_level; ++i) {
    double dw1 = 0.0;
    double dw2 = 0.0;
    for (std::size_t j = i * stride; j < (i + 1) * stride; ++j) {
      dw1 += dw1_fine[j];
      dw2 += dw2_fine[j];
    }
    const double t_next = grid_time(mkt, i + 1, n_level);
    const double dt = t_next - t;

    const double nu_plus = x > 0.0 ? x : 0.0;
    const double sigma = std::sqrt(nu_plus);
    const double alpha = weight_for(sigma, cfg, rule, sim.weight_bound, counters);

    const double s_next = step_asset(s, drift, nu_plus, dt, dw1);
    const double b_next = state.b * std::exp(mkt.r * (t_next - mkt.t0));
    v = step_portfolio(v, alpha, s, b, s_next - s, b_next - b, nu_plus, dt, sim.scheme,
                       floor_value, counters);
    x = step_raw_variance(x, p, dt, dw2, counters);
    s = s_next;
    b = b_next;
    t = t_next;
  }
  return v;
}

ConvergenceReport convergence_core(const HestonParams& p, const PortfolioState& state,
                                   const StrategyConfig& cfg, const WeightRule& rule,
                                   const MarketParams& mkt, const SimConfig& sim,
                                   const std::vector<std::size_t>& ladder, int workers) {
  p.validate();
  state.validate();
  cfg.validate();
  mkt.validate();
  sim.validate();
  if (ladder.size() < 2) {
    throw std::invalid_argument("convergence_study: need at least two ladder rungs");
  }
  std::vector<std::size_t> rungs = ladder;
  std::sort(rungs.begin(), rungs.end());
  if (std::adjacent_find(rungs.begin(), rungs.end()) != rungs.end()) {
    throw std::invalid_argument("convergence_study: duplicate ladder rungs");
  }
  const std::size_t n_max = rungs.back();
  for (std::size_t n : rungs) {
    if (n < 1 || n_max % n != 0) {
      throw std::invalid_argument("convergence_study: ladder must be nested (each rung divides the finest)");
    }
  }
  const double tau = mkt.tau();
  if (!(tau > 0.0)) throw std::domain_error("convergence_study: T must exceed t0");

  // Constant-variance runs have an exact lognormal solution; otherwise a grid
  // four times finer than the largest rung stands in for the exact path.
  const bool const_vol = p.xi == 0.0 && p.nu0 == p.theta;
  const std::size_t n_ref = const_vol ? n_max : 4 * n_max;
  const double drift = drift_of(p, mkt, sim.measure);
  const std::size_t n_paths = sim.n_paths;
  const std::size_t n_rungs = rungs.size();

  std::vector<std::vector<double>> abs_err(n_rungs, std::vector<double>(n_paths));

  run_paths(n_paths, workers, [&](std::size_t i) {
    PathRng rng(sim.seed, i);
    std::vector<double> dw1(n_ref), dw2(n_ref);
    const double dt_ref = tau / static_cast<double>(n_ref);
    const double sq_dt = std::sqrt(dt_ref);
    const double rho_c = std::sqrt(1.0 - p.rho * p.rho);
    for (std::size_t k = 0; k < n_ref; ++k) {
      const double z1 = rng.normal();
      const double z2 = rng.normal();
      dw1[k] = sq_dt * z1;
      dw2[k] = sq_dt * (p.rho * z1 + rho_c * z2);
    }

    double ref_vt;
    if (const_vol) {
      double w_total = 0.0;
      for (double w : dw1) w_total += w;
      const double sigma = std::sqrt(p.theta);
      Counters scratch;
      const double alpha = weight_for(sigma, cfg, rule, sim.weight_bound, scratch);
      ref_vt = state.v * std::exp((alpha * (drift - mkt.r) + mkt.r -
                                   0.5 * alpha * alpha * p.theta) *
                                      tau +
                                  alpha * sigma * w_total);
    } else {
      ref_vt = level_terminal_value(n_ref, dw1, dw2, p, state, cfg, rule, mkt, sim, drift);
    }

    for (std::size_t l = 0; l < n_rungs; ++l) {
      const double vt =
          level_terminal_value(rungs[l], dw1, dw2, p, state, cfg, rule, mkt, sim, drift);
      abs_err[l][i] = std::abs(ref_vt - vt);
    }
  });

  ConvergenceReport report;
  report.step_sizes.resize(n_rungs);
  report.strong_errors.resize(n_rungs);
  report.standard_errors.resize(n_rungs);
  for (std::size_t l = 0; l < n_rungs; ++l) {
    // Largest dt first so step_sizes decrease along the report.
    const std::size_t rung = rungs[l];
    const MeanSe ms = mean_and_se(abs_err[l]);
    report.step_sizes[l] = tau / static_cast<double>(rung);
    report.strong_errors[l] = ms.mean;
    report.standard_errors[l] = ms.se;
    if (!(ms.mean > 0.0)) {
      throw std::runtime_error("convergence_study: strong error vanished; order undefined");
    }
  }

  // Log-log least squares for the order, with a 95% half-width on the slope.
  const std::size_t m = n_rungs;
  double x_mean = 0.0, y_mean = 0.0;
  std::vector<double> xs(m), ys(m);
  for (std::size_t l = 0; l < m; ++l) {
    xs[l] = std::log(report.step_sizes[l]);
    ys[l] = std::log(report.strong_errors[l]);
    x_mean += xs[l];
    y_mean += ys[l];
  }
  x_mean /= static_cast<double>(m);
  y_mean /= static_cast<double>(m);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t l = 0; l < m; ++l) {
    sxx += (xs[l] - x_mean) * (xs[l] - x_mean);
    sxy += (xs[l] - x_mean) * (ys[l] - y_mean);
  }
  const double slope = sxy / sxx;
  double ss_res = 0.0;
  for (std::size_t l = 0; l < m; ++l) {
    const double fit = y_mean + slope * (xs[l] - x_mean);
    ss_res += (ys[l] - fit) * (ys[l] - fit);
  }
  const double slope_se =
      m > 2 ? std::sqrt(ss_res / static_cast<double>(m - 2) / sxx) : 0.0;
  report.fitted_order = slope;
  report.order_half_width = 1.96 * slope_se;
  return report;
}

}  // namespace

McResult mc_price(const HestonParams& p, const PortfolioState& state,
                  const StrategyConfig& cfg, const MarketParams& mkt,
                  const OptionSpec& opt, const SimConfig& sim) {
  return mc_price_core(p, state, cfg, mkt, opt, sim, worker_count());
}

McResult mc_price_serial(const HestonParams& p, const PortfolioState& state,
                         const StrategyConfig& cfg, const MarketParams& mkt,
                         const OptionSpec& opt, const SimConfig& sim) {
  return mc_price_core(p, state, cfg, mkt, opt, sim, 1);
}

ConvergenceReport convergence_study(const HestonParams& p, const PortfolioState& state,
                                    const StrategyConfig& cfg, const WeightRule& rule,
                                    const MarketParams& mkt, const SimConfig& sim,
                                    const std::vector<std::size_t>& ladder) {
  return convergence_core(p, state, cfg, rule, mkt, sim, ladder, worker_count());
}

ConvergenceReport convergence_study_serial(const HestonParams& p,
                                           const PortfolioState& state,
                                           const StrategyConfig& cfg,
                                           const WeightRule& rule,
                                           const MarketParams& mkt, const SimConfig& sim,
                                           const std::vector<std::size_t>& ladder) {
  return convergence_core(p, state, cfg, rule, mkt, sim, ladder, 1);
}

}  // namespace voltarget
