#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "voltarget/types.hpp"

namespace voltarget {

enum class Scheme { EulerMaruyama, Milstein };
enum class Measure { RealWorld, RiskNeutral };

struct SimConfig {
  std::size_t n_steps = 1;   // uniform grid, dt = (T - t0) / n_steps
  std::size_t n_paths = 1;
  std::uint64_t seed = 0;
  Scheme scheme = Scheme::EulerMaruyama;
  Measure measure = Measure::RealWorld;
  // Hard bound on the plain-strategy weight sigma_hat / sqrt(nu); the
  // square-root variance can come arbitrarily close to zero, and the plain
  // strategy has no cap of its own. Hits are counted, never silent.
  double weight_bound = 50.0;

  void validate() const;
};

// How the risky weight is chosen along a path. Fixed pins the weight to a
// constant, which is what the degenerate checks (all-bond, all-asset) use.
struct WeightRule {
  enum class Kind { Vts, Mlvts, Fixed };
  Kind kind = Kind::Vts;
  double fixed_value = 0.0;

  static WeightRule from_strategy(const StrategyConfig& cfg) {
    return {cfg.leverage_cap ? Kind::Mlvts : Kind::Vts, 0.0};
  }
  static WeightRule fixed(double alpha) { return {Kind::Fixed, alpha}; }
};

// One realization of the bivariate asset/variance process on the grid.
// variance holds the truncated (non-negative) values actually used.
struct HestonPath {
  std::vector<double> times;
  std::vector<double> asset;
  std::vector<double> variance;
  std::size_t variance_clamps = 0;  // steps where the raw variance was < 0
};

// Portfolio realization on the same grid. bond[n] = b * e^{r (t_n - t0)}
// recomputed from scratch each step, so it matches the closed form exactly.
struct SimulatedPath {
  std::vector<double> times;
  std::vector<double> asset;
  std::vector<double> variance;
  std::vector<double> weight;
  std::vector<double> bond;
  std::vector<double> portfolio;
  std::size_t variance_clamps = 0;
  std::size_t weight_clamps = 0;  // plain-strategy weight bound hits
  std::size_t value_floors = 0;   // discretized V floored at a tiny positive value
};

struct FellerResult {
  bool holds = false;   // strict 2 kappa theta > xi^2
  double margin = 0.0;  // 2 kappa theta - xi^2
};

FellerResult feller_check(const HestonParams& p);

// Full-truncation Euler for the variance, exact log-space stepping for the
// asset given the frozen per-step variance. Drift is mu under RealWorld and
// r under RiskNeutral. Deterministic given (cfg.seed, path_index).
HestonPath simulate_heston(const HestonParams& p, const MarketParams& mkt,
                           const SimConfig& cfg, std::uint64_t path_index = 0);

// Discretized portfolio on top of a simulated asset path. The Euler update is
// V_{n+1} = V_n + phi_n dS_n + psi_n dB_n with (phi, psi) the share/bond
// decomposition, so the grid-level self-financing identity holds bit-exactly.
// Milstein subtracts V_n * alpha(1-alpha)/2 * [(dS/S)^2 - nu dt].
SimulatedPath simulate_portfolio(const HestonPath& path, const PortfolioState& state,
                                 const StrategyConfig& cfg, const MarketParams& mkt,
                                 const SimConfig& sim);
SimulatedPath simulate_portfolio(const HestonPath& path, const PortfolioState& state,
                                 const StrategyConfig& cfg, const WeightRule& rule,
                                 const MarketParams& mkt, const SimConfig& sim);

struct McResult {
  double estimate = 0.0;   // discounted mean payoff
  double std_error = 0.0;
  // Martingale diagnostics: discounted mean terminal portfolio value and its
  // standard error (should reproduce the initial value under RiskNeutral).
  double discounted_mean_vt = 0.0;
  double discounted_vt_std_error = 0.0;
  std::size_t variance_clamps = 0;
  std::size_t weight_clamps = 0;
  std::size_t value_floors = 0;
};

// Monte Carlo price of the option on the simulated portfolio. Requires the
// RiskNeutral measure. Paths run on up to worker_count() OpenMP workers; the
// reduction is performed in path order, so the result is identical for any
// worker count. The _serial variant is the plain-loop reference used by the
// tests and the benchmark.
McResult mc_price(const HestonParams& p, const PortfolioState& state,
                  const StrategyConfig& cfg, const MarketParams& mkt,
                  const OptionSpec& opt, const SimConfig& sim);
McResult mc_price_serial(const HestonParams& p, const PortfolioState& state,
                         const StrategyConfig& cfg, const MarketParams& mkt,
                         const OptionSpec& opt, const SimConfig& sim);

struct ConvergenceReport {
  std::vector<double> step_sizes;       // decreasing dt, one per rung
  std::vector<double> strong_errors;    // mean |V_T(ref) - V_T(dt)|
  std::vector<double> standard_errors;  // standard error of each mean
  double fitted_order = 0.0;            // log-log regression slope
  double order_half_width = 0.0;        // 1.96 * slope standard error
};

// Strong-error ladder with coupled Brownian increments: one fine set of
// increments per path, aggregated onto every rung. Rungs are step counts and
// every rung must divide the largest one (nested grids). The reference is the
// exact lognormal solution when the variance is constant (xi == 0, nu0 ==
// theta); otherwise a grid 4x finer than the largest rung.
ConvergenceReport convergence_study(const HestonParams& p, const PortfolioState& state,
                                    const StrategyConfig& cfg, const WeightRule& rule,
                                    const MarketParams& mkt, const SimConfig& sim,
                                    const std::vector<std::size_t>& ladder);
ConvergenceReport convergence_study_serial(const HestonParams& p,
                                           const PortfolioState& state,
                                           const StrategyConfig& cfg,
                                           const WeightRule& rule,
                                           const MarketParams& mkt, const SimConfig& sim,
                                           const std::vector<std::size_t>& ladder);

// Worker bound: VOLTARGET_THREADS when set (minimum 1), else the OpenMP
// default, else 1. Never affects numerical results.
int worker_count();

}  // namespace voltarget
