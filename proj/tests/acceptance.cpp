// Acceptance suite: one self-contained check per shipped guarantee, each
// printing a single PASS/FAIL line with the measured numbers. Exits nonzero
// if any check fails. Optional argv: the subset of check numbers to run.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "voltarget/greeks.hpp"
#include "voltarget/pricing.hpp"
#include "voltarget/simulation.hpp"
#include "voltarget/types.hpp"

using namespace voltarget;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double now_minus(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof(buf), format, args);
  va_end(args);
  return buf;
}

// ---- 1. plain-strategy price == Black-Scholes at the target volatility ----

Outcome check_vts_bs_equivalence() {
  const auto start = std::chrono::steady_clock::now();
  const std::vector<double> vs{5.0, 8.0, 12.0, 20.0};
  const std::vector<double> ks{4.0, 9.0, 11.0, 25.0};
  const std::vector<double> rs{-0.01, 0.0, 0.03, 0.08};
  const std::vector<double> sig_hats{0.05, 0.15, 0.3, 0.6};
  const std::vector<double> taus{0.1, 0.5, 1.0, 3.0};

  double worst = 0.0;
  std::size_t points = 0;
  for (double v : vs)
    for (double k : ks)
      for (double r : rs)
        for (double sh : sig_hats)
          for (double tau : taus) {
            const StrategyConfig cfg{sh, std::nullopt};
            const MarketParams mkt{r, 0.0, tau};
            const PortfolioState state{v, 10.0, 20.0};
            for (OptionKind kind : {OptionKind::Call, OptionKind::Put}) {
              const double lhs = vts_price(state, cfg, mkt, {k, kind}).price;
              const double rhs = bs_price(v, k, r, sh, tau, kind).price;
              const double gap = std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs));
              worst = std::max(worst, gap);
            }
            ++points;
          }
  const double elapsed = now_minus(start);
  const bool pass = worst <= 1e-12 && elapsed < 1.0;
  return {pass, fmt("%zu grid points, max rel gap %.2e, %.2f s", points, worst, elapsed)};
}

// ---- 2. put-call parity for both strategies ----

Outcome check_parity() {
  const auto start = std::chrono::steady_clock::now();
  const std::vector<double> vs{5.0, 8.0, 12.0, 20.0};
  const std::vector<double> ks{4.0, 9.0, 11.0, 25.0};
  const std::vector<double> rs{-0.01, 0.0, 0.03, 0.08};
  const std::vector<double> sig_hats{0.05, 0.15, 0.3, 0.6};
  const std::vector<double> taus{0.1, 0.5, 1.0, 3.0};

  double worst = 0.0;
  std::size_t points = 0;
  for (double v : vs)
    for (double k : ks)
      for (double r : rs)
        for (double sh : sig_hats)
          for (double tau : taus) {
            const MarketParams mkt{r, 0.0, tau};
            const PortfolioState state{v, 10.0, 20.0};
            const OptionSpec call{k, OptionKind::Call};
            const OptionSpec put{k, OptionKind::Put};
            const double tol = 1e-12 * std::max({1.0, v, k});

            const StrategyConfig plain{sh, std::nullopt};
            const double gap_plain =
                parity_gap(vts_price(state, plain, mkt, call).price,
                           vts_price(state, plain, mkt, put).price, state, call, mkt);
            worst = std::max(worst, std::abs(gap_plain) / tol * 1e-12);

            const StrategyConfig capped{sh, 2.0};
            const VolCurve curve{{0.0, 0.5 * tau, tau},
                                 {0.5 * sh / 2.0, 2.0 * sh}};
            const double gap_capped = parity_gap(
                mlvts_price(state, capped, mkt, call, curve).price,
                mlvts_price(state, capped, mkt, put, curve).price, state, call, mkt);
            worst = std::max(worst, std::abs(gap_capped) / tol * 1e-12);
            ++points;
          }
  const double elapsed = now_minus(start);
  const bool pass = worst <= 1e-12 && elapsed < 1.0;
  return {pass,
          fmt("%zu grid points, max scaled gap %.2e, %.2f s", points, worst, elapsed)};
}

// ---- 3. capped-strategy price reductions ----

Outcome check_mlvts_reductions() {
  double worst = 0.0;
  std::size_t points = 0;
  for (double v : {8.0, 12.0, 16.0})
    for (double k : {9.0, 11.0})
      for (double r : {0.0, 0.05})
        for (double tau : {0.5, 1.0, 2.0})
          for (OptionKind kind : {OptionKind::Call, OptionKind::Put}) {
            const StrategyConfig cfg{0.2, 2.0};
            const MarketParams mkt{r, 0.0, tau};
            const PortfolioState state{v, 10.0, 20.0};
            const OptionSpec opt{k, kind};

            // Cap slack everywhere: reduces to the plain-strategy price.
            const VolCurve high{{0.0, tau}, {0.4}};
            const double lhs_high = mlvts_price(state, cfg, mkt, opt, high).price;
            const double rhs_high = vts_price(state, cfg, mkt, opt).price;
            worst = std::max(worst, std::abs(lhs_high - rhs_high) /
                                        std::max(1.0, std::abs(rhs_high)));

            // Cap binding everywhere: reduces to Black-Scholes at L sigma.
            const VolCurve low{{0.0, tau}, {0.08}};
            const double lhs_low = mlvts_price(state, cfg, mkt, opt, low).price;
            const double rhs_low = bs_price(v, k, r, 2.0 * 0.08, tau, kind).price;
            worst = std::max(worst, std::abs(lhs_low - rhs_low) /
                                        std::max(1.0, std::abs(rhs_low)));
            points += 2;
          }
  return {worst <= 1e-12, fmt("%zu reductions, max rel gap %.2e", points, worst)};
}

// ---- 4. closed-form sensitivities against finite differences ----

Outcome check_greeks_fd() {
  const auto start = std::chrono::steady_clock::now();
  double worst = 0.0;
  std::size_t points = 0;
  bool vts_vega_zero = true;

  // Moderate moneyness and volatilities keep every validated sensitivity
  // well above the finite-difference noise floor at the pinned step sizes
  // (h_sigma = 1e-6, h_v = 1e-5 v), so the relative comparison is meaningful
  // at each of the 256 points.
  for (double v : {9.0, 10.0, 11.0, 12.0})
    for (double k : {9.5, 10.5})
      for (double sigma : {0.06, 0.3})
        for (double sh : {0.2, 0.35})
          for (double tau : {0.5, 1.5})
            for (OptionKind kind : {OptionKind::Call, OptionKind::Put})
              for (Strategy strategy : {Strategy::Vts, Strategy::Mlvts}) {
                const StrategyConfig cfg{
                    sh, strategy == Strategy::Mlvts
                            ? std::optional<double>(2.0)
                            : std::nullopt};
                const MarketParams mkt{0.05, 0.0, tau};
                const PortfolioState state{v, 10.0, 20.0};
                const OptionSpec opt{k, kind};
                ++points;

                auto price_at_sigma = [&](double s) {
                  return strategy == Strategy::Mlvts
                             ? mlvts_price_const_vol(state, cfg, mkt, opt, s).price
                             : vts_price(state, cfg, mkt, opt).price;
                };
                auto price_at_v = [&](double vv) {
                  const PortfolioState st{vv, state.s, state.b};
                  return strategy == Strategy::Mlvts
                             ? mlvts_price_const_vol(st, cfg, mkt, opt, sigma).price
                             : vts_price(st, cfg, mkt, opt).price;
                };

                // Vega directly in sigma.
                const double nu = vega(state, sigma, cfg, mkt, opt, strategy).value;
                const FdResult nu_fd = fd_check(price_at_sigma, sigma, 1e-6, nu);
                if (nu == 0.0) {
                  if (nu_fd.fd_estimate != 0.0) vts_vega_zero = false;
                } else {
                  worst = std::max(worst, nu_fd.abs_gap / std::abs(nu));
                }
                if (strategy == Strategy::Vts && nu != 0.0) vts_vega_zero = false;

                // Delta and gamma through the chain rule with the share count.
                const double weight = strategy == Strategy::Mlvts
                                          ? mlvts_weight(sigma, cfg)
                                          : vts_weight(sigma, cfg);
                const double phi = decompose(state, weight).phi;
                const double h = 1e-5 * v;

                const double dl = delta(state, sigma, cfg, mkt, opt, strategy).value;
                const FdResult dl_fd = fd_check(price_at_v, v, h, dl / phi);
                worst = std::max(worst, std::abs(dl_fd.fd_estimate * phi - dl) /
                                            std::abs(dl));

                const double gm = gamma(state, sigma, cfg, mkt, opt, strategy).value;
                const FdResult gm_fd = fd_check(price_at_v, v, h, gm / (phi * phi), 2);
                worst = std::max(worst, std::abs(gm_fd.fd_estimate * phi * phi - gm) /
                                            std::abs(gm));
              }
  const double elapsed = now_minus(start);
  const bool pass = worst <= 1e-4 && vts_vega_zero && elapsed < 5.0;
  return {pass, fmt("%zu grid points, max rel gap %.2e, plain vega identically zero: %s, %.2f s",
                    points, worst, vts_vega_zero ? "yes" : "no", elapsed)};
}

// ---- 5. vega-maximizing portfolio value ----

Outcome check_vega_argmax() {
  double worst = 0.0;
  std::size_t sets = 0;
  for (double k : {5.0, 10.0, 20.0, 40.0})
    for (double r : {-0.01, 0.02, 0.05, 0.08, 0.1}) {
      const double l = 1.5 + 0.5 * static_cast<double>(sets % 3);
      const double tau = 0.5 + 0.25 * static_cast<double>(sets % 5);
      const StrategyConfig cfg{0.2, l};
      const double sigma = 0.4 * 0.2 / l;  // safely cap binding
      const MarketParams mkt{r, 0.0, tau};
      const OptionSpec opt{k, OptionKind::Call};

      const double closed = vega_argmax_v(cfg, mkt, opt, sigma);
      const double numeric = oracles::golden_section_max(
          [&](double v) {
            return vega({v, 10.0, 20.0}, sigma, cfg, mkt, opt, Strategy::Mlvts).value;
          },
          0.05 * k, 6.0 * k, 1e-9 * k);
      worst = std::max(worst, std::abs(numeric - closed) / closed);
      ++sets;
    }
  return {worst <= 1e-3, fmt("%zu parameter sets, max rel gap %.2e", sets, worst)};
}

// ---- 6. constant-volatility Monte Carlo against the closed forms ----

Outcome check_mc_consistency() {
  const auto start = std::chrono::steady_clock::now();
  const MarketParams mkt{0.042, 0.0, 1.0};
  const PortfolioState state{100.0, 100.0, 20.0};
  const OptionSpec opt{100.0, OptionKind::Call};

  SimConfig sim;
  sim.n_steps = 1000;  // dt = 1e-3
  sim.n_paths = 100000;
  sim.seed = 20240915;
  sim.measure = Measure::RiskNeutral;

  // Unit-weight plain strategy.
  const HestonParams flat{2.0, 0.04, 0.0, 0.0, 0.04, 0.0824, 100.0};
  const StrategyConfig plain{0.2, std::nullopt};
  const McResult mc_plain = mc_price(flat, state, plain, mkt, opt, sim);
  const double closed_plain = vts_price(state, plain, mkt, opt).price;
  const double z_plain = (mc_plain.estimate - closed_plain) / mc_plain.std_error;
  const double z_martingale =
      (mc_plain.discounted_mean_vt - state.v) / mc_plain.discounted_vt_std_error;

  // Cap-binding capped strategy.
  const HestonParams lowvol{2.0, 0.0025, 0.0, 0.0, 0.0025, 0.0824, 100.0};
  const StrategyConfig capped{0.2, 2.0};
  const McResult mc_capped = mc_price(lowvol, state, capped, mkt, opt, sim);
  const double closed_capped = bs_price(100.0, 100.0, 0.042, 0.1, 1.0, OptionKind::Call).price;
  const double z_capped = (mc_capped.estimate - closed_capped) / mc_capped.std_error;
  const double z_mart_capped =
      (mc_capped.discounted_mean_vt - state.v) / mc_capped.discounted_vt_std_error;

  // Fine-step single-path smoke run in place of the figure-scale grids.
  SimConfig smoke;
  smoke.n_steps = 100000;  // dt = 1e-5
  smoke.n_paths = 1;
  smoke.seed = 7;
  const HestonParams high_vol{0.6067, 0.2207, 0.2928, -0.75, 0.2154, 0.0824, 100.0};
  const HestonPath hp = simulate_heston(high_vol, mkt, smoke, 0);
  const SimulatedPath sp = simulate_portfolio(hp, state, capped, mkt, smoke);
  const bool smoke_ok = std::isfinite(sp.portfolio.back()) && sp.portfolio.back() > 0.0;

  const double elapsed = now_minus(start);
  const bool pass = std::abs(z_plain) <= 3.0 && std::abs(z_capped) <= 3.0 &&
                    std::abs(z_martingale) <= 3.0 && std::abs(z_mart_capped) <= 3.0 &&
                    smoke_ok && elapsed < 60.0;
  return {pass, fmt("z(plain) %.2f, z(capped) %.2f, z(martingale) %.2f/%.2f, "
                    "smoke V_T %.2f, %.1f s",
                    z_plain, z_capped, z_martingale, z_mart_capped,
                    sp.portfolio.back(), elapsed)};
}

// ---- 7. strong convergence orders ----

Outcome check_convergence_orders() {
  const auto start = std::chrono::steady_clock::now();
  const MarketParams mkt{0.042, 0.0, 1.0};
  const PortfolioState state{100.0, 100.0, 20.0};
  const HestonParams flat{2.0, 0.16, 0.0, 0.0, 0.16, 0.0824, 100.0};
  const StrategyConfig cfg{0.2, std::nullopt};  // constant weight one half
  const WeightRule rule = WeightRule::from_strategy(cfg);
  const std::vector<std::size_t> ladder{64, 128, 256, 512, 1024};

  SimConfig sim;
  sim.n_paths = 2000;
  sim.seed = 1234;
  sim.measure = Measure::RealWorld;

  sim.scheme = Scheme::EulerMaruyama;
  const ConvergenceReport euler = convergence_study(flat, state, cfg, rule, mkt, sim, ladder);
  sim.scheme = Scheme::Milstein;
  const ConvergenceReport milstein =
      convergence_study(flat, state, cfg, rule, mkt, sim, ladder);

  const double elapsed = now_minus(start);
  const bool pass = euler.fitted_order >= 0.3 && euler.fitted_order <= 0.7 &&
                    milstein.fitted_order >= 0.75 && milstein.fitted_order <= 1.25 &&
                    elapsed < 120.0;
  return {pass, fmt("euler order %.3f (+/- %.3f), milstein order %.3f (+/- %.3f), %.1f s",
                    euler.fitted_order, euler.order_half_width, milstein.fitted_order,
                    milstein.order_half_width, elapsed)};
}

// ---- 8. qualitative regime reproduction under the calibrated parameters ----

Outcome check_heston_regimes() {
  const HestonParams high_vol{0.6067, 0.2207, 0.2928, -0.75, 0.2154, 0.0824, 100.0};
  const HestonParams capped_regime{0.6067, 0.1707, 0.2928, -0.75, 0.1654, 0.0824, 100.0};
  const FellerResult f1 = feller_check(high_vol);
  const FellerResult f2 = feller_check(capped_regime);

  const MarketParams mkt{0.042, 0.0, 1.0};
  const PortfolioState state{100.0, 100.0, 20.0};
  const StrategyConfig capped{0.2, 2.0};
  SimConfig sim;
  sim.n_steps = 1000;
  sim.n_paths = 1;
  sim.seed = 4242;

  std::size_t paths_with_cap = 0;
  std::size_t paths_with_low_weight = 0;
  for (std::uint64_t k = 0; k < 1000; ++k) {
    const HestonPath hp = simulate_heston(capped_regime, mkt, sim, k);
    const SimulatedPath sp = simulate_portfolio(hp, state, capped, mkt, sim);
    bool hit_cap = false, below_one = false;
    for (double w : sp.weight) {
      if (w == 2.0) hit_cap = true;
      if (w < 1.0) below_one = true;
    }
    paths_with_cap += hit_cap ? 1 : 0;
    paths_with_low_weight += below_one ? 1 : 0;
  }

  const bool pass = f1.holds && f2.holds && paths_with_cap >= 1 && paths_with_low_weight >= 1;
  return {pass, fmt("feller margins %.4f / %.4f, cap-binding paths %zu/1000, "
                    "deleveraged paths %zu/1000",
                    f1.margin, f2.margin, paths_with_cap, paths_with_low_weight)};
}

// ---- 9. byte-identical CLI output across reruns and worker counts ----

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return "<missing:" + path + ">";
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Outcome check_cli_determinism() {
  const std::string cli = VOLTARGET_CLI_PATH;
  const std::string dir = VOLTARGET_SCENARIO_DIR;
  auto run = [&](const std::string& env, const std::string& args) {
    const std::string cmd = env + " " + cli + " " + args + " > acc_cli.log 2>&1";
    return WEXITSTATUS(std::system(cmd.c_str()));
  };

  struct Job {
    std::string args;
    std::vector<std::string> files;
  };
  const std::vector<Job> jobs{
      {"mcprice --scenario " + dir + "/mc_vts_flat.json --paths 2000 --steps 100 --out acc_mc.csv",
       {"acc_mc.csv"}},
      {"simulate --scenario " + dir + "/heston_capped.json --paths 2 --steps 250 --out acc_sim.csv",
       {"acc_sim_p0.csv", "acc_sim_p1.csv"}},
      {"converge --scenario " + dir + "/convergence_flat.json --paths 400 --ladder 16,32,64 --out acc_conv.csv",
       {"acc_conv.csv"}},
      {"greeks --scenario " + dir + "/mlvts_lowvol.json --sweep sigma:0.02:0.4:25 --out acc_greeks.csv",
       {"acc_greeks.csv"}},
  };

  bool pass = true;
  std::string note;
  for (const Job& job : jobs) {
    if (run("VOLTARGET_THREADS=1", job.args) != 0) {
      pass = false;
      note += " run failed: " + job.args;
      continue;
    }
    std::vector<std::string> baseline;
    for (const std::string& f : job.files) baseline.push_back(slurp(f));

    if (run("VOLTARGET_THREADS=1", job.args) != 0) pass = false;
    for (std::size_t i = 0; i < job.files.size(); ++i) {
      if (slurp(job.files[i]) != baseline[i]) {
        pass = false;
        note += " rerun mismatch: " + job.files[i];
      }
    }

    if (run("VOLTARGET_THREADS=3", job.args) != 0) pass = false;
    for (std::size_t i = 0; i < job.files.size(); ++i) {
      if (slurp(job.files[i]) != baseline[i]) {
        pass = false;
        note += " thread mismatch: " + job.files[i];
      }
    }
  }
  if (note.empty()) note = fmt("%zu commands, reruns and 1 vs 3 workers byte-identical", jobs.size());
  return {pass, note};
}

}  // namespace

int main(int argc, char** argv) {
  struct Check {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Check> checks{
      {1, "plain price equals Black-Scholes at the target vol", check_vts_bs_equivalence},
      {2, "put-call parity", check_parity},
      {3, "capped price reductions", check_mlvts_reductions},
      {4, "sensitivities vs finite differences", check_greeks_fd},
      {5, "vega maximizer", check_vega_argmax},
      {6, "monte carlo vs closed forms", check_mc_consistency},
      {7, "strong convergence orders", check_convergence_orders},
      {8, "heston weight regimes", check_heston_regimes},
      {9, "cli determinism", check_cli_determinism},
  };

  std::vector<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.push_back(std::atoi(argv[i]));

  int failures = 0;
  for (const Check& check : checks) {
    if (!wanted.empty() &&
        std::find(wanted.begin(), wanted.end(), check.id) == wanted.end()) {
      continue;
    }
    Outcome outcome;
    try {
      outcome = check.run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    std::printf("[%s] %d. %s — %s\n", outcome.pass ? "PASS" : "FAIL", check.id,
                check.name, outcome.detail.c_str());
    std::fflush(stdout);
    if (!outcome.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
