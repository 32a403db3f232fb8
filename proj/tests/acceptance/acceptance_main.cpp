// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "gjr/black_scholes.hpp"
#include "gjr/calibration.hpp"
#include "gjr/estimation.hpp"
#include "gjr/gjr_tree.hpp"
#include "gjr/io.hpp"
#include "gjr/market_driver.hpp"
#include "gjr/path_dependent.hpp"
#include "gjr/risk_neutral.hpp"
#include "gjr/rng.hpp"
#include "gjr/skew_process.hpp"
#include "gjr/stats.hpp"
#include "oracles.hpp"

using namespace gjr;

namespace {

constexpr double kDt = 1.0 / 252.0;
const std::string kFixtures = GJR_FIXTURE_DIR;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

// 1. Sample moments of B_t^(alpha) against the closed forms.
Outcome sbm_moment_suite() {
  int checks = 0, ok = 0;
  double worst = 0.0;
  std::uint64_t seed = 100;
  for (double a : {0.1, 0.3, 0.5, 0.7, 0.9})
    for (double t : {0.5, 1.0, 4.0}) {
      const auto x = sbm_sample(SkewParam(a), t, 1000000, seed++);
      const auto m = sbm_moments(SkewParam(a), t);
      const auto s = stats::sample_moments(x);
      const double n = static_cast<double>(x.size());
      double m4 = 0.0;
      for (double v : x) m4 += std::pow(v - s.mean, 4);
      m4 /= n;
      const double se[4] = {std::sqrt(s.variance / n), std::sqrt((m4 - s.variance * s.variance) / n),
                            oracle::jackknife_se(x, 100, oracle::skewness),
                            oracle::jackknife_se(x, 100, oracle::excess_kurtosis)};
      const double got[4] = {s.mean, s.variance, s.skewness, s.excess_kurtosis};
      const double want[4] = {m.mean, m.variance, m.skewness, m.excess_kurtosis};
      for (int i = 0; i < 4; ++i) {
        const double z = std::abs(got[i] - want[i]) / se[i];
        worst = std::max(worst, z);
        ++checks;
        ok += z <= 3.0;
      }
    }
  return {ok == checks, std::to_string(ok) + "/" + std::to_string(checks) + " moments within 3 SE, worst " +
                            fmt("%.2f", worst) + " SE"};
}

// 2. Two-sample KS between the Azzalini representation and SBM.
Outcome azzalini_equivalence() {
  bool pass = true;
  std::ostringstream d;
  for (double delta : {-0.8, 0.0, 0.4}) {
    const auto a = azzalini_sample(delta, 1.0, 100000, 7);
    const auto b = sbm_sample(SkewParam((1.0 + delta) / 2.0), 1.0, 100000, 8);
    const auto ks = stats::ks_two_sample(a, b);
    pass = pass && ks.pvalue > 0.01;
    d << "delta=" << delta << " p=" << fmt("%.3g", ks.pvalue) << "; ";
  }
  d << "sqrt(1-d^2)B1 + d|B2| is skew-normal, which matches SBM in mean and variance but not in the third moment";
  return {pass, d.str()};
}

// 3. KS distance of the scaled walk at n = 1e4 to the closed-form CDF.
Outcome csyip_convergence() {
  bool pass = true;
  std::ostringstream d;
  const int n = 10000, paths = 10000;
  for (double a : {0.25, 0.5, 0.75}) {
    std::vector<double> b;
    b.reserve(paths);
    for (int i = 0; i < paths; ++i) {
      const auto w = skew_walk_path(SkewParam(a), n, 300, static_cast<std::uint64_t>(i));
      b.push_back(w.steps.back() / std::sqrt(static_cast<double>(n)));
    }
    const auto ks = stats::ks_one_sample(b, [a](double x) { return sbm_cdf(SkewParam(a), 1.0, x); });
    pass = pass && ks.statistic < 0.02;
    d << "alpha=" << a << " D=" << fmt("%.4f", ks.statistic) << "; ";
  }
  return {pass, d.str()};
}

// 4. Backward induction against brute-force enumeration.
Outcome enumeration_oracle() {
  CounterRng rng(4);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    for (bool htc : {false, true}) {
      RiskNeutralContext c;
      const int n = 1 + static_cast<int>(rng.uniform() * 12);
      const double dt = kDt * (1.0 + 20.0 * rng.uniform());
      const double sigma = 0.1 + 0.4 * rng.uniform();
      c.natural = {-0.2 + 0.5 * rng.uniform(), sigma, 0.25 / std::sqrt(dt) * (2.0 * rng.uniform() - 1.0), dt, n,
                   50.0 + 100.0 * rng.uniform()};
      c.rf = 0.05 * rng.uniform();
      c.mode = trial % 2 ? QMode::exact : QMode::leading_order;
      if (htc) c.htc = HTCParams{0.01 + 30.0 * rng.uniform(), 2.0 * rng.uniform() - 1.0};
      const double strike = c.natural.s0 * (0.8 + 0.4 * rng.uniform());
      const auto spec = trial % 3 == 0 ? EccSpec::put(strike, n * dt) : EccSpec::call(strike, n * dt);
      const auto r = price_ecc(c, spec, false);
      const double brute = oracle::enumerate_gjr(c.natural.s0, c.natural.mu, sigma, c.natural.beta, dt, n, c.rf,
                                                 r.schedule.q, spec.payoff);
      worst = std::max(worst, std::abs(r.price - brute));
    }
  }
  return {worst <= 1e-12, "100 cases, max |tree - enumeration| = " + fmt("%.2e", worst)};
}

// 5. Plain tree against Black-Scholes.
Outcome black_scholes_limit() {
  double worst = 0.0;
  for (double t : {0.25, 1.0})
    for (double m : {0.8, 0.9, 1.0, 1.1, 1.2}) {
      RiskNeutralContext c;
      c.rf = 0.0162;
      c.natural = {0.119, 0.151, 0.0, t / 1000.0, 1000, 100.0};
      const double tree = price_ecc(c, EccSpec::call(100.0 * m, t), false).price;
      const double bs = bs_price(100.0, 100.0 * m, t, c.rf, 0.151, OptionKind::call);
      worst = std::max(worst, std::abs(tree / bs - 1.0));
    }
  return {worst < 0.005, "max relative error " + fmt("%.2e", worst)};
}

// 6. Per-step risk-neutral log-return mean, from the lattice and the q schedule.
Outcome martingale_drift() {
  double worst = 0.0;
  const double bound = 5.0 * std::pow(kDt, 1.5);
  for (bool htc : {false, true}) {
    RiskNeutralContext c;
    c.natural = {0.119, 0.151, -0.978, kDt, 252, 419.67};
    c.rf = 0.0162;
    c.mode = QMode::exact;
    if (htc) c.htc = HTCParams{28.8, 0.297};
    const double l0 = htc ? 28.8 : 0.0;
    const double target = (c.rf / (1.0 + l0) - 0.5 * 0.151 * 0.151) * kDt;
    const auto tree = build_tree(c.natural);
    const auto sched = q_schedule(c);
    for (int k = 0; k < 252; ++k) {
      const double s = tree.price_at(k, 0);
      const double up = std::log(tree.price_at(k + 1, 1) / s), down = std::log(tree.price_at(k + 1, 0) / s);
      const double q = sched.q[static_cast<std::size_t>(k)];
      worst = std::max(worst, std::abs(q * up + (1.0 - q) * down - target));
    }
  }
  return {worst <= bound, "max |E[r] - target| = " + fmt("%.3e", worst) + " vs 5 dt^1.5 = " + fmt("%.3e", bound)};
}

// 7. Measure-reduction identities.
Outcome measure_reduction() {
  double dq = 0.0, dpath = 0.0, dnode = 0.0;
  for (QMode mode : {QMode::exact, QMode::leading_order}) {
    RiskNeutralContext plain;
    plain.natural = {0.119, 0.151, -0.978, kDt, 252, 419.67};
    plain.rf = 0.0162;
    plain.mode = mode;
    auto zero = plain;
    zero.htc = HTCParams{0.0, 0.0};
    for (int k = 0; k < 252; ++k) dq = std::max(dq, std::abs(q_prob(plain, k).q - q_prob(zero, k).q));
  }
  for (int n : {1, 4, 8, 12})
    for (double strike : {90.0, 100.0, 110.0}) {
      const EtaModel m{0.22, 0.0, "student_t", 6.24, kDt};
      RiskNeutralContext c;
      c.natural = {0.07, 0.22, 0.0, kDt, n, 100.0};
      c.rf = 0.0162;
      const auto spec = EccSpec::call(strike, n * kDt);
      dpath = std::max(dpath, std::abs(price_path_dependent(m, 0.07, 0.0162, 100.0, spec, n).price -
                                       price_ecc(c, spec, false).price));
    }
  const NaturalParams p{0.119, 0.151, 0.0, kDt, 252, 419.67};
  const auto tree = build_tree(p);
  for (int k = 0; k <= 252; ++k)
    for (int j = 0; j <= k; ++j) {
      const int m = 2 * j - k;
      const double jr = 419.67 * std::exp(k * 0.119 * kDt + m * 0.151 * std::sqrt(kDt));
      dnode = std::max(dnode, std::abs(tree.price_at(k, j) / jr - 1.0));
    }
  const bool pass = dq <= 1e-15 && dpath <= 1e-12 && dnode <= 1e-13;
  return {pass, "|q(0,0) - q| = " + fmt("%.1e", dq) + ", |path(gamma=0) - tree| = " + fmt("%.1e", dpath) +
                    ", max relative node gap to JR = " + fmt("%.1e", dnode)};
}

// 8. Estimation recovery on synthetic GJR series.
Outcome estimation_recovery() {
  const NaturalParams p{0.1, 0.15, -2.0, kDt, 252, 100.0};
  std::vector<double> sig;
  int sign_ok = 0;
  for (int r = 0; r < 200; ++r) {
    const auto walk = skew_walk_path(SkewParam(p.alpha_dt()), p.n, 800, static_cast<std::uint64_t>(r));
    ReturnSeries s;
    s.dt = kDt;
    s.cum_log_returns.push_back(0.0);
    for (int k = 1; k <= p.n; ++k) s.cum_log_returns.push_back(std::log(node_price(p, k, walk.steps[k]) / p.s0));
    const auto e = estimate_window(s);
    sig.push_back(e.sigma_hat);
    sign_ok += e.beta_hat < 0.0;
  }
  const double med = stats::median(sig);
  const double frac = sign_ok / 200.0;
  const bool pass = std::abs(med / 0.15 - 1.0) <= 0.10 && frac >= 0.80;
  return {pass, "median sigma_hat " + fmt("%.4f", med) + " (truth 0.15), sign(beta_hat) correct in " +
                    fmt("%.1f", 100.0 * frac) +
                    "% (the skew term is ~0.015 against random-walk noise ~0.15 over one window)"};
}

// 9. Implied targets from manufactured quotes, default bounds.
Outcome calibration_round_trips() {
  CalibrationContext base;
  base.mu = 0.119;
  base.sigma = 0.151;
  base.beta = -0.978;
  base.htc = HTCParams{2.0, 0.3};
  base.eta = EtaModel{0.2, 0.05, "student_t", 6.24, kDt};
  base.v = 0.1;
  const Date quote_date = *parse_iso_date("2021-06-01");
  struct Case {
    Target t;
    double truth;
  };
  int total = 0, ok = 0, among = 0;
  std::ostringstream misses;
  for (const Case& c : {Case{Target::mu, 0.07}, Case{Target::beta, -0.5}, Case{Target::sigma, 0.3},
                        Case{Target::lambda0, 5.0}, Case{Target::lambda1, 0.8}, Case{Target::path_sigma, 0.22}}) {
    int target_ok = 0, target_total = 0;
    for (int days : {12, 60}) {
      Date expiry = quote_date;
      for (int seen = 0; seen < days;) {
        expiry = Date{std::chrono::sys_days{expiry} + std::chrono::days{1}};
        const std::chrono::weekday w{std::chrono::sys_days{expiry}};
        if (w != std::chrono::Saturday && w != std::chrono::Sunday) ++seen;
      }
      for (double k : {380.0, 420.0, 450.0}) {
        OptionQuote q;
        q.quote_date = quote_date;
        q.expiry_date = expiry;
        q.strike = k;
        q.spot = 419.67;
        q.rf = 0.0162;
        q.mid = q.bid = q.ask = model_price(q, with_target(base, c.t, c.truth));
        auto fixed = base;
        if (c.t == Target::path_sigma) fixed.use_path_model = true;
        const auto p = implied_point(q, c.t, fixed);
        const bool hit = p.identified && std::abs(p.value - c.truth) <= 1e-6;
        bool in_roots = false;
        for (double r : p.roots) in_roots = in_roots || std::abs(r - c.truth) <= 1e-6;
        ++total;
        ++target_total;
        ok += hit;
        target_ok += hit;
        among += in_roots;
      }
    }
    if (target_ok < target_total)
      misses << target_name(c.t) << " " << target_ok << "/" << target_total << "; ";
  }
  std::string detail = std::to_string(ok) + "/" + std::to_string(total) + " recovered, truth among the roots in " +
                       std::to_string(among) + "/" + std::to_string(total);
  if (ok < total)
    detail += "; misses: " + misses.str() +
              "mu and beta slide the lattice past the strike, so the price oscillates in them and the inversion has "
              "several roots";
  return {ok == total, detail};
}

// 10. Path-dependent Monte Carlo against enumeration, n = 16.
Outcome path_mc_vs_enumeration() {
  CounterRng g(10);
  int inside = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const EtaModel m{0.1 + 0.3 * g.uniform(), 0.3 * g.uniform() - 0.1, "student_t", 5 + 20 * g.uniform(), kDt};
    const double v = 0.2 * g.uniform() - 0.05;
    const int n = 16;
    const auto spec =
        EccSpec::vanilla(g.uniform() < 0.5 ? OptionKind::call : OptionKind::put, 90 + 20 * g.uniform(), n * kDt);
    const double exact = price_path_dependent(m, v, 0.03, 100.0, spec, n).price;
    PathPricingOptions mc{PathMethod::monte_carlo, QMode::exact, 1000000, static_cast<std::uint64_t>(1000 + trial)};
    const auto r = price_path_dependent(m, v, 0.03, 100.0, spec, n, mc);
    const double z = std::abs(r.price - exact) / r.std_error;
    worst = std::max(worst, z);
    inside += z <= 3.0;
  }
  return {inside == 20, std::to_string(inside) + "/20 within 3 SE, worst " + fmt("%.2f", worst) + " SE"};
}

// 11. Regression values on the bundled synthetic fixtures.
Outcome fixture_regressions() {
  const auto prices = io::ingest_price_table(kFixtures + "/msft_prices.csv");
  const auto raw = io::ingest_factors(kFixtures + "/ff5_factors.csv", io::FactorUnits::percent);
  FactorPanel panel = raw;
  std::size_t split = 0;
  const Date split_date = *parse_iso_date("2017-04-28");
  for (std::size_t i = 0; i < prices.dates.size(); ++i)
    if (prices.dates[i] == split_date) split = i;
  DriverPipelineConfig cfg;
  cfg.ensemble_size = 1000000;
  cfg.seed = 11;
  const auto r = run_driver_pipeline(prices.closes, panel, split, cfg);
  const auto within2 = [](double x, double ref) { return x >= ref / 2.0 && x <= ref * 2.0; };
  const bool endo = within2(r.endogenous_rel_mse, 1.78e-3);
  const bool exo = within2(r.exogenous_fit.rel_mse, 3.22e-3);
  const double kappa = r.higher_moment.params.kappa;
  const bool kappa_ok = kappa >= 5.0 && kappa <= 10.0;

  const auto chain = io::ingest_chain(kFixtures + "/spy_chain.csv");
  CalibrationContext ctx;
  ctx.mu = 0.119;
  ctx.sigma = 0.151;
  ctx.beta = -0.978;
  const auto fit = fit_htc(chain, ctx);
  const bool lambda_ok = fit.htc.lambda0 >= 10.0 && fit.htc.lambda0 <= 60.0;

  std::ostringstream d;
  d << "endogenous relMSE " << fmt("%.3g", r.endogenous_rel_mse) << (endo ? " ok" : " MISS") << " (1.78e-3)"
    << ", exogenous relMSE " << fmt("%.3g", r.exogenous_fit.rel_mse) << (exo ? " ok" : " MISS") << " (3.22e-3)"
    << ", kappa " << fmt("%.3g", kappa) << (kappa_ok ? " ok" : " MISS") << " ([5, 10])"
    << ", lambda0 " << fmt("%.3g", fit.htc.lambda0) << " with lambda1 " << fmt("%.3g", fit.htc.lambda1)
    << (lambda_ok ? " ok" : " MISS") << " ([10, 60], relMSE " << fmt("%.2e", fit.rel_mse) << ")";
  if (!lambda_ok) d << "; lambda0 and lambda1 move q only through one combination, so the chain fixes a ridge, not lambda0";
  return {endo && exo && kappa_ok && lambda_ok, d.str()};
}

}  // namespace

int main() {
  const std::vector<std::pair<int, std::function<Outcome()>>> criteria = {
      {1, sbm_moment_suite},       {2, azzalini_equivalence},   {3, csyip_convergence},
      {4, enumeration_oracle},     {5, black_scholes_limit},    {6, martingale_drift},
      {7, measure_reduction},      {8, estimation_recovery},    {9, calibration_round_trips},
      {10, path_mc_vs_enumeration}, {11, fixture_regressions},
  };
  int failed = 0;
  for (const auto& [id, run] : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += !o.pass;
    std::cout << "CRITERION " << id << " " << (o.pass ? "PASS" : "FAIL") << ": " << o.detail << " ["
              << fmt("%.1f", secs) << " s]" << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
