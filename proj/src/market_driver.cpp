#include "gjr/market_driver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <Eigen/Dense>

#include "gjr/errors.hpp"
#include "gjr/optimize.hpp"
#include "gjr/rng.hpp"

namespace gjr {

void FactorPanel::validate() const {
  const std::size_t n = rf.size();
  if (mkt_rf.size() != n || smb.size() != n || hml.size() != n || rmw.size() != n || cma.size() != n)
    throw DataError("FactorPanel: factor columns have different lengths");
  if (!dates.empty() && dates.size() != n) throw DataError("FactorPanel: dates/factor length mismatch");
  for (const auto* col : {&mkt_rf, &smb, &hml, &rmw, &cma, &rf})
    for (double x : *col)
      if (!std::isfinite(x)) throw DataError("FactorPanel: non-finite factor value");
  for (std::size_t i = 1; i < dates.size(); ++i)
    if (!(dates[i - 1] < dates[i])) throw DataError("FactorPanel: dates must be strictly increasing");
}

FactorPanel FactorPanel::slice(std::size_t begin, std::size_t end) const {
  if (begin > end || end > size()) throw InvalidArgument("FactorPanel::slice: range out of bounds");
  const auto cut = [&](const auto& v) {
    return std::decay_t<decltype(v)>(v.begin() + static_cast<std::ptrdiff_t>(begin), v.begin() + static_cast<std::ptrdiff_t>(end));
  };
  FactorPanel p;
  if (!dates.empty()) p.dates = cut(dates);
  p.mkt_rf = cut(mkt_rf);
  p.smb = cut(smb);
  p.hml = cut(hml);
  p.rmw = cut(rmw);
  p.cma = cut(cma);
  p.rf = cut(rf);
  return p;
}

FactorFit ff5_fit(std::span<const double> stock_returns, const FactorPanel& panel, const RobustOptions& options) {
  panel.validate();
  const std::size_t m = stock_returns.size();
  if (panel.size() != m) throw DataError("ff5_fit: stock returns and factor panel are not aligned");
  if (m < 60) throw DataError("ff5_fit: need at least 60 aligned observations");
  Eigen::MatrixXd x(static_cast<Eigen::Index>(m), 6);
  Eigen::VectorXd y(static_cast<Eigen::Index>(m));
  for (std::size_t j = 0; j < m; ++j) {
    const auto i = static_cast<Eigen::Index>(j);
    x.row(i) << 1.0, panel.mkt_rf[j], panel.smb[j], panel.hml[j], panel.rmw[j], panel.cma[j];
    y[i] = stock_returns[j] - panel.rf[j];
  }
  const RobustFit rf = robust_fit(x, y, options);
  FactorFit out;
  out.a = rf.coef[0];
  out.b = rf.coef[1];
  out.s = rf.coef[2];
  out.h = rf.coef[3];
  out.r = rf.coef[4];
  out.c = rf.coef[5];
  out.fitted.resize(m);
  out.residuals.resize(m);
  out.weights.assign(rf.weights.data(), rf.weights.data() + rf.weights.size());
  double mean = 0.0;
  for (double r : stock_returns) mean += r;
  mean /= static_cast<double>(m);
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    const auto i = static_cast<Eigen::Index>(j);
    out.fitted[j] = panel.rf[j] + (y[i] - rf.residuals[i]);
    out.residuals[j] = rf.residuals[i];
    ss_res += out.residuals[j] * out.residuals[j];
    ss_tot += (stock_returns[j] - mean) * (stock_returns[j] - mean);
  }
  out.r_square = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 0.0;
  out.rmse = std::sqrt(ss_res / static_cast<double>(m));
  return out;
}

SkewPath endogenous_path(std::span<const double> returns) {
  SkewPath p;
  p.steps.resize(returns.size() + 1);
  p.steps[0] = 0;
  for (std::size_t j = 0; j < returns.size(); ++j) p.steps[j + 1] = p.steps[j] + (returns[j] >= 0.0 ? 1 : -1);
  return p;
}

std::vector<double> driver_prices(const NaturalParams& params, const std::vector<int>& steps) {
  if (steps.empty() || steps[0] != 0) throw InvalidArgument("driver_prices: path must start at M_0 = 0");
  std::vector<double> s(steps.size());
  for (std::size_t k = 0; k < steps.size(); ++k) s[k] = node_price(params, static_cast<int>(k), steps[k]);
  return s;
}

double rel_mse(std::span<const double> model, std::span<const double> target) {
  if (model.size() != target.size()) throw InvalidArgument("rel_mse: length mismatch");
  if (target.size() < 2) throw InvalidArgument("rel_mse: need at least one step");
  double sum = 0.0;
  for (std::size_t k = 1; k < target.size(); ++k) {
    if (!(target[k] > 0.0)) throw DataError("rel_mse: non-positive target price");
    const double e = (model[k] - target[k]) / target[k];
    sum += e * e;
  }
  return sum / static_cast<double>(target.size() - 1);
}

DriverFitResult exogenous_fit(std::span<const double> target_prices, const DriverParams& params, double dt,
                              std::size_t ensemble_size, std::uint64_t seed) {
  if (ensemble_size < 1) throw InvalidArgument("exogenous_fit: ensemble_size must be >= 1");
  if (target_prices.size() < 2) throw InvalidArgument("exogenous_fit: need at least two target prices");
  if (!(dt > 0.0)) throw InvalidArgument("exogenous_fit: dt must be positive");
  const double alpha = 0.5 * (1.0 + params.beta * std::sqrt(dt));
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("exogenous_fit: alpha outside (0,1); need |beta| sqrt(dt) < 1");
  const int n = static_cast<int>(target_prices.size()) - 1;
  const NaturalParams np{params.mu, params.sigma, params.beta, dt, n, target_prices[0]};
  np.validate();
  for (double t : target_prices)
    if (!(t > 0.0)) throw DataError("exogenous_fit: non-positive target price");

  // model_k / target_k = c_k exp(M sigma sqrt(dt)).
  std::vector<double> c(static_cast<std::size_t>(n) + 1), b(2 * static_cast<std::size_t>(n) + 1);
  for (int k = 0; k <= n; ++k) c[static_cast<std::size_t>(k)] = node_price(np, k, 0) / target_prices[static_cast<std::size_t>(k)];
  for (int m = -n; m <= n; ++m) b[static_cast<std::size_t>(m + n)] = std::exp(m * params.sigma * std::sqrt(dt));

  const SkewParam a(alpha);
  double best = std::numeric_limits<double>::infinity();
  std::size_t best_index = 0;
  for (std::size_t i = 0; i < ensemble_size; ++i) {
    CounterRng rng(seed, i);
    int m = 0;
    double sse = 0.0;
    bool abandoned = false;
    for (int k = 1; k <= n; ++k) {
      m += skew_walk_step(a, m, rng.uniform());
      const double e = c[static_cast<std::size_t>(k)] * b[static_cast<std::size_t>(m + n)] - 1.0;
      sse += e * e;
      if (sse >= best) {
        abandoned = true;
        break;
      }
    }
    if (!abandoned) {
      best = sse;
      best_index = i;
    }
  }

  DriverFitResult out;
  out.params = params;
  out.params.alpha = alpha;
  out.chosen_path = skew_walk_path(a, n, seed, best_index);
  out.path_index = best_index;
  out.ensemble_size = ensemble_size;
  out.seed = seed;
  out.rel_mse = rel_mse(driver_prices(np, out.chosen_path.steps), target_prices);
  return out;
}

namespace {

void check_higher_moment_inputs(std::span<const double> returns, const std::vector<int>& steps, double dt) {
  if (returns.size() < 4) throw InvalidArgument("fit_higher_moment: need at least four returns");
  if (steps.size() < returns.size() + 1) throw InvalidArgument("fit_higher_moment: path shorter than the return series");
  if (steps[0] != 0) throw InvalidArgument("fit_higher_moment: path must start at M_0 = 0");
  if (!(dt > 0.0)) throw InvalidArgument("fit_higher_moment: dt must be positive");
}

Eigen::MatrixXd higher_moment_design(const std::vector<int>& steps, std::size_t n, double dt, double kappa, bool with_gamma) {
  const double sq = std::sqrt(dt);
  Eigen::MatrixXd x(static_cast<Eigen::Index>(n), with_gamma ? 3 : 2);
  for (std::size_t k = 1; k <= n; ++k) {
    const auto i = static_cast<Eigen::Index>(k - 1);
    const double dm = steps[k] - steps[k - 1];
    x(i, 0) = dt;
    x(i, 1) = sq * dm;
    if (with_gamma) x(i, 2) = sq * dm * student_t_density(sq * steps[k - 1], kappa);
  }
  return x;
}

struct LinearSolve {
  Eigen::VectorXd coef;
  double sse = 0.0;
  Eigen::MatrixXd design;
};

LinearSolve solve_linear(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  if (qr.rank() < x.cols()) throw DataError("fit_higher_moment: design is rank deficient");
  LinearSolve s;
  s.coef = qr.solve(y);
  s.sse = (y - x * s.coef).squaredNorm();
  s.design = x;
  return s;
}

}  // namespace

double higher_moment_sse(std::span<const double> returns, const std::vector<int>& steps, double dt,
                         const HigherMomentParams& p) {
  check_higher_moment_inputs(returns, steps, dt);
  const double sq = std::sqrt(dt);
  double sse = 0.0;
  for (std::size_t k = 1; k <= returns.size(); ++k) {
    const double dm = steps[k] - steps[k - 1];
    const double model = p.v * dt + p.sigma * sq * dm + p.gamma * sq * dm * student_t_density(sq * steps[k - 1], p.kappa);
    const double e = returns[k - 1] - model;
    sse += e * e;
  }
  return sse;
}

HigherMomentFit fit_higher_moment(std::span<const double> returns, const std::vector<int>& steps, double dt,
                                  bool enable_gamma) {
  check_higher_moment_inputs(returns, steps, dt);
  const std::size_t n = returns.size();
  Eigen::VectorXd y(static_cast<Eigen::Index>(n));
  for (std::size_t k = 0; k < n; ++k) y[static_cast<Eigen::Index>(k)] = returns[k];

  const auto profile = [&](double kappa) { return solve_linear(higher_moment_design(steps, n, dt, kappa, enable_gamma), y); };

  double kappa = kKappaMin;
  if (enable_gamma) {
    // Coarse scan, then Brent inside the bracket around the best grid point.
    constexpr int kGrid = 26;
    std::vector<double> grid(kGrid), sse(kGrid);
    for (int i = 0; i < kGrid; ++i) {
      grid[i] = kKappaMin + (kKappaMax - kKappaMin) * i / (kGrid - 1);
      sse[i] = profile(grid[i]).sse;
    }
    const auto best = static_cast<int>(std::min_element(sse.begin(), sse.end()) - sse.begin());
    const double lo = grid[std::max(0, best - 1)], hi = grid[std::min(kGrid - 1, best + 1)];
    const auto refined = opt::brent_minimize([&](double k) { return profile(k).sse; }, lo, hi, 52);
    kappa = refined.value <= sse[best] ? refined.x : grid[best];
  }

  const LinearSolve s = profile(kappa);
  HigherMomentFit out;
  out.gamma_enabled = enable_gamma;
  out.params.v = s.coef[0];
  out.params.sigma = s.coef[1];
  out.params.gamma = enable_gamma ? s.coef[2] : 0.0;
  out.params.kappa = kappa;
  out.objective = s.sse;
  out.rmse = std::sqrt(s.sse / static_cast<double>(n));
  if (enable_gamma && n > 3) {
    const Eigen::MatrixXd cov = (s.design.transpose() * s.design).inverse() * (s.sse / static_cast<double>(n - 3));
    out.gamma_se = std::sqrt(std::max(0.0, cov(2, 2)));
  }
  return out;
}

namespace {

DriverParams smoothed_params(const std::vector<double>& cum, const DriverPipelineConfig& cfg, const char* what) {
  ReturnSeries s;
  s.dt = cfg.dt;
  s.cum_log_returns = cum;
  s.validate();
  const std::size_t need = cfg.window + cfg.smoothing;
  if (s.size() < need)
    throw DataError(std::string("run_driver_pipeline: ") + what + " period has " + std::to_string(s.size()) +
                    " points, need at least " + std::to_string(need));
  const auto est = rolling_estimates(s, cfg.window, cfg.estimation);
  const auto sm = smooth_series(est, cfg.smoothing, cfg.dt);
  const WindowEstimate& last = sm.back();
  return DriverParams{last.mu_hat, last.sigma_hat, last.beta_hat, last.alpha_hat};
}

}  // namespace

DriverPipelineResult run_driver_pipeline(const std::vector<double>& closes, const FactorPanel& panel, std::size_t split,
                                         const DriverPipelineConfig& cfg) {
  if (closes.size() < 3) throw DataError("run_driver_pipeline: too few prices");
  if (panel.size() + 1 != closes.size()) throw DataError("run_driver_pipeline: factor panel must have one row per return");
  if (split < 1 || split + 1 >= closes.size()) throw InvalidArgument("run_driver_pipeline: split must leave both periods non-empty");
  for (double c : closes)
    if (!(c > 0.0)) throw DataError("run_driver_pipeline: non-positive close");

  std::vector<double> r(closes.size() - 1);
  for (std::size_t j = 1; j < closes.size(); ++j) r[j - 1] = std::log(closes[j] / closes[j - 1]);
  const std::span<const double> r1(r.data(), split), r2(r.data() + split, r.size() - split);
  const std::span<const double> target(closes.data() + split, closes.size() - split);
  const int n2 = static_cast<int>(target.size()) - 1;

  DriverPipelineResult out;
  std::vector<double> cum(split + 1, 0.0);
  for (std::size_t j = 1; j <= split; ++j) cum[j] = std::log(closes[j] / closes[0]);
  out.endogenous = smoothed_params(cum, cfg, "first");
  const NaturalParams endo{out.endogenous.mu, out.endogenous.sigma, out.endogenous.beta, cfg.dt, n2, target[0]};
  out.endogenous_prices = driver_prices(endo, endogenous_path(r2).steps);
  out.endogenous_rel_mse = rel_mse(out.endogenous_prices, target);

  out.factor_fit = ff5_fit(r1, panel.slice(0, split), cfg.estimation.robust);
  for (std::size_t j = 1; j <= split; ++j) cum[j] = cum[j - 1] + out.factor_fit.fitted[j - 1];
  out.exogenous = smoothed_params(cum, cfg, "factor");
  out.exogenous_fit = exogenous_fit(target, out.exogenous, cfg.dt, cfg.ensemble_size, cfg.seed);
  out.exogenous = out.exogenous_fit.params;
  const NaturalParams exo{out.exogenous.mu, out.exogenous.sigma, out.exogenous.beta, cfg.dt, n2, target[0]};
  out.exogenous_prices = driver_prices(exo, out.exogenous_fit.chosen_path.steps);

  out.higher_moment = fit_higher_moment(r2, out.exogenous_fit.chosen_path.steps, cfg.dt);
  return out;
}

}  // namespace gjr
