#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gjr/date.hpp"
#include "gjr/estimation.hpp"
#include "gjr/gjr_tree.hpp"
#include "gjr/robust_regression.hpp"
#include "gjr/skew_process.hpp"

namespace gjr {

// Daily factor returns in decimal units, one row per date.
struct FactorPanel {
  std::vector<Date> dates;
  std::vector<double> mkt_rf, smb, hml, rmw, cma, rf;

  std::size_t size() const { return rf.size(); }
  void validate() const;
  FactorPanel slice(std::size_t begin, std::size_t end) const;
};

struct FactorFit {
  double a = 0.0, b = 0.0, s = 0.0, h = 0.0, r = 0.0, c = 0.0;
  double r_square = 0.0;
  double rmse = 0.0;
  std::vector<double> fitted;     // rf + a + b (M - rf) + ...
  std::vector<double> residuals;  // stock return minus fitted
  std::vector<double> weights;    // robust weights of the final solve
};

// Robust regression of r^S - rf on an intercept and the five factors.
FactorFit ff5_fit(std::span<const double> stock_returns, const FactorPanel& panel, const RobustOptions& options = {});

// M_k = sum_{j<=k} sign(r_j) with sign(0) = +1.
SkewPath endogenous_path(std::span<const double> returns);

// S_k = s0 exp(v_k dt + M_k sigma sqrt(dt)) for k = 0..path.n().
std::vector<double> driver_prices(const NaturalParams& params, const std::vector<int>& steps);

// Mean over k = 1..n of ((model_k - target_k) / target_k)^2.
double rel_mse(std::span<const double> model, std::span<const double> target);

struct DriverParams {
  double mu = 0.0;
  double sigma = 0.0;
  double beta = 0.0;
  double alpha = 0.5;
};

struct DriverFitResult {
  DriverParams params;
  SkewPath chosen_path;
  std::size_t path_index = 0;
  double rel_mse = 0.0;
  std::size_t ensemble_size = 0;
  std::uint64_t seed = 0;
};

// Draws ensemble_size skew-walk paths (path i on stream i of seed) at alpha =
// (1 + beta sqrt(dt))/2 and keeps the one whose driver prices best match the
// target S_0..S_n. Ties go to the lower index, so larger ensembles never do worse.
DriverFitResult exogenous_fit(std::span<const double> target_prices, const DriverParams& params, double dt,
                              std::size_t ensemble_size, std::uint64_t seed);

struct HigherMomentParams {
  double v = 0.0;
  double sigma = 0.0;
  double gamma = 0.0;
  double kappa = 5.0;
};

struct HigherMomentFit {
  HigherMomentParams params;
  double rmse = 0.0;
  double objective = 0.0;  // sum of squared return errors
  double gamma_se = 0.0;   // least-squares standard error of gamma at the chosen kappa
  bool gamma_enabled = true;
};

inline constexpr double kKappaMin = 5.0;
inline constexpr double kKappaMax = 30.0;

// Model increment r_k = v dt + sigma sqrt(dt) dM_k + gamma sqrt(dt) dM_k h(sqrt(dt) M_{k-1}),
// h the Student-t density with kappa degrees of freedom.
double higher_moment_sse(std::span<const double> returns, const std::vector<int>& steps, double dt,
                         const HigherMomentParams& params);

// Least squares over (v, sigma, gamma) for each kappa, then a bounded scalar
// search over kappa in [5, 30]. With gamma disabled the fit is ordinary least
// squares on (v, sigma) and kappa is reported as kKappaMin.
HigherMomentFit fit_higher_moment(std::span<const double> returns, const std::vector<int>& steps, double dt,
                                  bool enable_gamma = true);

struct DriverPipelineConfig {
  std::size_t window = 252;         // estimation window L
  std::size_t smoothing = 252;      // moving-average length for the smoothed parameters
  std::size_t ensemble_size = 100000;
  std::uint64_t seed = 0;
  double dt = 1.0 / 252.0;
  EstimationConfig estimation;
};

struct DriverPipelineResult {
  DriverParams endogenous;
  std::vector<double> endogenous_prices;
  double endogenous_rel_mse = 0.0;
  FactorFit factor_fit;
  DriverParams exogenous;
  DriverFitResult exogenous_fit;
  std::vector<double> exogenous_prices;
  HigherMomentFit higher_moment;
};

// Splits closes at index `split` (the last day of the first period supplies S_0
// of the second). Smoothed estimates of the first period parameterize the
// endogenous model (own returns) and the exogenous model (cumulative factor
// returns); both are scored on the second period, whose returns then feed the
// higher-moment fit along the exogenous path. panel rows align with closes[1..].
DriverPipelineResult run_driver_pipeline(const std::vector<double>& closes, const FactorPanel& panel,
                                         std::size_t split, const DriverPipelineConfig& config = {});

}  // namespace gjr
