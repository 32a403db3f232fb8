#pragma once

#include <span>
#include <vector>

#include "gjr/date.hpp"
#include "gjr/robust_regression.hpp"

namespace gjr {

struct ReturnSeries {
  std::vector<Date> dates;              // may be empty for synthetic data
  std::vector<double> cum_log_returns;  // R_0 = 0, R_1, ...
  double dt = 1.0 / 252.0;

  std::size_t size() const { return cum_log_returns.size(); }
  void validate() const;
  // Window of L steps starting at index `start`, rebased so its R_0 = 0.
  ReturnSeries window(std::size_t start, std::size_t length) const;
};

ReturnSeries returns_from_prices(const std::vector<double>& closes, double dt,
                                 std::vector<Date> dates = {});

// Minus the population location of Y = ln chi^2_1 under the logistic
// M-estimator with the given tuning and MAD scale, i.e. -m solving
// E[tanh((Y - m)/s)] = 0. About 0.9988 at the default tuning.
double log_chi_square_bias(double tuning);

struct EstimationConfig {
  RobustOptions robust;
  double zero_floor = 1e-12;  // |R_k| floor before taking logs
  // Adds log_chi_square_bias(robust.tuning) to the log-variance location; without it the
  // location of ln(R_k^2/(k dt)) estimates ln sigma^2 - 1.0 on noisy paths.
  bool log_square_correction = true;
};

struct Step1Result {
  double sigma_hat = 0.0;
  double location = 0.0;          // robust location of y_k = ln(R_k^2/(k dt))
  std::vector<double> residuals;  // e1_k = y_k - location, k = 1..L
};

struct Step2Result {
  double mu_hat = 0.0;
  double beta_hat = 0.0;
  bool clamped = false;
  std::vector<double> residuals;  // e2_k, k = 1..L
};

Step1Result step1_sigma(const ReturnSeries& window, const EstimationConfig& config = {});
Step2Result step2_mu_beta(const ReturnSeries& window, double sigma_hat);
double step3_pvalue(std::span<const double> e1, std::span<const double> e2);

// Largest |beta| the estimators hand out: (1 - 1e-12)/sqrt(dt).
double beta_bound(double dt);

struct WindowEstimate {
  Date window_end{};
  std::size_t end_index = 0;
  double sigma_hat = 0.0;
  double mu_hat = 0.0;
  double beta_hat = 0.0;
  double alpha_hat = 0.5;
  double pvalue = 1.0;
};

WindowEstimate estimate_window(const ReturnSeries& window, const EstimationConfig& config = {});

// Steps 1-3 on every window of `length` steps (start indices advance by `stride`).
std::vector<WindowEstimate> rolling_estimates(const ReturnSeries& series, std::size_t length,
                                              const EstimationConfig& config = {}, std::size_t stride = 1);

struct SweepEntry {
  std::size_t length = 0;
  std::vector<double> pvalues;
  double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0;
};

struct SweepResult {
  std::vector<SweepEntry> entries;
  std::size_t recommended = 252;
};

SweepResult window_sweep(const ReturnSeries& series, const std::vector<std::size_t>& lengths,
                         const EstimationConfig& config = {}, std::size_t stride = 1);

// Trailing moving average of sigma, mu, beta and pvalue; alpha recomputed from
// the averaged beta after clamping it into the open interval.
std::vector<WindowEstimate> smooth_series(const std::vector<WindowEstimate>& estimates, std::size_t window,
                                          double dt);

}  // namespace gjr
