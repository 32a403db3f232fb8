#include "gjr/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/erf.hpp>

#include "gjr/errors.hpp"
#include "gjr/optimize.hpp"
#include "gjr/stats.hpp"

namespace gjr {

void ReturnSeries::validate() const {
  if (cum_log_returns.empty()) throw DataError("ReturnSeries: empty series");
  if (cum_log_returns.front() != 0.0) throw DataError("ReturnSeries: R_0 must be 0");
  if (!(dt > 0.0)) throw InvalidArgument("ReturnSeries: dt must be positive");
  for (double r : cum_log_returns)
    if (!std::isfinite(r)) throw DataError("ReturnSeries: non-finite value");
  if (!dates.empty()) {
    if (dates.size() != cum_log_returns.size()) throw DataError("ReturnSeries: dates/returns length mismatch");
    for (std::size_t i = 1; i < dates.size(); ++i)
      if (!(dates[i - 1] < dates[i])) throw DataError("ReturnSeries: dates must be strictly increasing");
  }
}

ReturnSeries ReturnSeries::window(std::size_t start, std::size_t length) const {
  if (start + length + 1 > cum_log_returns.size())
    throw InvalidArgument("ReturnSeries::window: window runs past the series");
  ReturnSeries w;
  w.dt = dt;
  w.cum_log_returns.resize(length + 1);
  const double base = cum_log_returns[start];
  for (std::size_t k = 0; k <= length; ++k) w.cum_log_returns[k] = cum_log_returns[start + k] - base;
  w.cum_log_returns[0] = 0.0;
  if (!dates.empty()) w.dates.assign(dates.begin() + static_cast<std::ptrdiff_t>(start),
                                     dates.begin() + static_cast<std::ptrdiff_t>(start + length + 1));
  return w;
}

ReturnSeries returns_from_prices(const std::vector<double>& closes, double dt, std::vector<Date> dates) {
  if (closes.empty()) throw DataError("returns_from_prices: empty price series");
  ReturnSeries s;
  s.dt = dt;
  s.dates = std::move(dates);
  s.cum_log_returns.resize(closes.size());
  for (std::size_t i = 0; i < closes.size(); ++i) {
    if (!(closes[i] > 0.0)) throw DataError("returns_from_prices: non-positive price");
    s.cum_log_returns[i] = std::log(closes[i] / closes[0]);
  }
  s.cum_log_returns[0] = 0.0;
  s.validate();
  return s;
}

double log_chi_square_bias(double tuning) {
  if (!(tuning > 0.0)) throw InvalidArgument("log_chi_square_bias: tuning must be positive");
  static std::mutex mu;
  static std::map<double, double> cache;
  std::lock_guard lock(mu);
  if (auto it = cache.find(tuning); it != cache.end()) return it->second;

  // Y = ln X, X ~ chi^2_1: F(y) = erf(sqrt(e^y / 2)), f(y) = exp(y/2 - e^y/2) / sqrt(2 pi).
  const auto cdf = [](double y) { return std::erf(std::sqrt(0.5 * std::exp(y))); };
  const auto pdf = [](double y) { return std::exp(0.5 * y - 0.5 * std::exp(y)) / std::sqrt(2.0 * std::numbers::pi); };
  const double med = std::log(2.0 * std::pow(boost::math::erf_inv(0.5), 2));
  const auto mad_eq = [&](double d) { return cdf(med + d) - cdf(med - d) - 0.5; };
  const double mad = opt::bracketed_root(mad_eq, 1e-6, 20.0, mad_eq(1e-6), mad_eq(20.0), 1e-15);
  const double s = tuning * mad / 0.6745;
  const auto score = [&](double m) {
    const auto g = [&](double y) { return std::tanh((y - m) / s) * pdf(y); };
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(g, -60.0, med, 15, 1e-14) +
           boost::math::quadrature::gauss_kronrod<double, 61>::integrate(g, med, 6.0, 15, 1e-14);
  };
  const double bias = -opt::bracketed_root(score, -3.0, 1.0, score(-3.0), score(1.0), 1e-15);
  cache.emplace(tuning, bias);
  return bias;
}

double beta_bound(double dt) { return (1.0 - 1e-12) / std::sqrt(dt); }

Step1Result step1_sigma(const ReturnSeries& window, const EstimationConfig& config) {
  const std::size_t len = window.size() - 1;
  if (window.size() < 31) throw InvalidArgument("step1_sigma: window length L must be >= 30");
  bool all_zero = true;
  for (std::size_t k = 1; k <= len; ++k) all_zero = all_zero && window.cum_log_returns[k] == 0.0;
  if (all_zero) throw DataError("step1_sigma: degenerate window (all returns zero)");

  Eigen::VectorXd y(static_cast<Eigen::Index>(len));
  for (std::size_t k = 1; k <= len; ++k) {
    const double r = std::max(std::abs(window.cum_log_returns[k]), config.zero_floor);
    y[static_cast<Eigen::Index>(k - 1)] = std::log(r * r / (static_cast<double>(k) * window.dt));
  }
  const RobustFit fit = robust_location(y, config.robust);
  Step1Result out;
  out.location = fit.coef[0];
  const double shift = config.log_square_correction ? log_chi_square_bias(config.robust.tuning) : 0.0;
  out.sigma_hat = std::exp(0.5 * (out.location + shift));
  out.residuals.resize(len);
  for (std::size_t i = 0; i < len; ++i) out.residuals[i] = y[static_cast<Eigen::Index>(i)] - out.location;
  return out;
}

Step2Result step2_mu_beta(const ReturnSeries& window, double sigma_hat) {
  if (!(sigma_hat > 0.0)) throw InvalidArgument("step2_mu_beta: sigma_hat must be positive");
  if (window.size() < 3) throw InvalidArgument("step2_mu_beta: singular design (L < 2)");
  const std::size_t len = window.size() - 1;
  const double dt = window.dt;
  Eigen::MatrixXd x(static_cast<Eigen::Index>(len), 2);
  Eigen::VectorXd r(static_cast<Eigen::Index>(len));
  for (std::size_t k = 1; k <= len; ++k) {
    const auto i = static_cast<Eigen::Index>(k - 1);
    x(i, 0) = static_cast<double>(k) * dt;
    x(i, 1) = sigma_hat * std::sqrt(2.0 * static_cast<double>(k) / std::numbers::pi) * dt;
    r[i] = window.cum_log_returns[k];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  if (qr.rank() < 2) throw InvalidArgument("step2_mu_beta: singular design");
  const Eigen::Vector2d coef = qr.solve(r);
  Step2Result out;
  out.mu_hat = coef[0];
  out.beta_hat = coef[1];
  const double bmax = beta_bound(dt);
  if (std::abs(out.beta_hat) > bmax) {
    out.clamped = true;
    out.beta_hat = std::copysign(bmax, out.beta_hat);
    const Eigen::VectorXd rest = r - out.beta_hat * x.col(1);
    out.mu_hat = x.col(0).dot(rest) / x.col(0).squaredNorm();
  }
  const Eigen::VectorXd e = r - out.mu_hat * x.col(0) - out.beta_hat * x.col(1);
  out.residuals.assign(e.data(), e.data() + e.size());
  return out;
}

double step3_pvalue(std::span<const double> e1, std::span<const double> e2) {
  if (e1.size() != e2.size()) throw InvalidArgument("step3_pvalue: residual length mismatch");
  if (e1.size() < 2) throw InvalidArgument("step3_pvalue: need at least two residuals");
  std::vector<double> e(e1.size());
  for (std::size_t i = 0; i < e.size(); ++i) {
    const double den = std::hypot(e1[i], e2[i]);
    e[i] = den > 0.0 ? (e1[i] + e2[i]) / den : 0.0;
  }
  const double m = stats::mean(e);
  const double sd = std::sqrt(stats::variance(e));
  if (sd == 0.0) return m == 0.0 ? 1.0 : 0.0;
  const double z = m / (sd / std::sqrt(static_cast<double>(e.size())));
  return std::erfc(std::abs(z) / std::numbers::sqrt2);
}

WindowEstimate estimate_window(const ReturnSeries& window, const EstimationConfig& config) {
  const auto s1 = step1_sigma(window, config);
  const auto s2 = step2_mu_beta(window, s1.sigma_hat);
  WindowEstimate w;
  w.sigma_hat = s1.sigma_hat;
  w.mu_hat = s2.mu_hat;
  w.beta_hat = s2.beta_hat;
  w.alpha_hat = std::clamp(0.5 * (1.0 + s2.beta_hat * std::sqrt(window.dt)), 0.0, 1.0);
  w.pvalue = step3_pvalue(s1.residuals, s2.residuals);
  w.end_index = window.size() - 1;
  if (!window.dates.empty()) w.window_end = window.dates.back();
  return w;
}

std::vector<WindowEstimate> rolling_estimates(const ReturnSeries& series, std::size_t length,
                                              const EstimationConfig& config, std::size_t stride) {
  series.validate();
  if (stride < 1) throw InvalidArgument("rolling_estimates: stride must be >= 1");
  if (length + 1 > series.size()) throw InvalidArgument("rolling_estimates: window longer than series");
  std::vector<WindowEstimate> out;
  for (std::size_t start = 0; start + length < series.size(); start += stride) {
    auto w = estimate_window(series.window(start, length), config);
    w.end_index = start + length;
    out.push_back(w);
  }
  return out;
}

SweepResult window_sweep(const ReturnSeries& series, const std::vector<std::size_t>& lengths,
                         const EstimationConfig& config, std::size_t stride) {
  if (lengths.empty()) throw InvalidArgument("window_sweep: empty set of window lengths");
  std::vector<std::size_t> sorted = lengths;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  if (sorted.back() + 1 > series.size()) throw InvalidArgument("window_sweep: longest window exceeds the series");
  SweepResult res;
  bool found = false;
  for (std::size_t len : sorted) {
    SweepEntry e;
    e.length = len;
    for (const auto& w : rolling_estimates(series, len, config, stride)) e.pvalues.push_back(w.pvalue);
    const auto q = stats::quartiles(e.pvalues);
    e.min = q.min;
    e.q1 = q.q1;
    e.median = q.median;
    e.q3 = q.q3;
    e.max = q.max;
    if (!found && e.median < 0.05) {
      res.recommended = len;
      found = true;
    }
    res.entries.push_back(std::move(e));
  }
  return res;
}

std::vector<WindowEstimate> smooth_series(const std::vector<WindowEstimate>& estimates, std::size_t window,
                                          double dt) {
  if (window < 1) throw InvalidArgument("smooth_series: window must be >= 1");
  if (window > estimates.size()) throw InvalidArgument("smooth_series: window longer than the series");
  const double bmax = beta_bound(dt);
  std::vector<WindowEstimate> out;
  out.reserve(estimates.size() - window + 1);
  for (std::size_t end = window - 1; end < estimates.size(); ++end) {
    if (window == 1) {
      out.push_back(estimates[end]);
      continue;
    }
    WindowEstimate a = estimates[end];
    double s = 0.0, m = 0.0, b = 0.0, p = 0.0;
    for (std::size_t i = end + 1 - window; i <= end; ++i) {
      s += estimates[i].sigma_hat;
      m += estimates[i].mu_hat;
      b += estimates[i].beta_hat;
      p += estimates[i].pvalue;
    }
    const double n = static_cast<double>(window);
    a.sigma_hat = s / n;
    a.mu_hat = m / n;
    a.beta_hat = std::clamp(b / n, -bmax, bmax);
    a.pvalue = p / n;
    a.alpha_hat = 0.5 * (1.0 + a.beta_hat * std::sqrt(dt));
    out.push_back(a);
  }
  return out;
}

}  // namespace gjr
