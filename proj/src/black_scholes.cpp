#include "gjr/black_scholes.hpp"

#include <algorithm>
#include <cmath>

#include "gjr/errors.hpp"
#include "gjr/stats.hpp"

namespace gjr {

double bs_price(double s0, double strike, double t, double rf, double sigma, OptionKind kind) {
  if (!(s0 > 0.0) || !(strike > 0.0) || !(t > 0.0)) throw InvalidArgument("bs_price: s0, K, T must be positive");
  if (!(sigma >= 0.0)) throw InvalidArgument("bs_price: sigma must be >= 0");
  const double df = std::exp(-rf * t);
  const double fwd_k = strike * df;
  if (sigma * std::sqrt(t) < 1e-300) {
    return kind == OptionKind::call ? std::max(s0 - fwd_k, 0.0) : std::max(fwd_k - s0, 0.0);
  }
  const double sv = sigma * std::sqrt(t);
  const double d1 = (std::log(s0 / strike) + (rf + 0.5 * sigma * sigma) * t) / sv;
  const double d2 = d1 - sv;
  if (kind == OptionKind::call) return s0 * stats::normal_cdf(d1) - fwd_k * stats::normal_cdf(d2);
  return fwd_k * stats::normal_cdf(-d2) - s0 * stats::normal_cdf(-d1);
}

double bs_implied_vol(double price, double s0, double strike, double t, double rf, OptionKind kind) {
  if (!(s0 > 0.0) || !(strike > 0.0) || !(t > 0.0)) throw InvalidArgument("bs_implied_vol: s0, K, T must be positive");
  const double fwd_k = strike * std::exp(-rf * t);
  const double lower = kind == OptionKind::call ? std::max(s0 - fwd_k, 0.0) : std::max(fwd_k - s0, 0.0);
  const double upper = kind == OptionKind::call ? s0 : fwd_k;
  if (!(price >= lower && price <= upper)) throw NoSolution("bs_implied_vol: price outside no-arbitrage bounds");

  double lo = 1e-6, hi = 5.0;
  const double plo = bs_price(s0, strike, t, rf, lo, kind);
  const double phi = bs_price(s0, strike, t, rf, hi, kind);
  if (price < plo - 1e-10 || price > phi + 1e-10) throw NoSolution("bs_implied_vol: no volatility in [1e-6, 5] matches");
  if (std::abs(price - plo) <= 1e-10) return lo;
  if (std::abs(price - phi) <= 1e-10) return hi;

  double sigma = std::clamp(std::sqrt(2.0 * std::abs(std::log(s0 / strike) + rf * t) / t), 0.05, 1.0);
  for (int it = 0; it < 200; ++it) {
    const double p = bs_price(s0, strike, t, rf, sigma, kind);
    const double err = p - price;
    if (std::abs(err) < 1e-12 * std::max(1.0, price)) return sigma;
    if (err > 0.0) hi = sigma; else lo = sigma;
    const double sv = sigma * std::sqrt(t);
    const double d1 = (std::log(s0 / strike) + (rf + 0.5 * sigma * sigma) * t) / sv;
    const double vega = s0 * stats::normal_pdf(d1) * std::sqrt(t);
    double next = vega > 1e-300 ? sigma - err / vega : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (hi - lo < 1e-15) return next;
    sigma = next;
  }
  return sigma;
}

}  // namespace gjr
