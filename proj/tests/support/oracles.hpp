#pragma once

// Independent reference computations used by the unit and acceptance tests.

#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

namespace oracle {

// Delete-one jackknife standard error of a statistic over grouped blocks:
// the sample is split into `blocks` contiguous groups and each group is left out once.
inline double jackknife_se(const std::vector<double>& x, int blocks,
                           const std::function<double(const std::vector<double>&)>& stat) {
  const std::size_t n = x.size();
  const std::size_t bs = n / static_cast<std::size_t>(blocks);
  std::vector<double> thetas;
  std::vector<double> sub;
  sub.reserve(n);
  for (int b = 0; b < blocks; ++b) {
    sub.clear();
    for (std::size_t i = 0; i < n; ++i)
      if (i / bs != static_cast<std::size_t>(b)) sub.push_back(x[i]);
    thetas.push_back(stat(sub));
  }
  double m = 0.0;
  for (double t : thetas) m += t;
  m /= blocks;
  double s = 0.0;
  for (double t : thetas) s += (t - m) * (t - m);
  return std::sqrt((blocks - 1.0) / blocks * s);
}

inline double skewness(const std::vector<double>& x) {
  double m = 0.0;
  for (double v : x) m += v;
  m /= static_cast<double>(x.size());
  double m2 = 0.0, m3 = 0.0;
  for (double v : x) {
    m2 += (v - m) * (v - m);
    m3 += (v - m) * (v - m) * (v - m);
  }
  m2 /= static_cast<double>(x.size());
  m3 /= static_cast<double>(x.size());
  return m3 / std::pow(m2, 1.5);
}

inline double excess_kurtosis(const std::vector<double>& x) {
  double m = 0.0;
  for (double v : x) m += v;
  m /= static_cast<double>(x.size());
  double m2 = 0.0, m4 = 0.0;
  for (double v : x) {
    const double d2 = (v - m) * (v - m);
    m2 += d2;
    m4 += d2 * d2;
  }
  m2 /= static_cast<double>(x.size());
  m4 /= static_cast<double>(x.size());
  return m4 / (m2 * m2) - 3.0;
}

// GJR lattice node written out from the model definition.
inline double gjr_node(double s0, double mu, double sigma, double beta, double dt, int k, int m) {
  const double v = k == 0 ? 0.0 : k * mu + sigma * beta * (std::sqrt(2.0 * k / std::numbers::pi) - 1.0);
  return s0 * std::exp(v * dt + m * sigma * std::sqrt(dt));
}

// Sum over all 2^n up/down sequences of disc^n * prod(q or 1-q) * payoff(S_n).
inline double enumerate_gjr(double s0, double mu, double sigma, double beta, double dt, int n, double rf,
                            const std::vector<double>& q, const std::function<double(double)>& payoff) {
  const double disc = std::exp(-rf * dt * n);
  double total = 0.0;
  for (unsigned long mask = 0; mask < (1UL << n); ++mask) {
    double w = 1.0;
    int m = 0;
    for (int k = 0; k < n; ++k) {
      if (mask & (1UL << k)) {
        w *= q[static_cast<std::size_t>(k)];
        ++m;
      } else {
        w *= 1.0 - q[static_cast<std::size_t>(k)];
        --m;
      }
    }
    total += w * payoff(gjr_node(s0, mu, sigma, beta, dt, n, m));
  }
  return disc * total;
}

}  // namespace oracle
