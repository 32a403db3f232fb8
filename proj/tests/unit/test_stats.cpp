#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "gjr/optimize.hpp"
#include "gjr/rng.hpp"
#include "gjr/robust_regression.hpp"
#include "gjr/stats.hpp"

using namespace gjr;

TEST(CounterRng, SameSeedAndStreamReproduce) {
  CounterRng a(42, 7), b(42, 7), c(42, 8);
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    EXPECT_EQ(x, b.next_u64());
    EXPECT_NE(x, c.next_u64());
  }
}

TEST(CounterRng, UniformMomentsAndRange) {
  CounterRng r(1);
  const int n = 200000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    s += u;
    s2 += u * u;
  }
  EXPECT_NEAR(s / n, 0.5, 3.0 * std::sqrt(1.0 / 12.0 / n));
  EXPECT_NEAR(s2 / n - (s / n) * (s / n), 1.0 / 12.0, 1e-3);
}

TEST(CounterRng, NormalMoments) {
  CounterRng r(3);
  std::vector<double> x(400000);
  for (auto& v : x) v = r.normal();
  const auto m = stats::sample_moments(x);
  EXPECT_NEAR(m.mean, 0.0, 3.0 / std::sqrt(x.size()));
  EXPECT_NEAR(m.variance, 1.0, 3.0 * std::sqrt(2.0 / x.size()));
  EXPECT_NEAR(m.skewness, 0.0, 3.0 * std::sqrt(6.0 / x.size()));
  EXPECT_NEAR(m.excess_kurtosis, 0.0, 3.0 * std::sqrt(24.0 / x.size()));
}

TEST(Stats, QuantileAndMad) {
  std::vector<double> x{5, 1, 3, 2, 4};
  EXPECT_DOUBLE_EQ(stats::median(x), 3.0);
  EXPECT_DOUBLE_EQ(stats::quantile(x, 0.25), 2.0);
  EXPECT_DOUBLE_EQ(stats::mad(x), 1.0);
  const auto q = stats::quartiles(x);
  EXPECT_DOUBLE_EQ(q.min, 1.0);
  EXPECT_DOUBLE_EQ(q.max, 5.0);
}

TEST(Stats, KolmogorovTail) {
  // Q(1.36) ~ 0.049 is the textbook 5% critical value.
  EXPECT_NEAR(stats::kolmogorov_q(1.358), 0.05, 1e-3);
  EXPECT_DOUBLE_EQ(stats::kolmogorov_q(0.0), 1.0);
  EXPECT_LT(stats::kolmogorov_q(3.0), 1e-6);
}

TEST(Stats, KsOneSampleAcceptsCorrectLaw) {
  CounterRng r(11);
  std::vector<double> x(20000);
  for (auto& v : x) v = r.normal();
  const auto ks = stats::ks_one_sample(x, stats::normal_cdf);
  EXPECT_GT(ks.pvalue, 0.01);
  const auto shifted = stats::ks_one_sample(x, [](double v) { return stats::normal_cdf(v - 0.1); });
  EXPECT_LT(shifted.pvalue, 1e-6);
}

TEST(Stats, KsTwoSampleIdenticalIsZero) {
  std::vector<double> a{1, 2, 3, 4};
  const auto ks = stats::ks_two_sample(a, a);
  EXPECT_DOUBLE_EQ(ks.statistic, 0.0);
}

TEST(Optimize, NelderMeadRosenbrock) {
  auto f = [](std::span<const double> x) {
    return 100.0 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1.0 - x[0], 2);
  };
  const std::vector<double> step{0.5, 0.5};
  opt::NelderMeadOptions o;
  o.max_iterations = 5000;
  o.ftol = 1e-16;
  const auto r = opt::nelder_mead(f, {-1.2, 1.0}, step, o);
  EXPECT_NEAR(r.x[0], 1.0, 1e-4);
  EXPECT_NEAR(r.x[1], 1.0, 1e-4);
  EXPECT_TRUE(r.converged);
}

TEST(Optimize, LatinHypercubeStrata) {
  const std::vector<double> lo{0.0, -1.0}, hi{1.0, 1.0};
  const auto pts = opt::latin_hypercube(8, lo, hi, 5);
  ASSERT_EQ(pts.size(), 8u);
  for (std::size_t j = 0; j < 2; ++j) {
    std::vector<int> seen(8, 0);
    for (const auto& p : pts) {
      const double u = (p[j] - lo[j]) / (hi[j] - lo[j]);
      seen[static_cast<std::size_t>(u * 8)]++;
    }
    for (int c : seen) EXPECT_EQ(c, 1);
  }
}

TEST(Optimize, BrentAndRoot) {
  const auto m = opt::brent_minimize([](double x) { return (x - 0.3) * (x - 0.3); }, -1.0, 2.0);
  EXPECT_NEAR(m.x, 0.3, 1e-8);
  const auto f = [](double x) { return x * x - 2.0; };
  const double r = opt::bracketed_root(f, 0.0, 2.0, f(0.0), f(2.0), 1e-14);
  EXPECT_NEAR(r, std::sqrt(2.0), 1e-12);
}

TEST(RobustRegression, ExactLinearModelRecovered) {
  Eigen::MatrixXd x(50, 2);
  Eigen::VectorXd y(50);
  for (int i = 0; i < 50; ++i) {
    x(i, 0) = 1.0;
    x(i, 1) = i * 0.1;
    y[i] = 2.0 - 0.5 * x(i, 1);
  }
  const auto fit = robust_fit(x, y);
  EXPECT_NEAR(fit.coef[0], 2.0, 1e-12);
  EXPECT_NEAR(fit.coef[1], -0.5, 1e-12);
}

TEST(RobustRegression, DownweightsOutliers) {
  CounterRng r(9);
  Eigen::VectorXd y(200);
  for (int i = 0; i < 200; ++i) y[i] = 1.0 + 0.1 * r.normal();
  for (int i = 0; i < 10; ++i) y[i] = 50.0;
  const auto fit = robust_location(y);
  EXPECT_NEAR(fit.coef[0], 1.0, 0.05);
  EXPECT_LT(fit.weights[0], 0.1);
  // Weighted normal equation of the final solve.
  EXPECT_NEAR(fit.weights.dot(fit.residuals) / fit.weights.sum(), 0.0, 1e-10);
}

TEST(RobustRegression, RankDeficientThrows) {
  Eigen::MatrixXd x = Eigen::MatrixXd::Ones(20, 2);
  Eigen::VectorXd y = Eigen::VectorXd::LinSpaced(20, 0, 1);
  EXPECT_THROW(robust_fit(x, y), std::runtime_error);
}
