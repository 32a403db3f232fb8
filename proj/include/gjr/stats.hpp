#pragma once

#include <functional>
#include <span>
#include <vector>

namespace gjr::stats {

double normal_cdf(double x);
double normal_pdf(double x);

double mean(std::span<const double> x);
// Unbiased (n-1) sample variance.
double variance(std::span<const double> x);
double median(std::vector<double> x);
// Linear-interpolation quantile (type 7), p in [0,1].
double quantile(std::vector<double> x, double p);
// Median absolute deviation from the median, unscaled.
double mad(std::span<const double> x);

struct SampleMoments {
  double mean = 0.0;
  double variance = 0.0;
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
};

// Moment estimators: mean, unbiased variance, and the plain (biased)
// central-moment ratios m3/m2^1.5 and m4/m2^2 - 3.
SampleMoments sample_moments(std::span<const double> x);

struct Quartiles {
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
};
Quartiles quartiles(std::vector<double> x);

struct KsResult {
  double statistic = 0.0;
  double pvalue = 0.0;
};

// Asymptotic Kolmogorov survival function Q(lambda) = 2 sum (-1)^{j-1} e^{-2 j^2 lambda^2}.
double kolmogorov_q(double lambda);

KsResult ks_one_sample(std::vector<double> sample, const std::function<double(double)>& cdf);
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

}  // namespace gjr::stats
