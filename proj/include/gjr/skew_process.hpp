#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace gjr {

// Skew parameter alpha in [0,1]; the walk kernel additionally needs (0,1).
class SkewParam {
 public:
  explicit SkewParam(double alpha);
  double value() const { return alpha_; }
  // 2*alpha - 1
  double bias() const { return 2.0 * alpha_ - 1.0; }

 private:
  double alpha_;
};

struct SkewPath {
  double alpha = 0.5;
  std::vector<int> steps;  // M_0..M_n, M_0 = 0
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  int n() const { return static_cast<int>(steps.size()) - 1; }
};

struct SbmMoments {
  double mean = 0.0;
  double variance = 0.0;
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
  double t = 0.0;
};

std::vector<double> sbm_sample(SkewParam alpha, double t, int count, std::uint64_t seed);
SbmMoments sbm_moments(SkewParam alpha, double t);
double sbm_cdf(SkewParam alpha, double t, double x);
double sbm_pdf(SkewParam alpha, double t, double x);

// Increment (+1 or -1) of the skew walk from `state` given a uniform draw u.
int skew_walk_step(SkewParam alpha, int state, double u);

// Path i of an ensemble uses stream i of the seed, so ensembles nest.
SkewPath skew_walk_path(SkewParam alpha, int n, std::uint64_t seed, std::uint64_t stream = 0);

// Exact law of M_n: pmf[j] = P(M_n = j - n), j = 0..2n.
std::vector<double> skew_walk_distribution(SkewParam alpha, int n);

// Exact E[M_k]. |M| is a reflected simple walk whatever alpha is, so
// E[M_k] = (2 alpha - 1) * E[#visits to 0 before k] and E[M_k^2] = k.
double skew_walk_mean(SkewParam alpha, int k);

// Piecewise-continuous integrand h for the CSYIP companion process.
class HFunction {
 public:
  HFunction(std::string id, std::function<double(double)> fn) : id_(std::move(id)), fn_(std::move(fn)) {}
  double operator()(double x) const { return fn_(x); }
  const std::string& id() const { return id_; }

  // "constant:c", "identity", "indicator:a:b", "student_t:kappa" plus
  // anything added through register_family. Throws ConfigError if unknown.
  static HFunction from_id(const std::string& id);

  using Factory = std::function<HFunction(const std::vector<double>& params)>;
  static void register_family(const std::string& name, Factory factory);

 private:
  std::string id_;
  std::function<double(double)> fn_;
};

double student_t_density(double x, double kappa);

struct CsyipPair {
  std::vector<double> b_path;
  std::vector<double> c_path;
  std::vector<double> b_increments;  // dB_k, k = 1..n (index k-1)
  std::string h_id;
};

// B_k = sqrt(T/n) M_k and C_k = C_{k-1} + h(B_{k-1}) dB_k; both start at 0.
CsyipPair csyip_build(const SkewPath& path, const HFunction& h, double horizon = 1.0);
CsyipPair csyip_build(const SkewPath& path, const std::string& h_id, double horizon = 1.0);

std::vector<double> azzalini_sample(double delta, double t, int count, std::uint64_t seed);

}  // namespace gjr
