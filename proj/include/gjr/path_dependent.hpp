#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gjr/risk_neutral.hpp"
#include "gjr/skew_process.hpp"

namespace gjr {

// State-dependent volatility eta_k = sigma + gamma h(sqrt(dt) M_{k-1}), eta_0 = sigma.
// h_id "student_t" takes its degrees of freedom from kappa; any other id is
// resolved through HFunction::from_id.
struct EtaModel {
  double sigma = 0.0;
  double gamma = 0.0;
  std::string h_id = "student_t";
  double kappa = 5.0;
  double dt = 1.0 / 252.0;

  void validate() const;
  HFunction h() const;
};

// Throws InfeasibleModel when eta <= 0.
double eta(const EtaModel& model, int m_prev, int k);

struct PathQ {
  QValue q;
  double eta = 0.0;
};

// One-step risk-neutral probability of an up move on step k -> k+1 given M_{k-1}.
PathQ q_path(const EtaModel& model, double v, double rf, int m_prev, int k, QMode mode = QMode::exact);

struct PathState {
  int k = 0;
  int m = 0;
  double log_price = 0.0;
  double q_next = 0.5;  // 0.5 placeholder at the terminal state
};

// Walks a realized sign path (steps M_0..M_n) through the path-dependent tree.
std::vector<PathState> trace_path(const EtaModel& model, double v, double rf, double s0,
                                  const std::vector<int>& steps, QMode mode = QMode::exact);

// reweighted: sign paths drawn from a fair coin and weighted by the likelihood
// ratio of the q measure. For a fixed seed the estimate is a smooth function
// of the model parameters, which root finding on prices needs.
enum class PathMethod { enumerate, monte_carlo, reweighted };

struct PathPricingOptions {
  PathMethod method = PathMethod::enumerate;
  QMode mode = QMode::exact;
  std::size_t mc_paths = 100000;
  std::uint64_t seed = 0;
};

struct PathPrice {
  double price = 0.0;
  double std_error = 0.0;  // 0 for enumeration
  std::size_t clamp_count = 0;
  std::size_t step_count = 0;  // q evaluations behind clamp_count
};

inline constexpr int kMaxEnumerateSteps = 24;

// Enumeration is exact over all 2^n paths (n <= 24); the sampling methods draw
// path i from stream i of the seed. Throws InfeasibleModel when more than 10% of the
// q evaluations were clamped.
PathPrice price_path_dependent(const EtaModel& model, double v, double rf, double s0, const EccSpec& spec, int n,
                               const PathPricingOptions& options = {});

}  // namespace gjr
