#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "gjr/black_scholes.hpp"
#include "gjr/gjr_tree.hpp"

namespace gjr {

struct HTCParams {
  double lambda0 = 0.0;
  double lambda1 = 0.0;
  bool disabled() const { return lambda0 == 0.0 && lambda1 == 0.0; }
  // lambda_dt = lambda0 + lambda1 sqrt(dt)
  double lambda_dt(double dt) const;
};

enum class QMode { exact, leading_order };

inline constexpr double kQFloor = 1e-12;
inline constexpr double kMaxClampFraction = 0.10;

struct RiskNeutralContext {
  NaturalParams natural;
  double rf = 0.0;
  std::optional<HTCParams> htc;  // present: HTC formulas are used, even at (0,0)
  QMode mode = QMode::exact;

  void validate() const;
  double lambda_dt() const { return htc ? htc->lambda_dt(natural.dt) : 0.0; }
};

struct QValue {
  double q = 0.5;    // clamped value
  double raw = 0.5;  // before clamping
  bool clamped = false;
};

// Drift skew of step k -> k+1 in units of sigma per unit time:
// beta (sqrt(k+1) - sqrt(k)) sqrt(2/pi) for k >= 1. At k = 0 the root node is s0
// (v_0 = 0), so the first step carries beta (sqrt(2/pi) - 1).
double step_skew(const NaturalParams& p, int k);

QValue q_prob(const RiskNeutralContext& ctx, int k);

struct QSchedule {
  std::vector<double> q;  // q for steps k = 0..n-1
  int clamp_count = 0;
};

// Throws InfeasibleModel when more than 10% of the steps needed clamping.
QSchedule q_schedule(const RiskNeutralContext& ctx);

enum class EccKind { call, put, custom };

struct EccSpec {
  std::function<double(double)> payoff;
  double expiry = 0.0;
  EccKind kind = EccKind::custom;
  double strike = 0.0;

  static EccSpec call(double strike, double expiry);
  static EccSpec put(double strike, double expiry);
  static EccSpec custom(std::function<double(double)> payoff, double expiry);
  static EccSpec vanilla(OptionKind kind, double strike, double expiry);
};

struct PricingResult {
  double price = 0.0;
  // deltas[k][j]: replicating stock position at node (k, j), k = 0..n-1.
  std::vector<std::vector<double>> deltas;
  QSchedule schedule;
};

PricingResult price_ecc(const RiskNeutralContext& ctx, const EccSpec& spec, bool with_deltas = true);

// Rollback on a prebuilt tree and schedule (shared across strikes).
double rollback_price(const GjrTree& tree, const QSchedule& schedule, double rf,
                      const std::function<double(double)>& payoff);

double martingale_check(const RiskNeutralContext& ctx);

}  // namespace gjr
