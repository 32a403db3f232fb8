#include "gjr/risk_neutral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "gjr/errors.hpp"

namespace gjr {

double HTCParams::lambda_dt(double dt) const { return lambda0 + lambda1 * std::sqrt(dt); }

void RiskNeutralContext::validate() const {
  natural.validate();
  if (!(natural.sigma > 0.0)) throw InvalidArgument("RiskNeutralContext: sigma must be positive");
  if (!(rf >= 0.0) || !std::isfinite(rf)) throw InvalidArgument("RiskNeutralContext: rf must be >= 0");
  if (htc) {
    if (!std::isfinite(htc->lambda0) || !std::isfinite(htc->lambda1))
      throw InvalidArgument("RiskNeutralContext: HTC parameters must be finite");
    if (!htc->disabled() && !(htc->lambda0 > 0.0))
      throw InvalidArgument("RiskNeutralContext: lambda0 must be positive when HTC is active");
    if (!(1.0 + htc->lambda_dt(natural.dt) > 0.0))
      throw InfeasibleModel("RiskNeutralContext: 1 + lambda_dt must be positive");
  }
}

double step_skew(const NaturalParams& p, int k) {
  const double s2pi = std::sqrt(2.0 / std::numbers::pi);
  if (k == 0) return p.beta * (s2pi - 1.0);
  return p.beta * (std::sqrt(k + 1.0) - std::sqrt(static_cast<double>(k))) * s2pi;
}

QValue q_prob(const RiskNeutralContext& ctx, int k) {
  const auto& p = ctx.natural;
  if (k < 0 || k >= p.n) throw InvalidArgument("q_prob: k must be in [0, n-1]");
  const double sdt = std::sqrt(p.dt);
  const double s = p.sigma * sdt;
  const double b = step_skew(p, k);
  double q = 0.0;
  if (!ctx.htc) {
    if (ctx.mode == QMode::exact) {
      q = (std::exp((ctx.rf - p.mu) * p.dt - p.sigma * b * p.dt) - std::exp(-s)) / (std::exp(s) - std::exp(-s));
    } else {
      const double theta = (p.mu - ctx.rf + 0.5 * p.sigma * p.sigma) / p.sigma;
      q = 0.5 * (1.0 - theta * sdt - b * sdt);
    }
  } else {
    const double l0 = ctx.htc->lambda0, l1 = ctx.htc->lambda1;
    if (ctx.mode == QMode::exact) {
      const double lam = ctx.htc->lambda_dt(p.dt);
      // (e^{rf dt} + lam)/(1 + lam) e^{-mu dt - ...}, arranged so lam = 0 is bitwise the plain formula.
      const double cost = (1.0 + lam * std::exp(-ctx.rf * p.dt)) / (1.0 + lam);
      q = (std::exp((ctx.rf - p.mu) * p.dt - p.sigma * b * p.dt) * cost - std::exp(-s)) / (std::exp(s) - std::exp(-s));
    } else {
      const double theta = (p.mu - ctx.rf / (1.0 + l0) + 0.5 * p.sigma * p.sigma) / p.sigma;
      q = 0.5 * (1.0 - theta * sdt - b * sdt) - l1 * ctx.rf * p.dt / (2.0 * p.sigma * (1.0 + l0) * (1.0 + l0));
    }
  }
  QValue out;
  out.raw = q;
  out.q = std::clamp(q, kQFloor, 1.0 - kQFloor);
  out.clamped = !(q >= kQFloor && q <= 1.0 - kQFloor);
  if (std::isnan(q)) throw InfeasibleModel("q_prob: risk-neutral probability is NaN");
  return out;
}

QSchedule q_schedule(const RiskNeutralContext& ctx) {
  ctx.validate();
  QSchedule s;
  s.q.resize(static_cast<std::size_t>(ctx.natural.n));
  for (int k = 0; k < ctx.natural.n; ++k) {
    const QValue v = q_prob(ctx, k);
    s.q[static_cast<std::size_t>(k)] = v.q;
    if (v.clamped) ++s.clamp_count;
  }
  if (s.clamp_count > kMaxClampFraction * ctx.natural.n)
    throw InfeasibleModel("q_schedule: " + std::to_string(s.clamp_count) + " of " + std::to_string(ctx.natural.n) +
                          " steps needed q clamping");
  return s;
}

EccSpec EccSpec::call(double strike, double expiry) {
  return {[strike](double s) { return std::max(s - strike, 0.0); }, expiry, EccKind::call, strike};
}

EccSpec EccSpec::put(double strike, double expiry) {
  return {[strike](double s) { return std::max(strike - s, 0.0); }, expiry, EccKind::put, strike};
}

EccSpec EccSpec::custom(std::function<double(double)> payoff, double expiry) {
  return {std::move(payoff), expiry, EccKind::custom, 0.0};
}

EccSpec EccSpec::vanilla(OptionKind kind, double strike, double expiry) {
  return kind == OptionKind::call ? call(strike, expiry) : put(strike, expiry);
}

namespace {

void check_expiry(const RiskNeutralContext& ctx, const EccSpec& spec) {
  const double t = ctx.natural.horizon();
  if (!(std::abs(spec.expiry - t) <= 1e-9 * std::max(1.0, t)))
    throw InvalidArgument("price_ecc: expiry must equal n*dt");
  if (!spec.payoff) throw InvalidArgument("price_ecc: missing payoff");
}

}  // namespace

double rollback_price(const GjrTree& tree, const QSchedule& schedule, double rf,
                      const std::function<double(double)>& payoff) {
  const int n = tree.steps();
  const double disc = std::exp(-rf * tree.params().dt);
  std::vector<double> f(static_cast<std::size_t>(n) + 1);
  for (int j = 0; j <= n; ++j) f[static_cast<std::size_t>(j)] = payoff(tree.price_at(n, j));
  for (int k = n - 1; k >= 0; --k) {
    const double q = schedule.q[static_cast<std::size_t>(k)];
    for (int j = 0; j <= k; ++j)
      f[static_cast<std::size_t>(j)] = disc * (q * f[static_cast<std::size_t>(j) + 1] + (1.0 - q) * f[static_cast<std::size_t>(j)]);
  }
  return f[0];
}

PricingResult price_ecc(const RiskNeutralContext& ctx, const EccSpec& spec, bool with_deltas) {
  check_expiry(ctx, spec);
  PricingResult out;
  out.schedule = q_schedule(ctx);
  const GjrTree tree(ctx.natural);
  if (!with_deltas) {
    out.price = rollback_price(tree, out.schedule, ctx.rf, spec.payoff);
    return out;
  }
  const int n = ctx.natural.n;
  const double disc = std::exp(-ctx.rf * ctx.natural.dt);
  const double scale = 1.0 + ctx.lambda_dt();
  std::vector<double> f(static_cast<std::size_t>(n) + 1);
  for (int j = 0; j <= n; ++j) f[static_cast<std::size_t>(j)] = spec.payoff(tree.price_at(n, j));
  out.deltas.resize(static_cast<std::size_t>(n));
  for (int k = n - 1; k >= 0; --k) {
    const double q = out.schedule.q[static_cast<std::size_t>(k)];
    auto& d = out.deltas[static_cast<std::size_t>(k)];
    d.resize(static_cast<std::size_t>(k) + 1);
    for (int j = 0; j <= k; ++j) {
      const auto jj = static_cast<std::size_t>(j);
      const double su = tree.price_at(k + 1, j + 1), sd = tree.price_at(k + 1, j);
      d[jj] = (f[jj + 1] - f[jj]) / (scale * (su - sd));
      f[jj] = disc * (q * f[jj + 1] + (1.0 - q) * f[jj]);
    }
  }
  out.price = f[0];
  return out;
}

double martingale_check(const RiskNeutralContext& ctx) {
  const QSchedule s = q_schedule(ctx);
  const auto& p = ctx.natural;
  const double l0 = ctx.htc ? ctx.htc->lambda0 : 0.0;
  const double target = (ctx.rf / (1.0 + l0) - 0.5 * p.sigma * p.sigma) * p.dt;
  const double step = p.sigma * std::sqrt(p.dt);
  double worst = 0.0;
  for (int k = 0; k < p.n; ++k) {
    const double g = (drift_v(p, k + 1) - drift_v(p, k)) * p.dt;
    const double q = s.q[static_cast<std::size_t>(k)];
    const double e = g + (2.0 * q - 1.0) * step;
    worst = std::max(worst, std::abs(e - target));
  }
  return worst;
}

}  // namespace gjr
