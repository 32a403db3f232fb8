#include "gjr/path_dependent.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gjr/errors.hpp"
#include "gjr/rng.hpp"

namespace gjr {

void EtaModel::validate() const {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw InvalidArgument("EtaModel: sigma must be positive");
  if (!std::isfinite(gamma)) throw InvalidArgument("EtaModel: gamma must be finite");
  if (!(dt > 0.0)) throw InvalidArgument("EtaModel: dt must be positive");
  if (h_id == "student_t" && !(kappa > 0.0)) throw InvalidArgument("EtaModel: kappa must be positive");
}

HFunction EtaModel::h() const {
  if (h_id == "student_t") {
    const double k = kappa;
    return HFunction("student_t:" + std::to_string(k), [k](double x) { return student_t_density(x, k); });
  }
  return HFunction::from_id(h_id);
}

namespace {

// Hot-loop form of eta with h already resolved.
struct EtaEval {
  const EtaModel& model;
  HFunction h;
  double sqdt;

  explicit EtaEval(const EtaModel& m) : model(m), h(m.h()), sqdt(std::sqrt(m.dt)) { m.validate(); }

  double operator()(int m_prev, int k) const {
    const double e = k == 0 ? model.sigma : model.sigma + model.gamma * h(sqdt * m_prev);
    if (!(e > 0.0)) throw InfeasibleModel("eta: non-positive local volatility " + std::to_string(e) + " at step " + std::to_string(k));
    return e;
  }
};

QValue q_from_eta(double e, double v, double rf, double dt, QMode mode) {
  const double s = e * std::sqrt(dt);
  QValue out;
  out.raw = mode == QMode::exact ? (std::exp((rf - v) * dt) - std::exp(-s)) / (std::exp(s) - std::exp(-s))
                                 : 0.5 + (rf - v - 0.5 * e * e) * std::sqrt(dt) / (2.0 * e);
  out.q = std::clamp(out.raw, kQFloor, 1.0 - kQFloor);
  out.clamped = !(out.raw >= kQFloor && out.raw <= 1.0 - kQFloor);
  return out;
}

void check_clamps(const PathPrice& p) {
  if (static_cast<double>(p.clamp_count) > kMaxClampFraction * static_cast<double>(p.step_count))
    throw InfeasibleModel("price_path_dependent: " + std::to_string(p.clamp_count) + " of " + std::to_string(p.step_count) +
                          " q evaluations needed clamping");
}

struct Enumerator {
  const EtaEval& eta;
  double v, rf, dt, sqdt;
  QMode mode;
  int n;
  const std::function<double(double)>& payoff;
  PathPrice* out;

  // Returns the undiscounted expected payoff from (k, m, m_prev, log price).
  double go(int k, int m, int m_prev, double logp) {
    if (k == n) return payoff(std::exp(logp));
    const double e = eta(m_prev, k);
    const QValue q = q_from_eta(e, v, rf, dt, mode);
    ++out->step_count;
    if (q.clamped) ++out->clamp_count;
    const double up = go(k + 1, m + 1, m, logp + v * dt + e * sqdt);
    const double dn = go(k + 1, m - 1, m, logp + v * dt - e * sqdt);
    return q.q * up + (1.0 - q.q) * dn;
  }
};

}  // namespace

double eta(const EtaModel& model, int m_prev, int k) {
  if (k < 0) throw InvalidArgument("eta: negative step");
  return EtaEval(model)(m_prev, k);
}

PathQ q_path(const EtaModel& model, double v, double rf, int m_prev, int k, QMode mode) {
  PathQ out;
  out.eta = eta(model, m_prev, k);
  out.q = q_from_eta(out.eta, v, rf, model.dt, mode);
  return out;
}

std::vector<PathState> trace_path(const EtaModel& model, double v, double rf, double s0,
                                  const std::vector<int>& steps, QMode mode) {
  if (!(s0 > 0.0)) throw InvalidArgument("trace_path: s0 must be positive");
  if (steps.empty() || steps[0] != 0) throw InvalidArgument("trace_path: path must start at M_0 = 0");
  const EtaEval ev(model);
  const double sqdt = std::sqrt(model.dt);
  std::vector<PathState> out(steps.size());
  double logp = std::log(s0);
  for (std::size_t k = 0; k < steps.size(); ++k) {
    const int ki = static_cast<int>(k);
    out[k].k = ki;
    out[k].m = steps[k];
    out[k].log_price = logp;
    if (k + 1 == steps.size()) break;
    const int d = steps[k + 1] - steps[k];
    if (d != 1 && d != -1) throw InvalidArgument("trace_path: walk increments must be +-1");
    const int m_prev = k == 0 ? 0 : steps[k - 1];
    const double e = ev(m_prev, ki);
    out[k].q_next = q_from_eta(e, v, rf, model.dt, mode).q;
    logp += v * model.dt + d * e * sqdt;
  }
  return out;
}

PathPrice price_path_dependent(const EtaModel& model, double v, double rf, double s0, const EccSpec& spec, int n,
                               const PathPricingOptions& options) {
  if (!(s0 > 0.0)) throw InvalidArgument("price_path_dependent: s0 must be positive");
  if (n < 1) throw InvalidArgument("price_path_dependent: n must be >= 1");
  if (!spec.payoff) throw InvalidArgument("price_path_dependent: payoff missing");
  const double horizon = n * model.dt;
  if (std::abs(spec.expiry - horizon) > 1e-9 * std::max(1.0, horizon))
    throw InvalidArgument("price_path_dependent: expiry does not match n dt");
  const EtaEval ev(model);
  const double dt = model.dt, sqdt = std::sqrt(dt);
  const double disc = std::exp(-rf * horizon);
  PathPrice out;

  if (options.method == PathMethod::enumerate) {
    if (n > kMaxEnumerateSteps) throw InvalidArgument("price_path_dependent: enumeration needs n <= 24");
    Enumerator en{ev, v, rf, dt, sqdt, options.mode, n, spec.payoff, &out};
    out.price = disc * en.go(0, 0, 0, std::log(s0));
    check_clamps(out);
    return out;
  }

  if (options.mc_paths < 1000) throw InvalidArgument("price_path_dependent: monte_carlo needs at least 1000 paths");
  const bool reweight = options.method == PathMethod::reweighted;
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t i = 0; i < options.mc_paths; ++i) {
    CounterRng rng(options.seed, i);
    int m = 0, m_prev = 0;
    double logp = std::log(s0), weight = 1.0;
    for (int k = 0; k < n; ++k) {
      const double e = ev(m_prev, k);
      const QValue q = q_from_eta(e, v, rf, dt, options.mode);
      ++out.step_count;
      if (q.clamped) ++out.clamp_count;
      const double u = rng.uniform();
      int d;
      if (reweight) {
        d = u < 0.5 ? 1 : -1;
        weight *= d > 0 ? 2.0 * q.q : 2.0 * (1.0 - q.q);
      } else {
        d = u < q.q ? 1 : -1;
      }
      logp += v * dt + d * e * sqdt;
      m_prev = m;
      m += d;
    }
    const double f = disc * weight * spec.payoff(std::exp(logp));
    sum += f;
    sum_sq += f * f;
  }
  check_clamps(out);
  const double np = static_cast<double>(options.mc_paths);
  out.price = sum / np;
  const double var = std::max(0.0, (sum_sq - np * out.price * out.price) / (np - 1.0));
  out.std_error = std::sqrt(var / np);
  return out;
}

}  // namespace gjr
