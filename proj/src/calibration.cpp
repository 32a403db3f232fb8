#include "gjr/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <tuple>

#include "gjr/errors.hpp"

namespace gjr {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLambda0Min = 1e-8;
constexpr double kLambda0Max = 1e3;
constexpr double kLambda1Max = 1e3;
}  // namespace

void OptionQuote::validate() const {
  if (!quote_date.ok() || !expiry_date.ok()) throw DataError("OptionQuote: invalid date");
  if (!(expiry_date > quote_date)) throw DataError("OptionQuote: expiry must be after the quote date");
  if (!(strike > 0.0) || !std::isfinite(strike)) throw DataError("OptionQuote: strike must be positive");
  if (!(spot > 0.0) || !std::isfinite(spot)) throw DataError("OptionQuote: spot must be positive");
  if (!std::isfinite(rf)) throw DataError("OptionQuote: rf must be finite");
  if (!(bid >= 0.0) || !std::isfinite(ask)) throw DataError("OptionQuote: bad bid/ask");
  if (bid > ask) throw DataError("OptionQuote: crossed quote (bid > ask)");
  if (mid < bid || mid > ask) throw DataError("OptionQuote: mid outside [bid, ask]");
}

std::string target_name(Target t) {
  switch (t) {
    case Target::mu: return "mu";
    case Target::beta: return "beta";
    case Target::sigma: return "sigma";
    case Target::lambda0: return "lambda0";
    case Target::lambda1: return "lambda1";
    case Target::path_sigma: return "path_sigma";
  }
  return "?";
}

Target parse_target(const std::string& name) {
  for (Target t : {Target::mu, Target::beta, Target::sigma, Target::lambda0, Target::lambda1, Target::path_sigma})
    if (target_name(t) == name) return t;
  throw ConfigError("unknown calibration target '" + name + "'");
}

Bounds default_bounds(Target t, double dt) {
  switch (t) {
    case Target::mu: return {-5.0, 5.0, false};
    case Target::beta: {
      const double b = (1.0 - 1e-6) / std::sqrt(dt);
      return {-b, b, false};
    }
    case Target::sigma:
    case Target::path_sigma: return {1e-4, 5.0, true};
    case Target::lambda0: return {kLambda0Min, kLambda0Max, true};
    case Target::lambda1: return {-kLambda1Max, kLambda1Max, false};
  }
  return {};
}

CalibrationContext with_target(const CalibrationContext& ctx, Target t, double value) {
  CalibrationContext c = ctx;
  switch (t) {
    case Target::mu: c.mu = value; break;
    case Target::beta: c.beta = value; break;
    case Target::sigma: c.sigma = value; break;
    case Target::lambda0: {
      HTCParams h = c.htc.value_or(HTCParams{});
      h.lambda0 = value;
      c.htc = h;
      break;
    }
    case Target::lambda1: {
      HTCParams h = c.htc.value_or(HTCParams{});
      h.lambda1 = value;
      c.htc = h;
      break;
    }
    case Target::path_sigma:
      c.use_path_model = true;
      c.eta.sigma = value;
      break;
  }
  return c;
}

namespace {

double target_value(const CalibrationContext& ctx, Target t) {
  switch (t) {
    case Target::mu: return ctx.mu;
    case Target::beta: return ctx.beta;
    case Target::sigma: return ctx.sigma;
    case Target::lambda0: return ctx.htc ? ctx.htc->lambda0 : 0.0;
    case Target::lambda1: return ctx.htc ? ctx.htc->lambda1 : 0.0;
    case Target::path_sigma: return ctx.eta.sigma;
  }
  return 0.0;
}

int quote_steps(const OptionQuote& q) {
  const int n = q.trading_days();
  if (n < 1) throw InvalidArgument("model_price: quote expires within the same trading day");
  return n;
}

RiskNeutralContext tree_context(const CalibrationContext& ctx, int n, double spot, double rf) {
  RiskNeutralContext rn;
  rn.natural = NaturalParams{ctx.mu, ctx.sigma, ctx.beta, ctx.dt, n, spot};
  rn.rf = rf;
  rn.htc = ctx.htc;
  rn.mode = ctx.mode;
  return rn;
}

std::function<double(double)> vanilla_payoff(OptionKind kind, double strike) {
  if (kind == OptionKind::call) return [strike](double s) { return std::max(s - strike, 0.0); };
  return [strike](double s) { return std::max(strike - s, 0.0); };
}

}  // namespace

double model_price(const OptionQuote& quote, const CalibrationContext& ctx) {
  const int n = quote_steps(quote);
  const auto spec = EccSpec::vanilla(quote.kind, quote.strike, n * ctx.dt);
  if (ctx.use_path_model) {
    EtaModel eta = ctx.eta;
    eta.dt = ctx.dt;
    PathPricingOptions po;
    po.mode = ctx.mode;
    if (n <= ctx.path_enumerate_max) {
      po.method = PathMethod::enumerate;
    } else {
      po.method = PathMethod::reweighted;
      po.mc_paths = ctx.path_paths;
      po.seed = ctx.path_seed;
    }
    return price_path_dependent(eta, ctx.v, quote.rf, quote.spot, spec, n, po).price;
  }
  return price_ecc(tree_context(ctx, n, quote.spot, quote.rf), spec, false).price;
}

ImpliedPoint implied_point(const OptionQuote& quote, Target target, const CalibrationContext& ctx,
                           std::optional<Bounds> bounds) {
  ImpliedPoint out;
  out.value = kNaN;
  out.residual = kNaN;
  try {
    quote.validate();
    if (!(quote.mid > 0.0) || quote.trading_days() < 1) throw DataError("not calibratable");
  } catch (const DataError&) {
    out.flag = "invalid_quote";
    return out;
  }
  const Bounds b = bounds.value_or(default_bounds(target, ctx.dt));
  if (!(b.lo < b.hi) || (b.log_grid && !(b.lo > 0.0))) throw InvalidArgument("implied_point: bad bounds");
  const double mkt = quote.mid;

  const auto diff = [&](double x) {
    try {
      return model_price(quote, with_target(ctx, target, x)) - mkt;
    } catch (const NumericalError&) {
      return kNaN;
    } catch (const InvalidArgument&) {
      return kNaN;
    }
  };
  const auto grid_x = [&](int i) {
    const double t = static_cast<double>(i) / (kScanPoints - 1);
    return b.log_grid ? std::exp(std::log(b.lo) + t * (std::log(b.hi) - std::log(b.lo))) : b.lo + t * (b.hi - b.lo);
  };

  std::vector<double> xs(kScanPoints), ds(kScanPoints);
  int finite = 0, best = -1;
  double dmin = kInf, dmax = -kInf;
  for (int i = 0; i < kScanPoints; ++i) {
    xs[i] = grid_x(i);
    ds[i] = diff(xs[i]);
    if (!std::isfinite(ds[i])) continue;
    ++finite;
    dmin = std::min(dmin, ds[i]);
    dmax = std::max(dmax, ds[i]);
    if (best < 0 || std::abs(ds[i]) < std::abs(ds[best])) best = i;
  }
  if (finite == 0) {
    out.flag = "infeasible";
    return out;
  }
  if (dmax - dmin <= 1e-9 * std::max(1.0, mkt)) {
    out.flag = "flat";
    return out;
  }

  // Every sign change is refined; when the price is not monotone in the target
  // there can be several roots and the one closest to the context value wins.
  const double anchor = target_value(ctx, target);
  bool found = false;
  for (int i = 0; i + 1 < kScanPoints; ++i) {
    if (!std::isfinite(ds[i]) || !std::isfinite(ds[i + 1]) || (ds[i] <= 0.0) == (ds[i + 1] <= 0.0)) continue;
    const double lo = xs[i], hi = xs[i + 1];
    const double xtol = 1e-11 * std::max(1.0, std::max(std::abs(lo), std::abs(hi)));
    double root;
    try {
      root = opt::bracketed_root(diff, lo, hi, ds[i], ds[i + 1], xtol);
    } catch (const std::exception&) {
      continue;
    }
    out.roots.push_back(root);
    if (found && std::abs(root - anchor) >= std::abs(out.value - anchor)) continue;
    const double d = diff(root);
    if (!std::isfinite(d)) continue;
    out.value = root;
    out.residual = (d / mkt) * (d / mkt);
    found = true;
  }
  // Two roots inside one grid cell pair: the grid point nearest the market
  // misses the crossing, so look for the local extremum of the difference.
  if (!found && best > 0 && best + 1 < kScanPoints && std::isfinite(ds[best - 1]) && std::isfinite(ds[best + 1])) {
    const double sgn = ds[best] < 0.0 ? -1.0 : 1.0;
    const auto g = [&](double x) {
      const double d = diff(x);
      return std::isfinite(d) ? sgn * d : kInf;
    };
    const auto ext = opt::brent_minimize(g, xs[best - 1], xs[best + 1], 52);
    if (ext.value < 0.0) {
      const double dext = sgn * ext.value;
      for (auto [lo, hi, flo, fhi] : {std::tuple{xs[best - 1], ext.x, ds[best - 1], dext},
                                      std::tuple{ext.x, xs[best + 1], dext, ds[best + 1]}}) {
        if ((flo <= 0.0) == (fhi <= 0.0)) continue;
        double root;
        try {
          root = opt::bracketed_root(diff, lo, hi, flo, fhi, 1e-11 * std::max(1.0, std::max(std::abs(lo), std::abs(hi))));
        } catch (const std::exception&) {
          continue;
        }
        out.roots.push_back(root);
        if (found && std::abs(root - anchor) >= std::abs(out.value - anchor)) continue;
        const double d = diff(root);
        out.value = root;
        out.residual = (d / mkt) * (d / mkt);
        found = true;
      }
    }
  }
  if (found) {
    std::sort(out.roots.begin(), out.roots.end());
    out.identified = true;
    out.flag = "ok";
    return out;
  }

  const double lo = xs[std::max(0, best - 1)], hi = xs[std::min(kScanPoints - 1, best + 1)];
  const auto g = [&](double x) {
    const double d = diff(x);
    return std::isfinite(d) ? (d / mkt) * (d / mkt) : kInf;
  };
  const auto m = opt::brent_minimize(g, lo, hi, 52);
  const double grid_res = (ds[best] / mkt) * (ds[best] / mkt);
  out.value = m.value <= grid_res ? m.x : xs[best];
  out.residual = std::min(m.value, grid_res);
  out.identified = false;
  out.flag = "no_bracket";
  return out;
}

ImpliedSurface build_surface(const std::vector<OptionQuote>& quotes, Target target, const CalibrationContext& ctx,
                             std::optional<Bounds> bounds) {
  if (quotes.empty()) throw InvalidArgument("build_surface: no quotes");
  ImpliedSurface s;
  s.parameter = target_name(target);
  s.points.reserve(quotes.size());
  for (const auto& q : quotes) {
    const ImpliedPoint p = implied_point(q, target, ctx, bounds);
    SurfacePoint sp;
    sp.moneyness = q.spot > 0.0 ? q.moneyness() : kNaN;
    sp.days = q.trading_days();
    sp.value = p.identified ? p.value : kNaN;
    sp.residual = p.residual;
    sp.flag = p.flag;
    s.points.push_back(sp);
  }
  return s;
}

ImpliedSurface bs_surface(const std::vector<OptionQuote>& quotes, double dt) {
  ImpliedSurface s;
  s.parameter = "bs_sigma";
  for (const auto& q : quotes) {
    SurfacePoint sp;
    sp.moneyness = q.spot > 0.0 ? q.moneyness() : kNaN;
    sp.days = q.trading_days();
    sp.value = kNaN;
    sp.residual = kNaN;
    try {
      q.validate();
      if (!(q.mid > 0.0) || sp.days < 1) throw DataError("not calibratable");
      sp.value = bs_implied_vol(q.mid, q.spot, q.strike, sp.days * dt, q.rf, q.kind);
      const double e = (bs_price(q.spot, q.strike, sp.days * dt, q.rf, sp.value, q.kind) - q.mid) / q.mid;
      sp.residual = e * e;
      sp.flag = "ok";
    } catch (const DataError&) {
      sp.flag = "invalid_quote";
    } catch (const NumericalError&) {
      sp.flag = "no_bracket";
    }
    s.points.push_back(sp);
  }
  return s;
}

ImpliedSurface deviation_surface(const ImpliedSurface& a, const ImpliedSurface& b, DeviationMode mode) {
  if (a.points.size() != b.points.size()) throw InvalidArgument("deviation_surface: grids differ in size");
  ImpliedSurface out;
  out.parameter = a.parameter + (mode == DeviationMode::percent ? "_pct_dev_" : "_diff_") + b.parameter;
  out.points.reserve(a.points.size());
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    const auto& pa = a.points[i];
    const auto& pb = b.points[i];
    const bool same_m = pa.moneyness == pb.moneyness || (std::isnan(pa.moneyness) && std::isnan(pb.moneyness));
    if (!same_m || pa.days != pb.days) throw InvalidArgument("deviation_surface: grid points differ");
    SurfacePoint p = pa;
    p.residual = 0.0;
    if (pa.hole() || pb.hole()) {
      p.value = kNaN;
      p.flag = pa.hole() ? pa.flag : pb.flag;
    } else if (mode == DeviationMode::difference) {
      p.value = pa.value - pb.value;
    } else if (pb.value == 0.0) {
      p.value = kNaN;
      p.flag = "div_zero";
    } else {
      p.value = 100.0 * (pa.value - pb.value) / pb.value;
    }
    out.points.push_back(p);
  }
  return out;
}

double chain_rel_mse(const std::vector<OptionQuote>& quotes, const CalibrationContext& ctx) {
  if (quotes.empty()) throw InvalidArgument("chain_rel_mse: no quotes");
  for (const auto& q : quotes)
    if (!(q.mid > 0.0)) throw DataError("chain_rel_mse: quote with non-positive mid");
  double sum = 0.0;
  if (ctx.use_path_model) {
    for (const auto& q : quotes) {
      const double e = (model_price(q, ctx) - q.mid) / q.mid;
      sum += e * e;
    }
    return sum / static_cast<double>(quotes.size());
  }
  // Quotes sharing (steps, spot, rf) share one tree and q schedule.
  std::map<std::tuple<int, double, double>, std::vector<const OptionQuote*>> groups;
  for (const auto& q : quotes) groups[{quote_steps(q), q.spot, q.rf}].push_back(&q);
  for (const auto& [key, members] : groups) {
    const auto& [n, spot, rf] = key;
    const RiskNeutralContext rn = tree_context(ctx, n, spot, rf);
    rn.validate();
    const QSchedule schedule = q_schedule(rn);
    const GjrTree tree(rn.natural);
    for (const OptionQuote* q : members) {
      const double e = (rollback_price(tree, schedule, rf, vanilla_payoff(q->kind, q->strike)) - q->mid) / q->mid;
      sum += e * e;
    }
  }
  return sum / static_cast<double>(quotes.size());
}

HtcFit fit_htc(const std::vector<OptionQuote>& quotes, const CalibrationContext& fixed, const HtcFitOptions& options) {
  if (quotes.size() < 10) throw InvalidArgument("fit_htc: need at least 10 quotes");
  std::vector<OptionQuote> usable;
  for (const auto& q : quotes) {
    q.validate();
    if (q.mid > 0.0 && q.trading_days() >= 1) usable.push_back(q);
  }
  if (usable.size() < 10) throw DataError("fit_htc: fewer than 10 quotes with positive mid");

  const auto rel = [&](double l0, double l1) {
    CalibrationContext c = fixed;
    c.use_path_model = false;
    c.htc = HTCParams{l0, l1};
    try {
      return chain_rel_mse(usable, c);
    } catch (const NumericalError&) {
      return kInf;
    } catch (const InvalidArgument&) {
      return kInf;
    }
  };
  const auto objective = [&](std::span<const double> u) {
    const double l0 = std::exp(u[0]), l1 = u[1];
    if (!(l0 > kLambda0Min && l0 <= kLambda0Max) || std::abs(l1) > kLambda1Max) return kInf;
    return rel(l0, l1);
  };

  std::vector<std::vector<double>> starts{{std::log(1e-6), 0.0}};
  const std::vector<double> lo{std::log(1e-6), -5.0}, hi{std::log(kLambda0Max), 5.0};
  for (auto& s : opt::latin_hypercube(std::max(0, options.starts - 1), lo, hi, options.seed)) starts.push_back(s);
  const std::vector<double> step{1.0, 0.5};

  HtcFit out;
  double best = kInf;
  std::vector<double> best_u;
  for (const auto& s : starts) {
    const auto r = opt::nelder_mead(objective, s, step, options.nelder_mead);
    out.converged = out.converged || r.converged;
    if (r.value < best) {
      best = r.value;
      best_u = r.x;
    }
  }
  // Never worse than the no-cost model.
  const double baseline = rel(std::nextafter(kLambda0Min, kInf), 0.0);
  if (best_u.empty() || !(best <= baseline)) {
    out.htc = HTCParams{std::nextafter(kLambda0Min, kInf), 0.0};
    out.rel_mse = baseline;
  } else {
    out.htc = HTCParams{std::exp(best_u[0]), best_u[1]};
    out.rel_mse = best;
  }
  if (!out.converged) out.warning = "nelder-mead did not converge from any start; returning the best incumbent";
  return out;
}

}  // namespace gjr
