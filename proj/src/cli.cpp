#include "gjr/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "gjr/black_scholes.hpp"
#include "gjr/calibration.hpp"
#include "gjr/errors.hpp"
#include "gjr/estimation.hpp"
#include "gjr/gjr_tree.hpp"
#include "gjr/market_driver.hpp"
#include "gjr/path_dependent.hpp"
#include "gjr/risk_neutral.hpp"
#include "gjr/skew_process.hpp"
#include "gjr/stats.hpp"

namespace gjr::cli {

namespace {

using nlohmann::json;

struct Key {
  const char* name;
  const char* help;
};

const std::vector<Key> kCommonKeys = {
    {"out", "output directory (default $GJR_OUTPUT_DIR or .)"},
    {"seed", "RNG seed (default 0)"},
    {"dt", "time step in years (default 1/252)"},
};

const std::map<std::string, std::vector<Key>> kCommandKeys = {
    {"simulate",
     {{"what", "walk | sbm | tree | paths (default walk)"},
      {"alpha", "skew parameter (default from beta, else 0.5)"},
      {"n", "steps (default 252)"},
      {"count", "paths or samples (default 1, sbm 10000)"},
      {"t", "sbm horizon (default 1)"},
      {"mu", "drift"},
      {"sigma", "volatility (default 0.2)"},
      {"beta", "skew (default 0)"},
      {"s0", "initial price (default 100)"}}},
    {"estimate",
     {{"prices", "price CSV (date, close)"},
      {"window", "window length L (default 252)"},
      {"smoothing", "moving-average length (default 252)"},
      {"sweep", "comma-separated window lengths for the sweep"},
      {"stride", "window stride (default 1)"},
      {"correction", "log chi-square location correction (default true)"},
      {"tuning", "logistic weight tuning constant (default 1.205)"}}},
    {"price",
     {{"model", "gjr | path (default gjr)"},
      {"mu", "drift (default 0)"},
      {"sigma", "volatility (default 0.2)"},
      {"beta", "skew (default 0)"},
      {"n", "steps to expiry (default 252)"},
      {"s0", "spot (default 100)"},
      {"strike", "strike (default s0)"},
      {"kind", "call | put (default call)"},
      {"rf", "risk-free rate (default 0)"},
      {"mode", "exact | leading_order (default exact)"},
      {"htc", "on | off (default on when a lambda is given)"},
      {"lambda0", "HTC level"},
      {"lambda1", "HTC slope"},
      {"gamma", "path model: gamma"},
      {"kappa", "path model: Student-t degrees of freedom (default 5)"},
      {"h_id", "path model: h function id (default student_t)"},
      {"v", "path model: drift v (default mu)"},
      {"method", "path model: enumerate | monte_carlo | reweighted"},
      {"paths", "path model: Monte Carlo paths (default 100000)"}}},
    {"calibrate",
     {{"chain", "option chain CSV"},
      {"action", "surface | fit-htc (default surface)"},
      {"target", "mu | beta | sigma | lambda0 | lambda1 | path_sigma (default sigma)"},
      {"mu", "fixed drift (default 0)"},
      {"sigma", "fixed volatility (default 0.2)"},
      {"beta", "fixed skew (default 0)"},
      {"htc", "on | off"},
      {"lambda0", "fixed HTC level"},
      {"lambda1", "fixed HTC slope"},
      {"mode", "leading_order | exact (default leading_order)"},
      {"rf", "constant rate used instead of the rf column"},
      {"gamma", "path model: gamma"},
      {"kappa", "path model: degrees of freedom (default 5)"},
      {"h_id", "path model: h function id (default student_t)"},
      {"v", "path model: drift v (default mu)"},
      {"lo", "lower bound of the target"},
      {"hi", "upper bound of the target"},
      {"bs", "also write the Black-Scholes surface and deviation (default true)"},
      {"starts", "fit-htc: Nelder-Mead starts (default 8)"}}},
    {"fit-driver",
     {{"prices", "stock price CSV (date, close)"},
      {"factors", "factor CSV (date, Mkt-RF, SMB, HML, RMW, CMA, RF)"},
      {"factor_units", "percent | decimal (default percent)"},
      {"split", "first date (ISO) or index of the second period's S_0"},
      {"window", "estimation window (default 252)"},
      {"smoothing", "moving-average length (default 252)"},
      {"ensemble", "exogenous path ensemble size (default 100000)"}}},
};

std::vector<Key> keys_for(const std::string& command) {
  std::vector<Key> keys = kCommonKeys;
  const auto& extra = kCommandKeys.at(command);
  keys.insert(keys.end(), extra.begin(), extra.end());
  return keys;
}

struct Run {
  const RunConfig& config;
  io::ArtifactMeta meta;
  std::ostream& out;
  json summary = json::object();
  std::vector<std::string> artifacts;

  std::string path(const std::string& file) {
    artifacts.push_back(file);
    return (std::filesystem::path(config.output_dir) / file).string();
  }
};

QMode parse_mode(const std::string& s) {
  if (s == "exact") return QMode::exact;
  if (s == "leading_order") return QMode::leading_order;
  throw ConfigError("mode must be exact or leading_order, got '" + s + "'");
}

OptionKind parse_kind(const std::string& s) {
  if (s == "call") return OptionKind::call;
  if (s == "put") return OptionKind::put;
  throw ConfigError("kind must be call or put, got '" + s + "'");
}

std::optional<HTCParams> parse_htc(const RunConfig& c) {
  const bool given = c.settings.count("lambda0") || c.settings.count("lambda1");
  if (!c.get_bool("htc", given)) return std::nullopt;
  return HTCParams{c.get_double("lambda0", 0.0), c.get_double("lambda1", 0.0)};
}

std::string require(const RunConfig& c, const std::string& key) {
  const auto it = c.settings.find(key);
  if (it == c.settings.end() || it->second.empty()) throw ConfigError(c.command + ": '" + key + "' is required");
  return it->second;
}

std::size_t positive_size(const RunConfig& c, const std::string& key, long long fallback) {
  const long long v = c.get_int(key, fallback);
  if (v < 1) throw ConfigError(key + " must be >= 1");
  return static_cast<std::size_t>(v);
}

json estimate_json(const WindowEstimate& e) {
  return {{"window_end", e.window_end.ok() ? format_iso_date(e.window_end) : std::to_string(e.end_index)},
          {"sigma", e.sigma_hat},
          {"mu", e.mu_hat},
          {"beta", e.beta_hat},
          {"alpha", e.alpha_hat},
          {"pvalue", e.pvalue}};
}

void write_estimates(Run& run, const std::string& file, const std::vector<WindowEstimate>& rows) {
  io::CsvWriter w(run.path(file), run.meta, {"date", "sigma", "mu", "beta", "alpha", "pvalue"});
  for (const auto& e : rows) {
    w.cell(e.window_end.ok() ? format_iso_date(e.window_end) : std::to_string(e.end_index))
        .cell(e.sigma_hat)
        .cell(e.mu_hat)
        .cell(e.beta_hat)
        .cell(e.alpha_hat)
        .cell(e.pvalue);
    w.end_row();
  }
  w.close();
}

// ---- simulate ----

void cmd_simulate(Run& run) {
  const RunConfig& c = run.config;
  const double dt = c.get_double("dt", 1.0 / 252.0);
  const std::string what = c.get("what", "walk");
  const int n = static_cast<int>(positive_size(c, "n", 252));
  NaturalParams p;
  p.mu = c.get_double("mu", 0.0);
  p.sigma = c.get_double("sigma", 0.2);
  p.beta = c.get_double("beta", 0.0);
  p.dt = dt;
  p.n = n;
  p.s0 = c.get_double("s0", 100.0);
  const double alpha = c.get_double("alpha", c.settings.count("beta") ? (1.0 + p.beta * std::sqrt(dt)) / 2.0 : 0.5);
  run.summary["what"] = what;

  if (what == "walk") {
    const std::size_t count = positive_size(c, "count", 1);
    io::CsvWriter w(run.path("walk.csv"), run.meta, {"path_id", "k", "M_k"});
    for (std::size_t i = 0; i < count; ++i) {
      const SkewPath path = skew_walk_path(SkewParam(alpha), n, c.seed(), i);
      for (int k = 0; k <= n; ++k) {
        w.cell(i).cell(k).cell(path.steps[static_cast<std::size_t>(k)]);
        w.end_row();
      }
    }
    w.close();
    run.summary["alpha"] = alpha;
    run.summary["paths"] = count;
  } else if (what == "sbm") {
    const std::size_t count = positive_size(c, "count", 10000);
    const double t = c.get_double("t", 1.0);
    const auto xs = sbm_sample(SkewParam(alpha), t, static_cast<int>(count), c.seed());
    io::CsvWriter w(run.path("sbm.csv"), run.meta, {"i", "x"});
    for (std::size_t i = 0; i < xs.size(); ++i) {
      w.cell(i).cell(xs[i]);
      w.end_row();
    }
    w.close();
    const auto m = sbm_moments(SkewParam(alpha), t);
    run.summary["alpha"] = alpha;
    run.summary["sample_mean"] = stats::mean(xs);
    run.summary["closed_form_mean"] = m.mean;
  } else if (what == "tree" || what == "paths") {
    p.validate();
    const GjrTree tree = build_tree(p);
    run.summary["params"] = {{"mu", p.mu}, {"sigma", p.sigma}, {"beta", p.beta}, {"n", n}, {"s0", p.s0}};
    if (what == "tree") {
      io::CsvWriter w(run.path("tree.csv"), run.meta, {"k", "level", "price"});
      for (int k = 0; k <= n; ++k)
        for (int j = 0; j <= k; ++j) {
          w.cell(k).cell(2 * j - k).cell(tree.price_at(k, j));
          w.end_row();
        }
      w.close();
    } else {
      const std::size_t count = positive_size(c, "count", 1);
      const auto paths = simulate_paths(tree, static_cast<int>(count), c.seed());
      io::CsvWriter w(run.path("ensemble.csv"), run.meta, {"path_id", "k", "price"});
      for (std::size_t i = 0; i < paths.size(); ++i)
        for (std::size_t k = 0; k < paths[i].prices.size(); ++k) {
          w.cell(i).cell(k).cell(paths[i].prices[k]);
          w.end_row();
        }
      w.close();
      run.summary["paths"] = count;
    }
  } else {
    throw ConfigError("simulate: what must be walk, sbm, tree or paths");
  }
}

// ---- estimate ----

std::vector<std::size_t> parse_lengths(const std::string& s) {
  std::vector<std::size_t> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t pos = 0;
      const long long v = std::stoll(item, &pos);
      if (v < 1 || item.find_first_not_of(" \t", pos) != std::string::npos) throw std::invalid_argument(item);
      out.push_back(static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      throw ConfigError("sweep: bad window length '" + item + "'");
    }
  }
  return out;
}

void cmd_estimate(Run& run) {
  const RunConfig& c = run.config;
  const double dt = c.get_double("dt", 1.0 / 252.0);
  io::IngestReport report;
  const ReturnSeries series = io::ingest_prices(require(c, "prices"), dt, &report);
  run.summary["ingest"] = io::report_json(report);

  EstimationConfig cfg;
  cfg.log_square_correction = c.get_bool("correction", true);
  cfg.robust.tuning = c.get_double("tuning", cfg.robust.tuning);
  const std::size_t window = positive_size(c, "window", 252);
  const std::size_t smoothing = positive_size(c, "smoothing", 252);
  const std::size_t stride = positive_size(c, "stride", 1);
  if (window + 1 > series.size())
    throw DataError("estimate: " + std::to_string(series.size() - 1) + " returns, window needs " + std::to_string(window));

  const auto rolling = rolling_estimates(series, window, cfg, stride);
  write_estimates(run, "estimates.csv", rolling);
  std::vector<double> sig, pv;
  for (const auto& e : rolling) {
    sig.push_back(e.sigma_hat);
    pv.push_back(e.pvalue);
  }
  const auto rejected = std::count_if(pv.begin(), pv.end(), [](double p) { return p < 0.05; });
  run.summary["windows"] = rolling.size();
  run.summary["window"] = window;
  run.summary["latest"] = estimate_json(rolling.back());
  run.summary["median_sigma"] = stats::median(sig);
  run.summary["pvalue_below_5pct"] = static_cast<double>(rejected) / static_cast<double>(pv.size());

  if (rolling.size() >= smoothing) {
    const auto smooth = smooth_series(rolling, smoothing, dt);
    write_estimates(run, "smoothed.csv", smooth);
    run.summary["smoothed_latest"] = estimate_json(smooth.back());
  } else {
    run.summary["smoothed_latest"] = nullptr;
    run.summary["smoothing_note"] = "fewer windows than the smoothing length";
  }

  if (const std::string s = c.get("sweep", ""); !s.empty()) {
    const auto lengths = parse_lengths(s);
    if (*std::max_element(lengths.begin(), lengths.end()) + 1 > series.size())
      throw DataError("estimate: sweep window longer than the series");
    const auto sweep = window_sweep(series, lengths, cfg, stride);
    io::CsvWriter w(run.path("sweep.csv"), run.meta, {"length", "min", "q1", "median", "q3", "max"});
    for (const auto& e : sweep.entries) {
      w.cell(e.length).cell(e.min).cell(e.q1).cell(e.median).cell(e.q3).cell(e.max);
      w.end_row();
    }
    w.close();
    run.summary["sweep_recommended"] = sweep.recommended;
  }
  run.out << "windows=" << rolling.size() << " sigma=" << io::format_double(rolling.back().sigma_hat)
          << " mu=" << io::format_double(rolling.back().mu_hat) << " beta=" << io::format_double(rolling.back().beta_hat)
          << "\n";
}

// ---- price ----

void cmd_price(Run& run) {
  const RunConfig& c = run.config;
  const double dt = c.get_double("dt", 1.0 / 252.0);
  const int n = static_cast<int>(positive_size(c, "n", 252));
  const double s0 = c.get_double("s0", 100.0);
  const double strike = c.get_double("strike", s0);
  const OptionKind kind = parse_kind(c.get("kind", "call"));
  const double rf = c.get_double("rf", 0.0);
  const double mu = c.get_double("mu", 0.0);
  const double sigma = c.get_double("sigma", 0.2);
  const QMode mode = parse_mode(c.get("mode", "exact"));
  const std::string model = c.get("model", "gjr");
  const EccSpec spec = EccSpec::vanilla(kind, strike, n * dt);
  const double bs = bs_price(s0, strike, n * dt, rf, sigma, kind);
  run.summary["model"] = model;
  run.summary["bs_reference"] = bs;

  if (model == "gjr") {
    RiskNeutralContext ctx;
    ctx.natural = NaturalParams{mu, sigma, c.get_double("beta", 0.0), dt, n, s0};
    ctx.rf = rf;
    ctx.htc = parse_htc(c);
    ctx.mode = mode;
    const auto r = price_ecc(ctx, spec, false);
    run.summary["price"] = r.price;
    run.summary["clamped_steps"] = r.schedule.clamp_count;
    run.out << "price=" << io::format_double(r.price) << " bs_reference=" << io::format_double(bs) << "\n";
  } else if (model == "path") {
    EtaModel eta;
    eta.sigma = sigma;
    eta.gamma = c.get_double("gamma", 0.0);
    eta.h_id = c.get("h_id", "student_t");
    eta.kappa = c.get_double("kappa", 5.0);
    eta.dt = dt;
    PathPricingOptions opts;
    const std::string method = c.get("method", n <= kMaxEnumerateSteps ? "enumerate" : "monte_carlo");
    if (method == "enumerate") opts.method = PathMethod::enumerate;
    else if (method == "monte_carlo") opts.method = PathMethod::monte_carlo;
    else if (method == "reweighted") opts.method = PathMethod::reweighted;
    else throw ConfigError("method must be enumerate, monte_carlo or reweighted");
    opts.mode = mode;
    opts.mc_paths = positive_size(c, "paths", 100000);
    opts.seed = c.seed();
    const auto r = price_path_dependent(eta, c.get_double("v", mu), rf, s0, spec, n, opts);
    run.summary["price"] = r.price;
    run.summary["std_error"] = r.std_error;
    run.summary["clamp_count"] = r.clamp_count;
    run.summary["method"] = method;
    run.out << "price=" << io::format_double(r.price) << " std_error=" << io::format_double(r.std_error)
            << " bs_reference=" << io::format_double(bs) << "\n";
  } else {
    throw ConfigError("price: model must be gjr or path");
  }
}

// ---- calibrate ----

void write_surface(Run& run, const std::string& file, const ImpliedSurface& s) {
  io::CsvWriter w(run.path(file), run.meta, {"moneyness", "T_days", "value", "residual", "flag"});
  for (const auto& p : s.points) {
    w.cell(p.moneyness).cell(p.days).cell(p.value).cell(p.residual).cell(p.flag);
    w.end_row();
  }
  w.close();
}

json surface_json(const ImpliedSurface& s) {
  std::map<std::string, int> flags;
  std::vector<double> values;
  for (const auto& p : s.points) {
    ++flags[p.flag];
    if (!p.hole()) values.push_back(p.value);
  }
  json j = {{"parameter", s.parameter}, {"points", s.points.size()}, {"flags", flags}};
  j["median_value"] = values.empty() ? json(nullptr) : json(stats::median(values));
  return j;
}

void cmd_calibrate(Run& run) {
  const RunConfig& c = run.config;
  io::ChainOptions chain_opts;
  if (c.settings.count("rf")) chain_opts.constant_rf = c.get_double("rf", 0.0);
  io::IngestReport report;
  const auto quotes = io::ingest_chain(require(c, "chain"), chain_opts, &report);
  run.summary["ingest"] = io::report_json(report);

  CalibrationContext ctx;
  ctx.dt = c.get_double("dt", 1.0 / 252.0);
  ctx.mu = c.get_double("mu", 0.0);
  ctx.sigma = c.get_double("sigma", 0.2);
  ctx.beta = c.get_double("beta", 0.0);
  ctx.htc = parse_htc(c);
  ctx.mode = parse_mode(c.get("mode", "leading_order"));
  ctx.eta.sigma = ctx.sigma;
  ctx.eta.gamma = c.get_double("gamma", 0.0);
  ctx.eta.h_id = c.get("h_id", "student_t");
  ctx.eta.kappa = c.get_double("kappa", 5.0);
  ctx.eta.dt = ctx.dt;
  ctx.v = c.get_double("v", ctx.mu);
  ctx.path_seed = c.seed();

  const std::string action = c.get("action", "surface");
  if (action == "surface") {
    const Target target = parse_target(c.get("target", "sigma"));
    std::optional<Bounds> bounds;
    if (c.settings.count("lo") || c.settings.count("hi")) {
      Bounds b = default_bounds(target, ctx.dt);
      b.lo = c.get_double("lo", b.lo);
      b.hi = c.get_double("hi", b.hi);
      bounds = b;
    }
    const auto surface = build_surface(quotes, target, ctx, bounds);
    write_surface(run, "surface.csv", surface);
    run.summary["surface"] = surface_json(surface);
    if (c.get_bool("bs", true)) {
      const auto bs = bs_surface(quotes, ctx.dt);
      write_surface(run, "bs_surface.csv", bs);
      run.summary["bs_surface"] = surface_json(bs);
      if (target == Target::sigma || target == Target::path_sigma) {
        const auto dev = deviation_surface(surface, bs, DeviationMode::percent);
        write_surface(run, "deviation.csv", dev);
        run.summary["deviation"] = surface_json(dev);
      }
    }
    const auto& sj = run.summary["surface"];
    run.out << "points=" << surface.points.size() << " median_" << surface.parameter << "="
            << (sj["median_value"].is_null() ? std::string("nan") : io::format_double(sj["median_value"].get<double>()))
            << "\n";
  } else if (action == "fit-htc") {
    auto base = ctx;
    base.htc.reset();
    run.summary["baseline_rel_mse"] = chain_rel_mse(quotes, base);
    HtcFitOptions opts;
    opts.starts = static_cast<int>(positive_size(c, "starts", 8));
    opts.seed = c.seed();
    const auto fit = fit_htc(quotes, ctx, opts);
    run.summary["lambda0"] = fit.htc.lambda0;
    run.summary["lambda1"] = fit.htc.lambda1;
    run.summary["rel_mse"] = fit.rel_mse;
    run.summary["converged"] = fit.converged;
    run.summary["warning"] = fit.warning;
    run.out << "lambda0=" << io::format_double(fit.htc.lambda0) << " lambda1=" << io::format_double(fit.htc.lambda1)
            << " rel_mse=" << io::format_double(fit.rel_mse) << "\n";
  } else {
    throw ConfigError("calibrate: action must be surface or fit-htc");
  }
}

// ---- fit-driver ----

void cmd_fit_driver(Run& run) {
  const RunConfig& c = run.config;
  io::IngestReport price_report, factor_report;
  const auto prices = io::ingest_price_table(require(c, "prices"), &price_report);
  const std::string units = c.get("factor_units", "percent");
  if (units != "percent" && units != "decimal") throw ConfigError("factor_units must be percent or decimal");
  const FactorPanel raw = io::ingest_factors(require(c, "factors"), units == "percent" ? io::FactorUnits::percent
                                                                                        : io::FactorUnits::decimal,
                                             &factor_report);
  run.summary["ingest"] = {io::report_json(price_report), io::report_json(factor_report)};

  // One factor row per return, matched on the return's date.
  std::map<Date, std::size_t> row_of;
  for (std::size_t i = 0; i < raw.size(); ++i) row_of[raw.dates[i]] = i;
  FactorPanel panel;
  for (std::size_t k = 1; k < prices.dates.size(); ++k) {
    const auto it = row_of.find(prices.dates[k]);
    if (it == row_of.end()) throw DataError("fit-driver: no factor row for " + format_iso_date(prices.dates[k]));
    const std::size_t i = it->second;
    panel.dates.push_back(raw.dates[i]);
    panel.mkt_rf.push_back(raw.mkt_rf[i]);
    panel.smb.push_back(raw.smb[i]);
    panel.hml.push_back(raw.hml[i]);
    panel.rmw.push_back(raw.rmw[i]);
    panel.cma.push_back(raw.cma[i]);
    panel.rf.push_back(raw.rf[i]);
  }

  const std::string split_s = require(c, "split");
  std::size_t split = 0;
  if (const auto d = parse_iso_date(split_s)) {
    const auto it = std::find(prices.dates.begin(), prices.dates.end(), *d);
    if (it == prices.dates.end()) throw ConfigError("fit-driver: split date not in the price file");
    split = static_cast<std::size_t>(it - prices.dates.begin());
  } else {
    split = static_cast<std::size_t>(c.get_int("split", 0));
  }

  DriverPipelineConfig cfg;
  cfg.window = positive_size(c, "window", 252);
  cfg.smoothing = positive_size(c, "smoothing", 252);
  cfg.ensemble_size = positive_size(c, "ensemble", 100000);
  cfg.seed = c.seed();
  cfg.dt = c.get_double("dt", 1.0 / 252.0);
  if (split < cfg.window + cfg.smoothing || split + 2 > prices.closes.size())
    throw DataError("fit-driver: split leaves too few days for estimation or scoring");
  const auto r = run_driver_pipeline(prices.closes, panel, split, cfg);

  const auto params = [](const DriverParams& p) {
    return json{{"mu", p.mu}, {"sigma", p.sigma}, {"beta", p.beta}, {"alpha", p.alpha}};
  };
  run.summary["split_date"] = format_iso_date(prices.dates[split]);
  run.summary["endogenous"] = {{"params", params(r.endogenous)}, {"rel_mse", r.endogenous_rel_mse}};
  run.summary["factor_fit"] = {{"a", r.factor_fit.a}, {"b", r.factor_fit.b}, {"s", r.factor_fit.s},
                               {"h", r.factor_fit.h}, {"r", r.factor_fit.r}, {"c", r.factor_fit.c},
                               {"r_square", r.factor_fit.r_square}, {"rmse", r.factor_fit.rmse}};
  run.summary["exogenous"] = {{"params", params(r.exogenous)},
                              {"rel_mse", r.exogenous_fit.rel_mse},
                              {"path_index", r.exogenous_fit.path_index},
                              {"ensemble_size", r.exogenous_fit.ensemble_size}};
  const auto& hm = r.higher_moment;
  run.summary["higher_moment"] = {{"v", hm.params.v},         {"sigma", hm.params.sigma}, {"gamma", hm.params.gamma},
                                  {"kappa", hm.params.kappa}, {"rmse", hm.rmse},          {"gamma_se", hm.gamma_se}};

  io::CsvWriter w(run.path("driver_prices.csv"), run.meta, {"k", "date", "target", "endogenous", "exogenous"});
  for (std::size_t k = 0; k < r.endogenous_prices.size(); ++k) {
    w.cell(k)
        .cell(format_iso_date(prices.dates[split + k]))
        .cell(prices.closes[split + k])
        .cell(r.endogenous_prices[k])
        .cell(k < r.exogenous_prices.size() ? r.exogenous_prices[k] : std::nan(""));
    w.end_row();
  }
  w.close();
  run.out << "endogenous_rel_mse=" << io::format_double(r.endogenous_rel_mse)
          << " exogenous_rel_mse=" << io::format_double(r.exogenous_fit.rel_mse)
          << " kappa=" << io::format_double(hm.params.kappa) << "\n";
}

void dispatch(Run& run) {
  const std::string& cmd = run.config.command;
  if (cmd == "simulate") cmd_simulate(run);
  else if (cmd == "estimate") cmd_estimate(run);
  else if (cmd == "price") cmd_price(run);
  else if (cmd == "calibrate") cmd_calibrate(run);
  else if (cmd == "fit-driver") cmd_fit_driver(run);
  else throw ConfigError("unknown command '" + cmd + "'");
}

std::string summary_name(const std::string& command) {
  std::string s = command;
  std::replace(s.begin(), s.end(), '-', '_');
  return s + ".json";
}

}  // namespace

std::string RunConfig::get(const std::string& key, const std::string& fallback) const {
  const auto it = settings.find(key);
  return it == settings.end() ? fallback : it->second;
}

double RunConfig::get_double(const std::string& key, double fallback) const {
  const auto it = settings.find(key);
  if (it == settings.end()) return fallback;
  const std::string& s = it->second;
  try {
    std::size_t pos = 0;
    const double x = std::stod(s, &pos);
    if (pos == s.size() && std::isfinite(x)) return x;
  } catch (const std::exception&) {
  }
  throw ConfigError(key + ": expected a number, got '" + s + "'");
}

long long RunConfig::get_int(const std::string& key, long long fallback) const {
  const auto it = settings.find(key);
  if (it == settings.end()) return fallback;
  const std::string& s = it->second;
  try {
    std::size_t pos = 0;
    const long long x = std::stoll(s, &pos);
    if (pos == s.size()) return x;
  } catch (const std::exception&) {
  }
  throw ConfigError(key + ": expected an integer, got '" + s + "'");
}

bool RunConfig::get_bool(const std::string& key, bool fallback) const {
  const auto it = settings.find(key);
  if (it == settings.end()) return fallback;
  const std::string& s = it->second;
  if (s == "true" || s == "on" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "off" || s == "0" || s == "no") return false;
  throw ConfigError(key + ": expected true/false, got '" + s + "'");
}

std::uint64_t RunConfig::seed() const {
  const long long s = get_int("seed", 0);
  if (s < 0) throw ConfigError("seed must be non-negative");
  return static_cast<std::uint64_t>(s);
}

std::string RunConfig::hash() const {
  io::Settings s = settings;
  s.erase("out");
  s["command"] = command;
  return io::config_hash(s);
}

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  std::optional<Run> run;
  try {
    std::filesystem::create_directories(config.output_dir);
    run.emplace(Run{config, io::ArtifactMeta{config.hash(), config.seed(), config.command}, out, json::object(), {}});
    dispatch(*run);
    run->summary["status"] = "ok";
    run->summary["artifacts"] = run->artifacts;
    io::write_json(run->path(summary_name(config.command)), run->meta, run->summary);
    return kOk;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    if (run) {
      run->summary["status"] = "numerical_failure";
      run->summary["error"] = e.what();
      run->summary["artifacts"] = run->artifacts;
      try {
        io::write_json(run->path(summary_name(config.command)), run->meta, run->summary);
      } catch (const std::exception&) {
      }
    }
    return kNumericalError;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  }
}

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Generalized Jarrow-Rudd option pricing toolkit", "gjr"};
  app.require_subcommand(1);
  app.set_version_flag("--version", io::version());

  struct Parsed {
    CLI::App* sub = nullptr;
    std::string config_file;
    std::map<std::string, std::string> values;
    std::map<std::string, CLI::Option*> options;
  };
  std::map<std::string, Parsed> parsed;
  for (const auto& [command, _] : kCommandKeys) {
    Parsed& p = parsed[command];
    p.sub = app.add_subcommand(command);
    p.sub->add_option("--config", p.config_file, "key=value or JSON config file");
    for (const Key& k : keys_for(command)) p.options[k.name] = p.sub->add_option(std::string("--") + k.name, p.values[k.name], k.help);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }

  RunConfig config;
  try {
    for (auto& [command, p] : parsed) {
      if (!p.sub->parsed()) continue;
      config.command = command;
      if (!p.config_file.empty()) {
        config.settings = io::load_settings(p.config_file);
        std::set<std::string> known;
        for (const Key& k : keys_for(command)) known.insert(k.name);
        for (const auto& [key, _] : config.settings)
          if (!known.count(key)) throw ConfigError(p.config_file + ": unknown key '" + key + "' for " + command);
      }
      for (const auto& [key, opt] : p.options)
        if (opt->count() > 0) config.settings[key] = p.values[key];
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  }
  const char* env = std::getenv("GJR_OUTPUT_DIR");
  config.output_dir = config.get("out", env && *env ? std::string(env) : std::string("."));
  return run(config, out, err);
}

}  // namespace gjr::cli
