#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gjr/black_scholes.hpp"
#include "gjr/date.hpp"
#include "gjr/optimize.hpp"
#include "gjr/path_dependent.hpp"
#include "gjr/risk_neutral.hpp"

namespace gjr {

struct OptionQuote {
  Date quote_date{};
  Date expiry_date{};
  double strike = 0.0;
  OptionKind kind = OptionKind::call;
  double bid = 0.0;
  double ask = 0.0;
  double mid = 0.0;
  double spot = 0.0;
  double rf = 0.0;

  // Throws DataError naming the failed invariant.
  void validate() const;
  int trading_days() const { return trading_days_between(quote_date, expiry_date); }
  double moneyness() const { return strike / spot; }
};

enum class Target { mu, beta, sigma, lambda0, lambda1, path_sigma };

std::string target_name(Target t);
// Accepts the names produced by target_name; throws ConfigError otherwise.
Target parse_target(const std::string& name);

// Parameters held fixed while one target is implied. The path model is used
// only by Target::path_sigma (eta.sigma is the target; v is its drift).
struct CalibrationContext {
  double mu = 0.0;
  double sigma = 0.2;
  double beta = 0.0;
  std::optional<HTCParams> htc;
  // Surfaces use the leading-order q by default.
  QMode mode = QMode::leading_order;
  double dt = 1.0 / 252.0;

  bool use_path_model = false;  // set by with_target(path_sigma)
  EtaModel eta;
  double v = 0.0;
  int path_enumerate_max = 16;  // longer expiries use the reweighted sampler
  std::size_t path_paths = 4000;
  std::uint64_t path_seed = 0;
};

struct Bounds {
  double lo = 0.0;
  double hi = 0.0;
  bool log_grid = false;
};

Bounds default_bounds(Target t, double dt);

// Model price with n = trading days to expiry and dt from the context.
double model_price(const OptionQuote& quote, const CalibrationContext& ctx);

// Copy of ctx with the target set to value.
CalibrationContext with_target(const CalibrationContext& ctx, Target t, double value);

struct ImpliedPoint {
  double value = 0.0;     // NaN for holes
  double residual = 0.0;  // ((C_model - C_mkt)/C_mkt)^2 at value
  bool identified = false;
  std::string flag;       // ok, no_bracket, flat, infeasible, invalid_quote
  std::vector<double> roots;  // every refined root, ascending; value is one of them
};

inline constexpr int kScanPoints = 64;

// Scan 64 grid points; sign changes of C_model - C_mkt are refined with TOMS 748
// and the root nearest the context's current value of the target is kept.
// Without a sign change the squared relative error is minimised with Brent
// around the best grid point and the point is flagged no_bracket.
ImpliedPoint implied_point(const OptionQuote& quote, Target target, const CalibrationContext& ctx,
                           std::optional<Bounds> bounds = std::nullopt);

struct SurfacePoint {
  double moneyness = 0.0;
  int days = 0;
  double value = 0.0;
  double residual = 0.0;
  std::string flag;
  bool hole() const { return flag != "ok"; }
};

struct ImpliedSurface {
  std::string parameter;
  std::vector<SurfacePoint> points;  // one per contract, input order
};

ImpliedSurface build_surface(const std::vector<OptionQuote>& quotes, Target target, const CalibrationContext& ctx,
                             std::optional<Bounds> bounds = std::nullopt);

// Black-Scholes implied volatility per contract with T = trading days * dt.
ImpliedSurface bs_surface(const std::vector<OptionQuote>& quotes, double dt = 1.0 / 252.0);

enum class DeviationMode { percent, difference };

// percent: 100 (a - b) / b; difference: a - b. Holes propagate; b = 0 in percent
// mode gives a div_zero hole.
ImpliedSurface deviation_surface(const ImpliedSurface& a, const ImpliedSurface& b, DeviationMode mode);

// Mean squared relative pricing error over the quotes (all with mid > 0).
double chain_rel_mse(const std::vector<OptionQuote>& quotes, const CalibrationContext& ctx);

struct HtcFitOptions {
  int starts = 8;
  std::uint64_t seed = 0;
  opt::NelderMeadOptions nelder_mead{};
};

struct HtcFit {
  HTCParams htc;
  double rel_mse = 0.0;
  bool converged = false;
  std::string warning;
};

// Minimises chain_rel_mse over lambda0 in (1e-8, 1e3], lambda1 in [-1e3, 1e3]
// with multi-start Nelder-Mead (lambda0 searched in log space).
HtcFit fit_htc(const std::vector<OptionQuote>& quotes, const CalibrationContext& fixed, const HtcFitOptions& options = {});

}  // namespace gjr
