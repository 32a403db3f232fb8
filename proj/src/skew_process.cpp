#include "gjr/skew_process.hpp"

#include <cmath>
#include <mutex>
#include <numbers>
#include <sstream>

#include "gjr/errors.hpp"
#include "gjr/rng.hpp"

namespace gjr {

namespace {
constexpr double kPi = std::numbers::pi;

void require_time(double t, const char* fn) {
  if (!(t > 0.0) || !std::isfinite(t)) throw InvalidArgument(std::string(fn) + ": t must be positive");
}

void require_walk_alpha(SkewParam a, const char* fn) {
  if (!(a.value() > 0.0 && a.value() < 1.0))
    throw InvalidArgument(std::string(fn) + ": walk requires 0 < alpha < 1");
}
}  // namespace

SkewParam::SkewParam(double alpha) : alpha_(alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidArgument("SkewParam: alpha outside [0,1]");
}

std::vector<double> sbm_sample(SkewParam alpha, double t, int count, std::uint64_t seed) {
  require_time(t, "sbm_sample");
  if (count < 1) throw InvalidArgument("sbm_sample: count must be >= 1");
  CounterRng rng(seed);
  const double st = std::sqrt(t);
  std::vector<double> out(static_cast<std::size_t>(count));
  for (auto& x : out) {
    const double z = std::abs(rng.normal()) * st;
    x = rng.uniform() < alpha.value() ? z : -z;
  }
  return out;
}

SbmMoments sbm_moments(SkewParam alpha, double t) {
  require_time(t, "sbm_moments");
  const double b = alpha.bias();
  const double b2 = b * b;
  const double den = kPi - 2.0 * b2;
  SbmMoments m;
  m.t = t;
  m.mean = b * std::sqrt(2.0 * t / kPi);
  m.variance = (1.0 - 2.0 * b2 / kPi) * t;
  m.skewness = std::numbers::sqrt2 * b * (4.0 * b2 - kPi) / std::pow(den, 1.5);
  m.excess_kurtosis = (8.0 * kPi * b2 - 24.0 * b2 * b2) / (den * den);
  return m;
}

double sbm_cdf(SkewParam alpha, double t, double x) {
  require_time(t, "sbm_cdf");
  const double a = alpha.value();
  const double z = std::abs(x) / std::sqrt(2.0 * t);
  if (x >= 0.0) return (1.0 - a) + a * std::erf(z);
  return (1.0 - a) * std::erfc(z);
}

double sbm_pdf(SkewParam alpha, double t, double x) {
  require_time(t, "sbm_pdf");
  const double w = x >= 0.0 ? alpha.value() : 1.0 - alpha.value();
  return 2.0 * w * std::exp(-x * x / (2.0 * t)) / std::sqrt(2.0 * kPi * t);
}

int skew_walk_step(SkewParam alpha, int state, double u) {
  require_walk_alpha(alpha, "skew_walk_step");
  const double p = state == 0 ? alpha.value() : 0.5;
  return u < p ? 1 : -1;
}

SkewPath skew_walk_path(SkewParam alpha, int n, std::uint64_t seed, std::uint64_t stream) {
  require_walk_alpha(alpha, "skew_walk_path");
  if (n < 1) throw InvalidArgument("skew_walk_path: n must be >= 1");
  SkewPath path;
  path.alpha = alpha.value();
  path.seed = seed;
  path.stream = stream;
  path.steps.resize(static_cast<std::size_t>(n) + 1);
  CounterRng rng(seed, stream);
  int m = 0;
  path.steps[0] = 0;
  for (int k = 1; k <= n; ++k) {
    m += skew_walk_step(alpha, m, rng.uniform());
    path.steps[static_cast<std::size_t>(k)] = m;
  }
  return path;
}

std::vector<double> skew_walk_distribution(SkewParam alpha, int n) {
  require_walk_alpha(alpha, "skew_walk_distribution");
  if (n < 0) throw InvalidArgument("skew_walk_distribution: n must be >= 0");
  const auto width = static_cast<std::size_t>(2 * n + 1);
  std::vector<double> p(width, 0.0), next(width, 0.0);
  p[static_cast<std::size_t>(n)] = 1.0;
  for (int k = 0; k < n; ++k) {
    std::fill(next.begin(), next.end(), 0.0);
    for (int m = -k; m <= k; m += 2) {
      const double w = p[static_cast<std::size_t>(m + n)];
      if (w == 0.0) continue;
      const double up = m == 0 ? alpha.value() : 0.5;
      next[static_cast<std::size_t>(m + 1 + n)] += w * up;
      next[static_cast<std::size_t>(m - 1 + n)] += w * (1.0 - up);
    }
    p.swap(next);
  }
  return p;
}

double skew_walk_mean(SkewParam alpha, int k) {
  if (k < 0) throw InvalidArgument("skew_walk_mean: k must be >= 0");
  // P(M_j = 0) = C(j, j/2) 2^-j for even j.
  double visits = 0.0;
  double p0 = 1.0;
  for (int j = 0; j < k; j += 2) {
    visits += p0;
    p0 *= static_cast<double>(j + 1) / static_cast<double>(j + 2);
  }
  return alpha.bias() * visits;
}

double student_t_density(double x, double kappa) {
  if (!(kappa > 0.0)) throw InvalidArgument("student_t_density: kappa must be positive");
  const double c = std::lgamma(0.5 * (kappa + 1.0)) - std::lgamma(0.5 * kappa) - 0.5 * std::log(kappa * kPi);
  return std::exp(c - 0.5 * (kappa + 1.0) * std::log1p(x * x / kappa));
}

namespace {

std::map<std::string, HFunction::Factory>& registry() {
  static std::map<std::string, HFunction::Factory> r = [] {
    std::map<std::string, HFunction::Factory> m;
    m["constant"] = [](const std::vector<double>& p) {
      if (p.size() != 1) throw ConfigError("h constant: expects one value, e.g. constant:1");
      const double c = p[0];
      return HFunction("constant:" + std::to_string(c), [c](double) { return c; });
    };
    m["identity"] = [](const std::vector<double>& p) {
      if (!p.empty()) throw ConfigError("h identity: takes no parameters");
      return HFunction("identity", [](double x) { return x; });
    };
    m["indicator"] = [](const std::vector<double>& p) {
      if (p.size() != 2 || !(p[0] <= p[1])) throw ConfigError("h indicator: expects indicator:a:b with a <= b");
      const double a = p[0], b = p[1];
      return HFunction("indicator:" + std::to_string(a) + ":" + std::to_string(b),
                       [a, b](double x) { return (x >= a && x <= b) ? 1.0 : 0.0; });
    };
    m["student_t"] = [](const std::vector<double>& p) {
      if (p.size() != 1 || !(p[0] > 0.0)) throw ConfigError("h student_t: expects student_t:kappa with kappa > 0");
      const double kappa = p[0];
      const double c = std::lgamma(0.5 * (kappa + 1.0)) - std::lgamma(0.5 * kappa) - 0.5 * std::log(kappa * kPi);
      return HFunction("student_t:" + std::to_string(kappa),
                       [kappa, c](double x) { return std::exp(c - 0.5 * (kappa + 1.0) * std::log1p(x * x / kappa)); });
    };
    return m;
  }();
  return r;
}

std::mutex& registry_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

void HFunction::register_family(const std::string& name, Factory factory) {
  std::lock_guard lock(registry_mutex());
  registry()[name] = std::move(factory);
}

HFunction HFunction::from_id(const std::string& id) {
  std::vector<std::string> parts;
  std::stringstream ss(id);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(item);
  if (parts.empty()) throw ConfigError("h function: empty identifier");
  std::vector<double> params;
  for (std::size_t i = 1; i < parts.size(); ++i) {
    try {
      std::size_t used = 0;
      params.push_back(std::stod(parts[i], &used));
      if (used != parts[i].size()) throw std::invalid_argument(parts[i]);
    } catch (const std::exception&) {
      throw ConfigError("h function: bad parameter '" + parts[i] + "' in '" + id + "'");
    }
  }
  Factory factory;
  {
    std::lock_guard lock(registry_mutex());
    auto it = registry().find(parts[0]);
    if (it == registry().end()) throw ConfigError("h function: unknown identifier '" + id + "'");
    factory = it->second;
  }
  return factory(params);
}

CsyipPair csyip_build(const SkewPath& path, const HFunction& h, double horizon) {
  if (path.steps.size() < 2) throw InvalidArgument("csyip_build: path needs at least one step");
  if (path.steps.front() != 0) throw InvalidArgument("csyip_build: path must start at 0");
  if (!(horizon > 0.0)) throw InvalidArgument("csyip_build: horizon must be positive");
  const std::size_t n = path.steps.size() - 1;
  const double scale = std::sqrt(horizon / static_cast<double>(n));
  CsyipPair out;
  out.h_id = h.id();
  out.b_path.assign(n + 1, 0.0);
  out.c_path.assign(n + 1, 0.0);
  out.b_increments.resize(n);
  for (std::size_t k = 1; k <= n; ++k) {
    const int dm = path.steps[k] - path.steps[k - 1];
    if (dm != 1 && dm != -1) throw InvalidArgument("csyip_build: path increments must be +-1");
    const double db = scale * dm;
    out.b_increments[k - 1] = db;
    out.b_path[k] = out.b_path[k - 1] + db;
    out.c_path[k] = out.c_path[k - 1] + h(out.b_path[k - 1]) * db;
  }
  return out;
}

CsyipPair csyip_build(const SkewPath& path, const std::string& h_id, double horizon) {
  return csyip_build(path, HFunction::from_id(h_id), horizon);
}

std::vector<double> azzalini_sample(double delta, double t, int count, std::uint64_t seed) {
  if (!(std::abs(delta) < 1.0)) throw InvalidArgument("azzalini_sample: |delta| must be < 1");
  require_time(t, "azzalini_sample");
  if (count < 1) throw InvalidArgument("azzalini_sample: count must be >= 1");
  CounterRng rng(seed);
  const double st = std::sqrt(t);
  const double c = std::sqrt(1.0 - delta * delta);
  std::vector<double> out(static_cast<std::size_t>(count));
  for (auto& x : out) {
    const double z1 = rng.normal();
    const double z2 = rng.normal();
    x = st * (c * z1 + delta * std::abs(z2));
  }
  return out;
}

}  // namespace gjr
