#include "gjr/gjr_tree.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "gjr/errors.hpp"

namespace gjr {

void require_beta_interior(double beta, double dt, const char* where) {
  if (!std::isfinite(beta) || !(std::abs(beta) * std::sqrt(dt) < 1.0 - 1e-12))
    throw InvalidArgument(std::string(where) + ": |beta| sqrt(dt) must be < 1 (alpha_dt outside (0,1))");
}

double NaturalParams::alpha_dt() const { return 0.5 * (1.0 + beta * std::sqrt(dt)); }

void NaturalParams::validate() const {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw InvalidArgument("NaturalParams: sigma must be >= 0");
  if (!(s0 > 0.0) || !std::isfinite(s0)) throw InvalidArgument("NaturalParams: s0 must be positive");
  if (n < 1) throw InvalidArgument("NaturalParams: n must be >= 1");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("NaturalParams: dt must be positive");
  if (!std::isfinite(mu)) throw InvalidArgument("NaturalParams: mu must be finite");
  require_beta_interior(beta, dt, "NaturalParams");
}

double drift_v(const NaturalParams& p, int k) {
  if (k == 0) return 0.0;
  return k * p.mu + p.sigma * p.beta * (std::sqrt(2.0 * k / std::numbers::pi) - 1.0);
}

double node_price(const NaturalParams& p, int k, int m) {
  return p.s0 * std::exp(drift_v(p, k) * p.dt + m * p.sigma * std::sqrt(p.dt));
}

GjrTree::GjrTree(const NaturalParams& params) : params_(params) {
  params_.validate();
  const int n = params_.n;
  drift_.resize(static_cast<std::size_t>(n));
  for (int k = 1; k <= n; ++k) drift_[static_cast<std::size_t>(k - 1)] = drift_v(params_, k);
  nodes_.resize(index(n, n) + 1);
  for (int k = 0; k <= n; ++k)
    for (int j = 0; j <= k; ++j) nodes_[index(k, j)] = node_price(params_, k, 2 * j - k);
}

double GjrTree::price(int k, int m) const {
  if (k < 0 || k > params_.n) throw InvalidArgument("GjrTree::price: k out of range");
  if (m < -k || m > k || ((m + k) & 1)) throw InvalidArgument("GjrTree::price: level not reachable");
  return nodes_[index(k, (m + k) / 2)];
}

GjrTree build_tree(const NaturalParams& params) { return GjrTree(params); }

std::vector<PricePath> simulate_paths(const GjrTree& tree, int count, std::uint64_t seed) {
  if (count < 1) throw InvalidArgument("simulate_paths: count must be >= 1");
  const auto& p = tree.params();
  const SkewParam alpha(p.alpha_dt());
  std::vector<PricePath> out(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    auto& pp = out[static_cast<std::size_t>(i)];
    pp.walk = skew_walk_path(alpha, p.n, seed, static_cast<std::uint64_t>(i));
    pp.prices.resize(pp.walk.steps.size());
    for (int k = 0; k <= p.n; ++k) pp.prices[static_cast<std::size_t>(k)] = tree.price(k, pp.walk.steps[static_cast<std::size_t>(k)]);
  }
  return out;
}

ReturnMoments return_moments(const NaturalParams& p, int k) {
  if (k < 1 || k > p.n) throw InvalidArgument("return_moments: k must be in [1, n]");
  return {p.mu * k * p.dt + p.sigma * p.beta * std::sqrt(2.0 * k / std::numbers::pi) * p.dt,
          p.sigma * p.sigma * k * p.dt};
}

ReturnMoments exact_return_moments(const NaturalParams& p, int k) {
  if (k < 1 || k > p.n) throw InvalidArgument("exact_return_moments: k must be in [1, n]");
  const double em = skew_walk_mean(SkewParam(p.alpha_dt()), k);
  const double sd = p.sigma * std::sqrt(p.dt);
  return {drift_v(p, k) * p.dt + sd * em, sd * sd * (k - em * em)};
}

}  // namespace gjr
