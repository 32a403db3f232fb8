#pragma once

#include <cstdint>
#include <vector>

#include "gjr/skew_process.hpp"

namespace gjr {

struct NaturalParams {
  double mu = 0.0;
  double sigma = 0.2;
  double beta = 0.0;
  double dt = 1.0 / 252.0;
  int n = 252;
  double s0 = 100.0;

  double alpha_dt() const;
  double horizon() const { return n * dt; }
  // Throws InvalidArgument when an invariant fails.
  void validate() const;
};

// Throws unless |beta| sqrt(dt) < 1 - 1e-12.
void require_beta_interior(double beta, double dt, const char* where);

// v_k = k mu + sigma beta (sqrt(2k/pi) - 1) for k >= 1; v_0 = 0 so the root is s0.
double drift_v(const NaturalParams& p, int k);

class GjrTree {
 public:
  explicit GjrTree(const NaturalParams& params);

  const NaturalParams& params() const { return params_; }
  int steps() const { return params_.n; }
  // Node at time k with walk level m in {-k, -k+2, ..., k}.
  double price(int k, int m) const;
  // Level index j = (m + k)/2 in 0..k.
  double price_at(int k, int j) const { return nodes_[index(k, j)]; }
  const std::vector<double>& drift_seq() const { return drift_; }  // v_1..v_n
  std::size_t node_count() const { return nodes_.size(); }

  static std::size_t index(int k, int j) {
    return static_cast<std::size_t>(k) * static_cast<std::size_t>(k + 1) / 2 + static_cast<std::size_t>(j);
  }

 private:
  NaturalParams params_;
  std::vector<double> drift_;
  std::vector<double> nodes_;
};

GjrTree build_tree(const NaturalParams& params);

// Node-formula price for one (k, M) without building the lattice.
double node_price(const NaturalParams& p, int k, int m);

struct PricePath {
  SkewPath walk;
  std::vector<double> prices;  // S_0..S_n
};

// Path i uses walk stream i of the seed.
std::vector<PricePath> simulate_paths(const GjrTree& tree, int count, std::uint64_t seed);

struct ReturnMoments {
  double mean = 0.0;
  double variance = 0.0;
};

// Closed-form leading-order moments of R_k = ln(S_k/S_0).
ReturnMoments return_moments(const NaturalParams& p, int k);
// Exact moments of R_k on the lattice, using E[M_k] from skew_walk_mean and E[M_k^2] = k.
ReturnMoments exact_return_moments(const NaturalParams& p, int k);

}  // namespace gjr
