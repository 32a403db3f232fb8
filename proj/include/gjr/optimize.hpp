#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace gjr::opt {

using Objective = std::function<double(std::span<const double>)>;

struct NelderMeadOptions {
  int max_iterations = 500;
  double ftol = 1e-10;  // stop when f_worst - f_best <= ftol
  double xtol = 0.0;    // optional simplex-diameter stop
};

struct NelderMeadResult {
  std::vector<double> x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Non-finite objective values are treated as +inf.
NelderMeadResult nelder_mead(const Objective& f, std::vector<double> x0,
                             std::span<const double> step,
                             const NelderMeadOptions& options = {});

// count points in the box [lower, upper]; one stratum per point per axis.
std::vector<std::vector<double>> latin_hypercube(int count, std::span<const double> lower,
                                                 std::span<const double> upper,
                                                 std::uint64_t seed);

struct ScalarMinimum {
  double x = 0.0;
  double value = 0.0;
};

// Brent minimisation on [lo, hi] (Boost.Math), bits ~ -log2(relative tol).
ScalarMinimum brent_minimize(const std::function<double(double)>& f, double lo, double hi,
                             int bits = 40, std::uintmax_t max_iter = 200);

// Root of f on [lo, hi] given f(lo), f(hi) of opposite sign (TOMS 748).
double bracketed_root(const std::function<double(double)>& f, double lo, double hi,
                      double flo, double fhi, double xtol, std::uintmax_t max_iter = 200);

}  // namespace gjr::opt
