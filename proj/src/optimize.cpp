#include "gjr/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include "gjr/errors.hpp"
#include "gjr/rng.hpp"

namespace gjr::opt {

namespace {
double safe_eval(const Objective& f, std::span<const double> x) {
  const double v = f(x);
  return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
}
}  // namespace

NelderMeadResult nelder_mead(const Objective& f, std::vector<double> x0,
                             std::span<const double> step, const NelderMeadOptions& options) {
  const std::size_t d = x0.size();
  if (d == 0) throw InvalidArgument("nelder_mead: empty start point");
  if (step.size() != d) throw InvalidArgument("nelder_mead: step size mismatch");

  std::vector<std::vector<double>> simplex(d + 1, x0);
  for (std::size_t i = 0; i < d; ++i) simplex[i + 1][i] += step[i];
  std::vector<double> fv(d + 1);
  for (std::size_t i = 0; i <= d; ++i) fv[i] = safe_eval(f, simplex[i]);

  std::vector<std::size_t> order(d + 1);
  std::vector<double> centroid(d), xr(d), xe(d), xc(d);
  NelderMeadResult res;

  int it = 0;
  for (; it < options.max_iterations; ++it) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    const std::size_t best = order.front(), worst = order.back(), second = order[d - 1];

    if (std::isfinite(fv[worst]) && fv[worst] - fv[best] <= options.ftol) {
      res.converged = true;
      break;
    }
    if (options.xtol > 0.0) {
      double diam = 0.0;
      for (std::size_t i = 0; i <= d; ++i)
        for (std::size_t j = 0; j < d; ++j) diam = std::max(diam, std::abs(simplex[i][j] - simplex[best][j]));
      if (diam <= options.xtol) {
        res.converged = true;
        break;
      }
    }

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t i = 0; i <= d; ++i) {
      if (i == worst) continue;
      for (std::size_t j = 0; j < d; ++j) centroid[j] += simplex[i][j];
    }
    for (double& c : centroid) c /= static_cast<double>(d);

    for (std::size_t j = 0; j < d; ++j) xr[j] = centroid[j] + (centroid[j] - simplex[worst][j]);
    const double fr = safe_eval(f, xr);
    if (fr < fv[best]) {
      for (std::size_t j = 0; j < d; ++j) xe[j] = centroid[j] + 2.0 * (centroid[j] - simplex[worst][j]);
      const double fe = safe_eval(f, xe);
      if (fe < fr) {
        simplex[worst] = xe;
        fv[worst] = fe;
      } else {
        simplex[worst] = xr;
        fv[worst] = fr;
      }
      continue;
    }
    if (fr < fv[second]) {
      simplex[worst] = xr;
      fv[worst] = fr;
      continue;
    }
    const bool outside = fr < fv[worst];
    for (std::size_t j = 0; j < d; ++j)
      xc[j] = outside ? centroid[j] + 0.5 * (xr[j] - centroid[j])
                      : centroid[j] + 0.5 * (simplex[worst][j] - centroid[j]);
    const double fc = safe_eval(f, xc);
    if (fc < (outside ? fr : fv[worst])) {
      simplex[worst] = xc;
      fv[worst] = fc;
      continue;
    }
    for (std::size_t i = 0; i <= d; ++i) {
      if (i == best) continue;
      for (std::size_t j = 0; j < d; ++j) simplex[i][j] = simplex[best][j] + 0.5 * (simplex[i][j] - simplex[best][j]);
      fv[i] = safe_eval(f, simplex[i]);
    }
  }

  const auto best = static_cast<std::size_t>(std::min_element(fv.begin(), fv.end()) - fv.begin());
  res.x = simplex[best];
  res.value = fv[best];
  res.iterations = it;
  return res;
}

std::vector<std::vector<double>> latin_hypercube(int count, std::span<const double> lower,
                                                 std::span<const double> upper, std::uint64_t seed) {
  if (count < 1) throw InvalidArgument("latin_hypercube: count < 1");
  if (lower.size() != upper.size()) throw InvalidArgument("latin_hypercube: bound size mismatch");
  const std::size_t d = lower.size();
  CounterRng rng(seed, 0x4C4853);
  std::vector<std::vector<double>> pts(static_cast<std::size_t>(count), std::vector<double>(d));
  std::vector<int> perm(static_cast<std::size_t>(count));
  for (std::size_t j = 0; j < d; ++j) {
    std::iota(perm.begin(), perm.end(), 0);
    // Fisher-Yates with our own generator for cross-platform reproducibility.
    for (std::size_t i = perm.size(); i > 1; --i) {
      const auto r = static_cast<std::size_t>(rng.uniform() * static_cast<double>(i));
      std::swap(perm[i - 1], perm[std::min(r, i - 1)]);
    }
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const double u = (perm[i] + rng.uniform()) / count;
      pts[i][j] = lower[j] + u * (upper[j] - lower[j]);
    }
  }
  return pts;
}

ScalarMinimum brent_minimize(const std::function<double(double)>& f, double lo, double hi, int bits,
                             std::uintmax_t max_iter) {
  if (!(lo < hi)) throw InvalidArgument("brent_minimize: empty interval");
  auto g = [&](double x) {
    const double v = f(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::max();
  };
  const auto r = boost::math::tools::brent_find_minima(g, lo, hi, bits, max_iter);
  return {r.first, r.second};
}

double bracketed_root(const std::function<double(double)>& f, double lo, double hi, double flo,
                      double fhi, double xtol, std::uintmax_t max_iter) {
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0.0) == (fhi > 0.0)) throw NoSolution("bracketed_root: no sign change");
  auto tol = [xtol](double a, double b) { return std::abs(b - a) <= xtol; };
  const auto r = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, tol, max_iter);
  return 0.5 * (r.first + r.second);
}

}  // namespace gjr::opt
