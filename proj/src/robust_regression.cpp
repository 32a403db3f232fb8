#include "gjr/robust_regression.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "gjr/errors.hpp"
#include "gjr/stats.hpp"

namespace gjr {

double logistic_weight(double u) {
  const double a = std::abs(u);
  if (a < 1e-8) return 1.0 - a * a / 3.0;
  return std::tanh(a) / a;
}

namespace {

Eigen::VectorXd weighted_solve(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& w) {
  const Eigen::VectorXd sw = w.array().sqrt();
  const Eigen::MatrixXd xw = x.array().colwise() * sw.array();
  const Eigen::VectorXd yw = y.array() * sw.array();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(xw);
  if (qr.rank() < x.cols()) throw DataError("robust_fit: weighted design is rank deficient");
  return qr.solve(yw);
}

}  // namespace

RobustFit robust_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const RobustOptions& options) {
  const auto m = x.rows();
  const auto p = x.cols();
  if (y.size() != m) throw InvalidArgument("robust_fit: design/response size mismatch");
  if (m <= p) throw DataError("robust_fit: need more observations than columns");
  if (!x.allFinite() || !y.allFinite()) throw DataError("robust_fit: non-finite input");
  {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
    if (qr.rank() < p) throw DataError("robust_fit: design has rank " + std::to_string(qr.rank()) + " < " + std::to_string(p));
  }

  RobustFit fit;
  fit.weights = Eigen::VectorXd::Ones(m);
  fit.coef = weighted_solve(x, y, fit.weights);
  fit.residuals = y - x * fit.coef;

  const double yscale = 1.0 + y.cwiseAbs().maxCoeff();
  std::vector<double> r(static_cast<std::size_t>(m));
  for (int it = 1; it <= options.max_iterations; ++it) {
    for (Eigen::Index i = 0; i < m; ++i) r[static_cast<std::size_t>(i)] = fit.residuals[i];
    const double s = stats::mad(r) / 0.6745;
    fit.iterations = it - 1;
    if (!(s > 1e-14 * yscale)) {
      // Exact (or near exact) fit for the bulk of the data.
      fit.scale = s;
      fit.converged = true;
      return fit;
    }
    Eigen::VectorXd w(m);
    for (Eigen::Index i = 0; i < m; ++i) w[i] = logistic_weight(fit.residuals[i] / (options.tuning * s));
    const double change = (w - fit.weights).cwiseAbs().maxCoeff();
    fit.weights = w;
    fit.scale = s;
    fit.coef = weighted_solve(x, y, w);
    fit.residuals = y - x * fit.coef;
    fit.iterations = it;
    if (change < options.weight_tol) {
      fit.converged = true;
      break;
    }
  }
  return fit;
}

RobustFit robust_location(const Eigen::VectorXd& y, const RobustOptions& options) {
  return robust_fit(Eigen::MatrixXd::Ones(y.size(), 1), y, options);
}

}  // namespace gjr
