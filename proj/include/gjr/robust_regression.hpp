#pragma once

#include <Eigen/Dense>

namespace gjr {

// Iteratively reweighted least squares with logistic weights
// w(u) = tanh(u)/u, u = r / (tuning * MAD(r)/0.6745).
struct RobustOptions {
  double tuning = 1.205;
  double weight_tol = 1e-8;
  int max_iterations = 50;
};

struct RobustFit {
  Eigen::VectorXd coef;
  Eigen::VectorXd residuals;
  Eigen::VectorXd weights;  // weights of the final weighted solve
  double scale = 0.0;       // robust residual scale used for those weights
  int iterations = 0;
  bool converged = false;
};

// Throws DataError when the design is rank deficient.
RobustFit robust_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const RobustOptions& options = {});

// Robust location: robust_fit with a single intercept column.
RobustFit robust_location(const Eigen::VectorXd& y, const RobustOptions& options = {});

double logistic_weight(double u);

}  // namespace gjr
