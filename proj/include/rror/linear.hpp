#pragma once

#include <Eigen/Dense>

namespace rror {

// Result of any of the Gaussian linear regressions y = X beta + u.
struct LinearFit {
  Eigen::VectorXd coeffs;
  Eigen::VectorXd residuals;  // empty for restricted fits built from cross-products
  double rss = 0.0;
  double sigma2_ml = 0.0;        // e'e / T
  double sigma2_unbiased = 0.0;  // e'e / dof
  Eigen::MatrixXd xtx_inv;       // (X'X)^{-1}
  Eigen::MatrixXd coeff_cov;     // s^2 (X'X)^{-1}
  Eigen::Index dof = 0;
  Eigen::Index periods = 0;

  Eigen::Index dim() const { return coeffs.size(); }
};

// Relative singular-value cutoff used for rank detection.
inline constexpr double kRankTolerance = 1e-10;

// Least squares through an SVD of the column-equilibrated design; X'X is never
// formed or inverted. Throws SingularDesignError naming the dependent columns.
LinearFit fit_least_squares(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

// sqrt(s^2 ((X'X)^{-1})_ii) for every coefficient.
Eigen::VectorXd standard_errors(const LinearFit& fit);

}  // namespace rror
