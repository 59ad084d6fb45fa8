#pragma once

#include <Eigen/Dense>
#include <optional>

#include "rror/data.hpp"
#include "rror/linear.hpp"

namespace rror::private_valuation {

// b = X beta + u with X = [C : -Delta], beta = (k', delta)' for a
// dividend-paying company and X = C, beta = k otherwise.
struct PrivateDesign {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  bool paying = false;
  Eigen::Index num_covariates = 0;
};

PrivateDesign build_private_design(const PrivateObservationSet& obs);

struct PrivateFit {
  LinearFit fit;
  Eigen::VectorXd k;             // required-rate coefficients
  std::optional<double> delta;   // book-to-price ratio (paying only)
  std::optional<double> m;       // price-to-book 1/delta, only when delta > 0
  bool delta_nonpositive = false;
};

PrivateFit fit_private(const PrivateDesign& design);

// Two-step form of the paying estimator:
//   delta = -Delta' M_C b / (Delta' M_C Delta),  k = (C'C)^{-1} C'(delta Delta + b).
struct Decomposition {
  Eigen::VectorXd k;
  double delta = 0.0;
};
Decomposition decompose_paying(const PrivateDesign& design);

// Theoretical equity value m_hat * B = B / delta_hat.
double value_company(const PrivateFit& fit, double book_value);

}  // namespace rror::private_valuation
