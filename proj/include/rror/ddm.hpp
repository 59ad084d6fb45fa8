#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "rror/data.hpp"
#include "rror/linear.hpp"

namespace rror::ddm {

// Regression form of the stochastic dividend discount model
//   P_t + d_t - P_{t-1} = (c_t' k) P_{t-1} + u_t,
// i.e. y = X k + u with row t of X equal to c_t' P_{t-1}.
struct DdmDesign {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  Eigen::VectorXd p_lag;
};

DdmDesign build_design(const ObservationSet& obs);

// Unrestricted ML fit: k_hat solves the normal equations, sigma2_ml = e'e/T.
LinearFit fit_ml(const DdmDesign& design);

// Periods (1-based) whose fitted required rate c_t' k_hat is not positive.
// Reported as a diagnostic only; the fit itself is unconstrained.
std::vector<Eigen::Index> nonpositive_rate_periods(const ObservationSet& obs,
                                                   const LinearFit& fit);

// k_hat_i -/+ t_{1-alpha/2}(dof) se_i.
std::pair<double, double> confidence_interval(const LinearFit& fit, Eigen::Index i,
                                              double alpha);

}  // namespace rror::ddm
