#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "rror/linear.hpp"

namespace rror::inference {

// H0: R beta = r with R of full row rank q <= dim(beta). q = dim pins beta
// completely, which is what a significance test on a one-coefficient model needs.
class LinearRestriction {
 public:
  LinearRestriction(Eigen::MatrixXd R, Eigen::VectorXd r);

  const Eigen::MatrixXd& R() const { return R_; }
  const Eigen::VectorXd& r() const { return r_; }
  Eigen::Index q() const { return R_.rows(); }

 private:
  Eigen::MatrixXd R_;
  Eigen::VectorXd r_;
};

// Parses "k2+k3=0.1" style restrictions. Several restrictions are separated by
// ';'. Terms are [coef[*]]name with names k1..kn (1-based) and, for the
// dividend-paying private model, "delta" for the last coefficient.
LinearRestriction parse_restriction(const std::string& expr, Eigen::Index dim,
                                    bool has_delta = false);

// The only design information the tests need. Shared by the public and the
// private model, which have formally identical restricted estimators.
struct CrossProducts {
  Eigen::MatrixXd xtx;
  Eigen::Index periods = 0;
};

CrossProducts cross_products(const Eigen::MatrixXd& X);

// Restricted ML fit
//   beta_* = beta - (X'X)^{-1}R'[R(X'X)^{-1}R']^{-1}(R beta - r),
// with e_*'e_* = e'e + (beta - beta_*)' X'X (beta - beta_*). The residual
// vector is left empty.
LinearFit fit_restricted(const LinearFit& fit, const CrossProducts& xp,
                         const LinearRestriction& restriction);

struct TestReport {
  LinearFit restricted;
  Eigen::Index q = 0;
  Eigen::Index periods = 0;
  Eigen::Index dof = 0;  // T - dim(beta)
  double rss = 0.0;
  double restricted_rss = 0.0;
  double f_stat = 0.0;
  double lr_stat = 0.0;
  double w_stat = 0.0;
  double lm_stat = 0.0;
  std::optional<double> t_stat;  // q == 1 only
  double f_p = 1.0;
  double lr_p = 1.0;
  double w_p = 1.0;
  double lm_p = 1.0;
  std::optional<double> t_p;
};

// F from the RSS difference, LR/W/LM as functions of (e_*'e_* - e'e)/e'e.
// Throws ExactFitError when e'e == 0.
TestReport run_tests(const LinearFit& unrestricted, const LinearFit& restricted,
                     const LinearRestriction& restriction, Eigen::Index periods);

// F written as the quadratic form in (R beta - r); equals the RSS form.
double f_statistic_quadratic(const LinearFit& fit, const LinearRestriction& restriction);

struct TTest {
  double t_stat = 0.0;
  double p_value = 1.0;
};

// t = (beta_i - value) / (s sqrt(((X'X)^{-1})_ii)), two-sided p-value from t(dof).
TTest t_test(const LinearFit& fit, Eigen::Index i, double value);

}  // namespace rror::inference
