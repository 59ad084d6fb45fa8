#include "rror/private_valuation.hpp"

#include "rror/error.hpp"

namespace rror::private_valuation {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

PrivateDesign build_private_design(const PrivateObservationSet& obs) {
  PrivateDesign design;
  design.paying = obs.paying();
  design.num_covariates = obs.num_covariates();
  design.y = obs.book_growth();
  const Index T = obs.periods();
  const Index n = obs.num_covariates();
  if (obs.paying()) {
    if ((obs.div_to_book().array() == 0.0).all())
      throw EstimationError("dividend-to-book ratios are all zero: delta is not identified");
    design.X.resize(T, n + 1);
    design.X.leftCols(n) = obs.covariates();
    design.X.col(n) = -obs.div_to_book();
  } else {
    design.X = obs.covariates();
  }
  return design;
}

PrivateFit fit_private(const PrivateDesign& design) {
  PrivateFit out;
  out.fit = fit_least_squares(design.X, design.y);
  const Index n = design.num_covariates;
  out.k = out.fit.coeffs.head(n);
  if (design.paying) {
    out.delta = out.fit.coeffs(n);
    if (*out.delta > 0.0) {
      out.m = 1.0 / *out.delta;
    } else {
      out.delta_nonpositive = true;
    }
  }
  return out;
}

Decomposition decompose_paying(const PrivateDesign& design) {
  if (!design.paying) throw InputError("decomposition applies to the dividend-paying model");
  const Index n = design.num_covariates;
  const MatrixXd C = design.X.leftCols(n);
  const VectorXd Delta = -design.X.col(n);
  const VectorXd& b = design.y;
  const auto qr = C.colPivHouseholderQr();
  if (qr.rank() < n) throw SingularDesignError("covariate matrix C is rank deficient");
  // M_C v = v - C (C'C)^{-1} C' v
  const VectorXd mc_delta = Delta - C * qr.solve(Delta);
  const VectorXd mc_b = b - C * qr.solve(b);
  // Delta' M_C Delta = |M_C Delta|^2; the squared form has no first-order
  // rounding term, so the relative rank cutoff applies cleanly.
  const double denom = mc_delta.squaredNorm();
  if (!(denom > kRankTolerance * kRankTolerance * Delta.squaredNorm()))
    throw SingularDesignError("Delta lies in the covariate span");
  Decomposition out;
  out.delta = -Delta.dot(mc_b) / denom;
  out.k = qr.solve(VectorXd(out.delta * Delta + b));
  return out;
}

double value_company(const PrivateFit& fit, double book_value) {
  if (!fit.delta) throw InputError("valuation needs a dividend-paying fit");
  if (!(*fit.delta > 0.0))
    throw EstimationError("valuation undefined: estimated book-to-price ratio is not positive");
  return book_value / *fit.delta;
}

}  // namespace rror::private_valuation
