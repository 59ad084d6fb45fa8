#include "rror/ddm.hpp"

#include <cmath>

#include "rror/distributions.hpp"
#include "rror/error.hpp"

namespace rror::ddm {

using Eigen::Index;

DdmDesign build_design(const ObservationSet& obs) {
  const Index T = obs.periods();
  const auto& p = obs.prices();
  DdmDesign design;
  design.p_lag = p.head(T);
  design.y = p.tail(T) + obs.dividends() - design.p_lag;
  design.X = design.p_lag.asDiagonal() * obs.covariates();
  return design;
}

LinearFit fit_ml(const DdmDesign& design) { return fit_least_squares(design.X, design.y); }

std::vector<Index> nonpositive_rate_periods(const ObservationSet& obs, const LinearFit& fit) {
  std::vector<Index> out;
  const Eigen::VectorXd rates = obs.covariates() * fit.coeffs;
  for (Index t = 0; t < rates.size(); ++t)
    if (rates(t) <= 0.0) out.push_back(t + 1);
  return out;
}

std::pair<double, double> confidence_interval(const LinearFit& fit, Index i, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("alpha must lie in (0, 1)");
  if (i < 0 || i >= fit.dim()) throw InputError("coefficient index out of range");
  const double se = std::sqrt(std::max(fit.coeff_cov(i, i), 0.0));
  const double q = dist::student_t_quantile(1.0 - alpha / 2.0, static_cast<double>(fit.dof));
  const double centre = fit.coeffs(i);
  return {centre - q * se, centre + q * se};
}

}  // namespace rror::ddm
