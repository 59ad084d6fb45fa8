#include "rror/distributions.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <numbers>

#include "rror/error.hpp"

namespace rror::dist {

namespace bm = boost::math;

namespace {
void require_dof(double dof) {
  if (!(dof > 0.0)) throw InputError("degrees of freedom must be positive");
}
void require_prob(double p) {
  if (!(p > 0.0 && p < 1.0)) throw InputError("probability must lie in (0, 1)");
}
}  // namespace

double normal_pdf(double x, double mean, double sd) {
  return std::exp(normal_log_pdf(x, mean, sd));
}

double normal_log_pdf(double x, double mean, double sd) {
  const double z = (x - mean) / sd;
  return -0.5 * z * z - std::log(sd) - 0.5 * std::log(2.0 * std::numbers::pi);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_quantile(double p) {
  require_prob(p);
  return bm::quantile(bm::normal_distribution<>(), p);
}

double student_t_cdf(double x, double dof) {
  require_dof(dof);
  return bm::cdf(bm::students_t_distribution<>(dof), x);
}

double student_t_quantile(double p, double dof) {
  require_dof(dof);
  require_prob(p);
  return bm::quantile(bm::students_t_distribution<>(dof), p);
}

double student_t_two_sided_p(double t, double dof) {
  require_dof(dof);
  return 2.0 * bm::cdf(bm::complement(bm::students_t_distribution<>(dof), std::abs(t)));
}

double f_upper_tail(double x, double dof1, double dof2) {
  require_dof(dof1);
  require_dof(dof2);
  if (x <= 0.0) return 1.0;
  return bm::cdf(bm::complement(bm::fisher_f_distribution<>(dof1, dof2), x));
}

double f_quantile(double p, double dof1, double dof2) {
  require_dof(dof1);
  require_dof(dof2);
  require_prob(p);
  return bm::quantile(bm::fisher_f_distribution<>(dof1, dof2), p);
}

double chi2_cdf(double x, double dof) {
  require_dof(dof);
  if (x <= 0.0) return 0.0;
  return bm::cdf(bm::chi_squared_distribution<>(dof), x);
}

double chi2_upper_tail(double x, double dof) {
  require_dof(dof);
  if (x <= 0.0) return 1.0;
  return bm::cdf(bm::complement(bm::chi_squared_distribution<>(dof), x));
}

double chi2_quantile(double p, double dof) {
  require_dof(dof);
  require_prob(p);
  return bm::quantile(bm::chi_squared_distribution<>(dof), p);
}

}  // namespace rror::dist
