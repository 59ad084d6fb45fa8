#pragma once

// Reference distributions for the test statistics. Thin wrappers over
// Boost.Math so that callers never see boost types or policies.

namespace rror::dist {

double normal_pdf(double x, double mean, double sd);
double normal_log_pdf(double x, double mean, double sd);
double normal_cdf(double x);
double normal_quantile(double p);

double student_t_cdf(double x, double dof);
double student_t_quantile(double p, double dof);
// P(|T| > |t|) for T ~ t(dof).
double student_t_two_sided_p(double t, double dof);

double f_upper_tail(double x, double dof1, double dof2);
double f_quantile(double p, double dof1, double dof2);

double chi2_cdf(double x, double dof);
double chi2_upper_tail(double x, double dof);
double chi2_quantile(double p, double dof);

}  // namespace rror::dist
