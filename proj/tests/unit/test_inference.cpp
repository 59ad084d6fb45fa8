#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "rror/ddm.hpp"
#include "rror/distributions.hpp"
#include "rror/error.hpp"
#include "rror/inference.hpp"
#include "rror/rng.hpp"
#include "rror/simulate.hpp"

using namespace rror;
using namespace rror::inference;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

ddm::DdmDesign simulated_design(const VectorXd& k, Eigen::Index T, std::uint64_t seed) {
  simulate::SimConfig cfg;
  cfg.family = simulate::Family::PublicDdm;
  cfg.periods = T;
  cfg.seed = seed;
  cfg.k = k;
  cfg.sigma = 8.4;
  cfg.initial_price = 1000.0;
  return ddm::build_design(*simulate::simulate(cfg).public_obs);
}

struct Study {
  LinearFit fit;
  TestReport rep;
};

Study test_k2_zero(const VectorXd& k, Eigen::Index T, std::uint64_t seed) {
  const auto des = simulated_design(k, T, seed);
  Study s;
  s.fit = ddm::fit_ml(des);
  const auto restr = parse_restriction("k2=0", k.size());
  const auto restricted = fit_restricted(s.fit, cross_products(des.X), restr);
  s.rep = run_tests(s.fit, restricted, restr, T);
  return s;
}

LinearFit manual_fit(double rss, Eigen::Index T) {
  LinearFit f;
  f.coeffs = VectorXd::Constant(1, 0.5);
  f.rss = rss;
  f.periods = T;
  f.dof = T - 1;
  f.sigma2_ml = rss / T;
  f.sigma2_unbiased = rss / (T - 1);
  f.xtx_inv = MatrixXd::Constant(1, 1, 0.01);
  f.coeff_cov = f.sigma2_unbiased * f.xtx_inv;
  return f;
}

}  // namespace

TEST_CASE("restriction parsing") {
  auto a = parse_restriction("k2+k3=0.1", 3);
  CHECK(a.q() == 1);
  CHECK(a.R()(0, 0) == 0.0);
  CHECK(a.R()(0, 1) == 1.0);
  CHECK(a.R()(0, 2) == 1.0);
  CHECK(a.r()(0) == 0.1);

  auto b = parse_restriction(" 2*k1 - 0.5k2 = -1 ; k3 = 0 ", 3);
  CHECK(b.q() == 2);
  CHECK(b.R()(0, 0) == 2.0);
  CHECK(b.R()(0, 1) == -0.5);
  CHECK(b.r()(0) == -1.0);
  CHECK(b.R()(1, 2) == 1.0);

  auto c = parse_restriction("delta=0.5", 3, true);
  CHECK(c.R()(0, 2) == 1.0);
  CHECK(c.r()(0) == 0.5);

  CHECK(parse_restriction("k1=0", 1).q() == 1);

  CHECK_THROWS_AS(parse_restriction("k4=0", 3), InputError);
  CHECK_THROWS_AS(parse_restriction("delta=1", 3), InputError);
  CHECK_THROWS_AS(parse_restriction("k3=1", 3, true), InputError);
  CHECK_THROWS_AS(parse_restriction("k1", 3), InputError);
  CHECK_THROWS_AS(parse_restriction("k1=0;k1=1", 3), InputError);
  CHECK_THROWS_AS(parse_restriction("k1=0;k2=0", 1), InputError);
  CHECK_THROWS_AS(parse_restriction("", 3), InputError);
  CHECK_THROWS_AS(parse_restriction("k1=0 x", 3), InputError);
}

TEST_CASE("restriction already satisfied at the optimum") {
  VectorXd k(2);
  k << 0.025, 0.01;
  const auto des = simulated_design(k, 80, 1);
  const auto fit = ddm::fit_ml(des);
  MatrixXd R(1, 2);
  R << 0, 1;
  const LinearRestriction restr(R, VectorXd::Constant(1, fit.coeffs(1)));
  const auto restricted = fit_restricted(fit, cross_products(des.X), restr);
  CHECK((restricted.coeffs - fit.coeffs).norm() < 1e-14);
  CHECK(restricted.rss == doctest::Approx(fit.rss).epsilon(1e-12));
  const auto rep = run_tests(fit, restricted, restr, 80);
  CHECK(rep.f_stat < 1e-20);
  CHECK(rep.lr_stat < 1e-20);
  CHECK(rep.w_stat < 1e-20);
  CHECK(rep.lm_stat < 1e-20);
  CHECK(rep.f_p == doctest::Approx(1.0));
  CHECK(rep.lr_p == doctest::Approx(1.0));
  CHECK(*rep.t_p == doctest::Approx(1.0));
  const auto t = t_test(fit, 1, fit.coeffs(1));
  CHECK(t.t_stat == 0.0);
  CHECK(t.p_value == doctest::Approx(1.0));
}

TEST_CASE("k = 0 on the constant-k model leaves y'y") {
  const auto des = simulated_design(VectorXd::Constant(1, 0.025), 60, 2);
  const auto fit = ddm::fit_ml(des);
  const auto restr = parse_restriction("k1=0", 1);
  const auto restricted = fit_restricted(fit, cross_products(des.X), restr);
  CHECK(std::abs(restricted.coeffs(0)) < 1e-15);
  CHECK(restricted.rss == doctest::Approx(des.y.squaredNorm()).epsilon(1e-10));
}

TEST_CASE("restricted fit matches direct elimination") {
  RandomStream rng(9);
  for (int rep = 0; rep < 40; ++rep) {
    const int T = 20 + rep;
    MatrixXd X(T, 3);
    VectorXd y(T);
    for (int t = 0; t < T; ++t) {
      X.row(t) << 1.0 + rng.uniform(), rng.normal(), rng.normal();
      y(t) = X.row(t).dot(Eigen::Vector3d(0.3, 0.04, 0.07)) + rng.normal();
    }
    const auto fit = fit_least_squares(X, y);
    const auto restr = parse_restriction("k2+k3=0.1", 3);
    const auto restricted = fit_restricted(fit, cross_products(X), restr);

    // k3 = 0.1 - k2: y - 0.1 x3 = k1 x1 + k2 (x2 - x3).
    MatrixXd Z(T, 2);
    Z.col(0) = X.col(0);
    Z.col(1) = X.col(1) - X.col(2);
    const VectorXd g = Z.colPivHouseholderQr().solve(y - 0.1 * X.col(2));
    const Eigen::Vector3d oracle(g(0), g(1), 0.1 - g(1));
    CHECK((restricted.coeffs - oracle).norm() < 1e-10 * oracle.norm());
    CHECK(std::abs(restricted.coeffs(1) + restricted.coeffs(2) - 0.1) < 1e-10);
    const double rss_oracle = (y - X * oracle).squaredNorm();
    CHECK(restricted.rss == doctest::Approx(rss_oracle).epsilon(1e-10));
    CHECK(restricted.rss - fit.rss >= -1e-12);
  }
}

TEST_CASE("multi-row restrictions hold exactly") {
  RandomStream rng(10);
  for (int rep = 0; rep < 40; ++rep) {
    const int T = 30;
    MatrixXd X(T, 4);
    VectorXd y(T);
    for (int t = 0; t < T; ++t) {
      for (int j = 0; j < 4; ++j) X(t, j) = rng.normal() * (1 + j);
      y(t) = rng.normal();
    }
    const auto fit = fit_least_squares(X, y);
    MatrixXd R(2, 4);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 4; ++j) R(i, j) = rng.normal();
    const VectorXd r = VectorXd::Random(2);
    const LinearRestriction restr(R, r);
    const auto restricted = fit_restricted(fit, cross_products(X), restr);
    CHECK((R * restricted.coeffs - r).cwiseAbs().maxCoeff() < 1e-10);
    // e*'e* = e'e + (b - b*)' X'X (b - b*) and it equals the direct residual norm.
    CHECK(restricted.rss == doctest::Approx((y - X * restricted.coeffs).squaredNorm()).epsilon(1e-10));
    const auto rep_ = run_tests(fit, restricted, restr, T);
    CHECK(rep_.f_stat == doctest::Approx(f_statistic_quadratic(fit, restr)).epsilon(1e-8));
    CHECK(rep_.w_stat >= rep_.lr_stat);
    CHECK(rep_.lr_stat >= rep_.lm_stat);
    CHECK_FALSE(rep_.t_stat.has_value());
  }
}

TEST_CASE("statistics from a given RSS ratio") {
  const auto u = manual_fit(1.0, 100);
  auto r = manual_fit(1.1, 100);
  r.dof = 100;
  const LinearRestriction restr(MatrixXd::Constant(1, 1, 1.0), VectorXd::Constant(1, 0.0));
  const auto rep = run_tests(u, r, restr, 100);
  CHECK(rep.w_stat == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(rep.lr_stat == doctest::Approx(100 * std::log(1.1)).epsilon(1e-12));
  CHECK(rep.lm_stat == doctest::Approx(100 * 0.1 / 1.1).epsilon(1e-12));
  CHECK(rep.f_stat == doctest::Approx(0.1 * 99).epsilon(1e-12));
  CHECK(rep.lr_p == doctest::Approx(dist::chi2_upper_tail(rep.lr_stat, 1)));
  CHECK(rep.f_p == doctest::Approx(dist::f_upper_tail(rep.f_stat, 1, 99)));

  CHECK_THROWS_AS(run_tests(manual_fit(0.0, 100), r, restr, 100), ExactFitError);
  auto exact = manual_fit(0.0, 100);
  exact.coeff_cov.setZero();
  CHECK_THROWS_AS(t_test(exact, 0, 0.0), ExactFitError);
}

TEST_CASE("single restriction: F equals t squared") {
  RandomStream rng(12);
  for (int rep = 0; rep < 30; ++rep) {
    VectorXd k(3);
    k << 0.025, 0.01 * rng.normal(), 0.01 * rng.normal();
    const auto des = simulated_design(k, 50 + rep, 100 + rep);
    const auto fit = ddm::fit_ml(des);
    const auto restr = parse_restriction("k2 - 2*k3 = 0.003", 3);
    const auto rep_ = run_tests(fit, fit_restricted(fit, cross_products(des.X), restr), restr, des.X.rows());
    CHECK(rep_.f_stat == doctest::Approx(*rep_.t_stat * *rep_.t_stat).epsilon(1e-10));
    CHECK(*rep_.t_p == doctest::Approx(rep_.f_p).epsilon(1e-9));
    CHECK(rep_.f_stat == doctest::Approx(f_statistic_quadratic(fit, restr)).epsilon(1e-8));
  }
}

TEST_CASE("size at 5% under a true restriction") {
  VectorXd k(2);
  k << 0.025, 0.0;
  const int reps = 4000;
  int f = 0, t = 0, lr = 0, w = 0, lm = 0, ordered = 0;
  const double tcrit = dist::student_t_quantile(0.975, 124);
  for (int rep = 0; rep < reps; ++rep) {
    const auto s = test_k2_zero(k, 126, 20000 + rep);
    f += s.rep.f_p < 0.05;
    lr += s.rep.lr_p < 0.05;
    w += s.rep.w_p < 0.05;
    lm += s.rep.lm_p < 0.05;
    t += std::abs(t_test(s.fit, 1, 0.0).t_stat) > tcrit;
    ordered += s.rep.w_stat >= s.rep.lr_stat && s.rep.lr_stat >= s.rep.lm_stat;
  }
  for (int hits : {f, t, lr, w, lm}) CHECK(std::abs(hits / double(reps) - 0.05) <= 0.015);
  CHECK(ordered == reps);
}

TEST_CASE("q F is close to chi-square(q) in large samples") {
  VectorXd k(2);
  k << 0.025, 0.0;
  const int reps = 1000;
  std::vector<double> u(reps);
  for (int rep = 0; rep < reps; ++rep) {
    const auto s = test_k2_zero(k, 2000, 60000 + rep);
    u[rep] = dist::chi2_cdf(1.0 * s.rep.f_stat, 1);
  }
  std::sort(u.begin(), u.end());
  double d = 0.0;
  for (int i = 0; i < reps; ++i)
    d = std::max({d, (i + 1.0) / reps - u[i], u[i] - double(i) / reps});
  // Asymptotic Kolmogorov critical value at the 1% level.
  CHECK(d < 1.6276 / std::sqrt(double(reps)));
}
