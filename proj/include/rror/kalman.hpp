#pragma once

#include <Eigen/Dense>
#include <vector>

#include "rror/data.hpp"

namespace rror::kalman {

// Paying:     y_t = Delta_t,       z_t = (m_t, m_{t-1})',  psi_t = (-(1+b_t), 1+c_t'k)', pi_t = 0
// Non-paying: y_t = ln(1+b_t),     z_t = (ln m_t, ln m_{t-1})', psi_t = (-1, 1)',   pi_t = c_t'k
// State:      z_t = a + A z_{t-1} + (v_t, 0)',  A = [[phi1, 0], [1, 0]],  a = (phi0, 0)'.
// For the non-paying company k is the coefficient vector of the log required
// rate ln(1 + k_t°).
enum class SsmModel { Paying, NonPaying };

struct SsmSpec {
  SsmModel model = SsmModel::Paying;
  Eigen::VectorXd k;
  double phi0 = 0.0;
  double phi1 = 1.0;
  double mu0 = 0.0;
  double sigma0_sq = 0.0;
  double sigma_u_sq = 1.0;
  double sigma_v_sq = 0.0;

  // Throws InputError unless sigma_u_sq > 0, sigma_v_sq >= 0, sigma0_sq >= 0.
  void validate() const;
};

// Raw observables. div_to_book is ignored for the non-paying model.
struct SsmData {
  SsmModel model = SsmModel::Paying;
  Eigen::VectorXd book_growth;
  Eigen::VectorXd div_to_book;
  Eigen::MatrixXd covariates;  // T x n

  static SsmData from(const PrivateObservationSet& obs);
  Eigen::Index periods() const { return book_growth.size(); }
};

// Per-period measurement quantities for a given spec. A NaN in y marks a
// missing observation: the filter predicts through it without an update.
struct SsmSystem {
  Eigen::VectorXd y;
  Eigen::MatrixXd psi;  // T x 2
  Eigen::VectorXd pi;
  Eigen::Matrix2d A;
  Eigen::Vector2d a;
  Eigen::Matrix2d Q;  // diag(sigma_v^2, 0)
  double sigma_u_sq = 0.0;
};

SsmSystem build_system(const SsmSpec& spec, const SsmData& data);

// The rate k_t° implied by an SsmSpec at covariate row c (exp(c'k) - 1 for the
// non-paying model).
double required_rate(const SsmSpec& spec, const Eigen::RowVectorXd& c);

struct FilterOutput {
  std::vector<Eigen::Vector2d> z_filt;  // t = 0..T
  std::vector<Eigen::Matrix2d> P_filt;
  std::vector<Eigen::Vector2d> z_pred;  // t = 1..T stored at index t-1
  std::vector<Eigen::Matrix2d> P_pred;
  Eigen::VectorXd y_pred;
  Eigen::VectorXd y_var;
  std::vector<Eigen::Vector2d> gains;  // K_t, zero for missing y_t
  double loglik = 0.0;
};

FilterOutput filter(const SsmSpec& spec, const SsmSystem& sys);

struct SmootherOutput {
  std::vector<Eigen::Vector2d> z_smooth;  // t = 0..T
  std::vector<Eigen::Matrix2d> P_smooth;
  std::vector<Eigen::Matrix2d> cross;     // Cov(z_t, z_{t+1} | F_T), t = 0..T-1
  std::vector<Eigen::Matrix2d> gains;     // S_t, t = 0..T-1
};

// Rauch-Tung-Striebel pass. A singular predicted covariance (sigma_v^2 = 0)
// goes through a pseudo-inverse.
SmootherOutput smooth(const FilterOutput& filt, const SsmSystem& sys);

// Moore-Penrose inverse of a symmetric PSD 2x2 matrix.
Eigen::Matrix2d pinv_psd(const Eigen::Matrix2d& M);

struct Forecast {
  std::vector<Eigen::Vector2d> z;  // z_{T+h|T}, h = 1..H
  std::vector<Eigen::Matrix2d> P;
  Eigen::VectorXd y;
  Eigen::VectorXd y_var;
};

// H-step forecast from the end of the sample. `future` supplies b_{T+h} (paying)
// and covariates for h = 1..H; its y values are not used.
Forecast forecast(const SsmSpec& spec, const FilterOutput& filt, const SsmData& future, int horizon);

struct MStepResult {
  SsmSpec spec;
  bool sigma_u_floored = false;
  bool sigma_v_floored = false;
};

inline constexpr double kVarianceFloor = 1e-12;

// Parameter blocks held at their starting values during EM. The remaining
// blocks are still maximised exactly, so the likelihood stays monotone.
// A constant price-to-book ratio is fitted by holding phi = (0, 1),
// sigma_v^2 = 0 and a diffuse initial state: with free state noise the state
// absorbs the measurement noise, and with a free initial variance EM creeps
// along the (mu0, sigma0^2) ridge for thousands of iterations.
struct EmFixed {
  bool k = false;
  bool phi = false;         // phi0 and phi1
  bool sigma_u_sq = false;
  bool sigma_v_sq = false;
  bool initial = false;     // mu0 and sigma0^2
};

// Closed-form maximiser of the expected complete-data log-likelihood given
// the smoothed moments computed under `current`.
MStepResult m_step(const SsmSpec& current, const SsmData& data, const SsmSystem& sys,
                   const SmootherOutput& sm, const EmFixed& fixed = {});

struct SsmFit {
  SsmSpec spec;
  SsmSystem system;
  FilterOutput filtered;
  SmootherOutput smoothed;
  std::vector<double> loglik_trace;
  double loglik = 0.0;
  int iterations = 0;
  bool converged = false;
  bool sigma_u_floored = false;
  bool sigma_v_floored = false;
};

// EM: filter and smooth under iterate s, M-step to s+1, stop when the
// log-likelihood gain drops below tol. The returned spec is the one whose
// filter/smoother output is stored.
SsmFit em_estimate(const SsmData& data, const SsmSpec& init, double tol = 1e-8, int max_iter = 1000,
                   const EmFixed& fixed = {});

// Starting point from the constant price-to-book regression: k from OLS,
// mu0 = 1/delta (paying) or 0, phi1 = 0.9, phi0 = mu0 (1 - phi1), sigma0^2 = 1,
// and both noise variances at half the variance of y.
SsmSpec default_init(const SsmData& data);

}  // namespace rror::kalman
