#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rror/data.hpp"
#include "rror/kalman.hpp"
#include "rror/regime.hpp"

namespace rror::simulate {

enum class Family { PublicDdm, RegimeDdm, Private, PrivateRegime, SsmPaying, SsmNonPaying };

Family parse_family(const std::string& name);
std::string family_name(Family f);

// Covariates: c_{1t} = 1 and c_{it} ~ N(0, covariate_sd^2) for i >= 2, with n
// taken from the rows of k (or of ssm.k).
struct SimConfig {
  Family family = Family::PublicDdm;
  Eigen::Index periods = 100;
  std::uint64_t seed = 0;

  Eigen::MatrixXd k;      // n x N, one column per regime (N = 1 without regimes)
  Eigen::VectorXd delta;  // book-to-price per regime, paying private families
  bool paying = true;     // private families
  double sigma = 1.0;     // sd of u_t for the public and private families
  Eigen::MatrixXd P;      // regime families
  Eigen::VectorXd rho;

  double initial_price = 100.0;
  double payout_fraction = 0.01;  // d_t = payout_fraction * P_{t-1}
  double covariate_sd = 1.0;
  double div_to_book_mean = 0.02;  // Delta_t = mean * (0.5 + U(0,1))

  kalman::SsmSpec ssm;
  double book_growth_mean = 0.02;  // exogenous b_t for ssm-paying
  double book_growth_sd = 0.02;

  void validate() const;
};

struct SimResult {
  std::optional<ObservationSet> public_obs;
  std::optional<PrivateObservationSet> private_obs;
  std::vector<int> regime_path;  // 0-based s_1..s_T (regime families)
  Eigen::VectorXd state_path;    // m_0..m_T, ln m_t for ssm-nonpaying (state-space families)
};

// Stream 0 of the seed feeds, per period: covariates, Delta_t or state noise,
// exogenous growth, measurement noise. Regimes come from stream 1. Throws
// EstimationError naming the period when a price, dividend-to-book ratio,
// price-to-book ratio or growth rate leaves its domain.
SimResult simulate(const SimConfig& config);

struct HmmPosterior {
  Eigen::MatrixXd marginals;          // T x N, Pr(s_t = j | F_T)
  std::vector<Eigen::MatrixXd> joints;  // t = 2..T, Pr(s_{t-1} = i, s_t = j | F_T)
  double likelihood = 0.0;
};

// Exact posterior by summing over all N^T regime paths. densities is T x N
// (linear scale). Throws InputError when N^T exceeds 1e7.
HmmPosterior enumerate_hmm_posterior(const Eigen::MatrixXd& densities,
                                     const regime::MarkovChainSpec& chain);

struct GaussianMoments {
  std::vector<Eigen::Vector2d> mean;  // t = 0..T
  std::vector<Eigen::Matrix2d> cov;
};

struct GaussianOracle {
  GaussianMoments filtered;                // conditioned on y_1..y_t
  GaussianMoments smoothed;                // conditioned on y_1..y_T
  std::vector<Eigen::Matrix2d> cross;      // Cov(z_t, z_{t+1} | y_{1:T}), t = 0..T-1
  double loglik = 0.0;
  bool used_pseudo_inverse = false;
};

// Builds the joint Gaussian of (m_{-1}, m_0, ..., m_T, y_1, ..., y_T) from the
// state-space recursion and conditions on the observed y directly. NaN
// entries of y are treated as unobserved. Throws InputError when T > 8.
GaussianOracle joint_gaussian_oracle(const kalman::SsmSpec& spec, const kalman::SsmSystem& sys);

}  // namespace rror::simulate
