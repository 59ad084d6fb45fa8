#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace rror::bayes {

// beta | sigma^2 ~ N(beta0, sigma^2 B0),  sigma^{-2} ~ Gamma(nu0/2, rate lambda0/2).
class NigPrior {
 public:
  NigPrior(Eigen::VectorXd beta0, Eigen::MatrixXd B0, double nu0, double lambda0);

  // beta0 = 0, B0 = 100 I, nu0 = 2, lambda0 = 1.
  static NigPrior weakly_informative(Eigen::Index dim);

  const Eigen::VectorXd& beta0() const { return beta0_; }
  const Eigen::MatrixXd& B0() const { return B0_; }
  double nu0() const { return nu0_; }
  double lambda0() const { return lambda0_; }

 private:
  Eigen::VectorXd beta0_;
  Eigen::MatrixXd B0_;
  double nu0_;
  double lambda0_;
};

struct NigPosterior {
  Eigen::VectorXd beta_bar;
  Eigen::MatrixXd B_bar;
  double nu_bar = 0.0;
  double lambda_bar = 0.0;
};

// Conjugate update. X need not have full column rank; B0^{-1} regularises.
NigPosterior posterior(const NigPrior& prior, const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

// lambda_bar in the textbook form that goes through the ML estimate
//   lambda0 + e'e + (b - beta0)' B0^{-1} (B0^{-1} + X'X)^{-1} X'X (b - beta0).
// Requires X'X nonsingular; used to cross-check posterior().
double lambda_bar_via_ml(const NigPrior& prior, const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

struct BayesEstimates {
  Eigen::VectorXd beta_mean;   // E(beta | data) = beta_bar
  double precision_mean = 0.0; // E(sigma^{-2} | data) = nu_bar / lambda_bar
};

BayesEstimates bayes_estimators(const NigPosterior& post);

struct GibbsDraws {
  Eigen::MatrixXd beta;    // n_draws x dim
  Eigen::VectorXd sigma2;  // n_draws
  std::uint64_t seed = 0;
  std::size_t burn_in = 0;
};

// Each iteration draws sigma^2 first (through the Gamma precision) and then
// beta ~ N(beta_bar, sigma^2 B_bar) from the same Philox stream. The first
// burn_in iterations are discarded.
GibbsDraws gibbs_sample(const NigPosterior& post, std::size_t n_draws, std::size_t burn_in,
                        std::uint64_t seed);

// Empirical quantile (linear interpolation between order statistics).
double empirical_quantile(std::vector<double> values, double p);

}  // namespace rror::bayes
