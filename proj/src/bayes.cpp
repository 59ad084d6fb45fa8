#include "rror/bayes.hpp"

#include <algorithm>
#include <cmath>

#include "rror/error.hpp"
#include "rror/rng.hpp"

namespace rror::bayes {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

NigPrior::NigPrior(VectorXd beta0, MatrixXd B0, double nu0, double lambda0)
    : beta0_(std::move(beta0)), B0_(std::move(B0)), nu0_(nu0), lambda0_(lambda0) {
  if (B0_.rows() != B0_.cols() || B0_.rows() != beta0_.size())
    throw InputError("prior: B0 must be square with the dimension of beta0");
  if (!(nu0_ > 0.0) || !(lambda0_ > 0.0))
    throw InputError("prior: nu0 and lambda0 must be positive");
  const double scale = std::max(B0_.cwiseAbs().maxCoeff(), 1.0);
  if (!(B0_ - B0_.transpose()).isZero(1e-12 * scale))
    throw InputError("prior: B0 is not symmetric");
  Eigen::LLT<MatrixXd> llt(B0_);
  if (llt.info() != Eigen::Success) throw InputError("prior: B0 is not positive definite");
}

NigPrior NigPrior::weakly_informative(Index dim) {
  return NigPrior(VectorXd::Zero(dim), 100.0 * MatrixXd::Identity(dim, dim), 2.0, 1.0);
}

NigPosterior posterior(const NigPrior& prior, const MatrixXd& X, const VectorXd& y) {
  const Index dim = prior.beta0().size();
  if (X.cols() != dim) throw InputError("design dimension does not match the prior");
  if (X.rows() != y.size()) throw InputError("design and response lengths differ");

  const MatrixXd I = MatrixXd::Identity(dim, dim);
  const MatrixXd B0inv = prior.B0().llt().solve(I);
  const MatrixXd precision = B0inv + X.transpose() * X;
  Eigen::LLT<MatrixXd> llt(precision);
  if (llt.info() != Eigen::Success) throw EstimationError("posterior precision is not positive definite");

  NigPosterior post;
  post.B_bar = llt.solve(I);
  post.B_bar = 0.5 * (post.B_bar + post.B_bar.transpose()).eval();
  post.beta_bar = llt.solve(VectorXd(B0inv * prior.beta0() + X.transpose() * y));
  post.nu_bar = prior.nu0() + static_cast<double>(X.rows());
  // Equivalent to the ML-based expression but valid without full rank:
  // both added terms are non-negative quadratic forms.
  const VectorXd resid = y - X * post.beta_bar;
  const VectorXd shrink = post.beta_bar - prior.beta0();
  post.lambda_bar = prior.lambda0() + resid.squaredNorm() + shrink.dot(B0inv * shrink);
  return post;
}

double lambda_bar_via_ml(const NigPrior& prior, const MatrixXd& X, const VectorXd& y) {
  const Index dim = prior.beta0().size();
  const MatrixXd I = MatrixXd::Identity(dim, dim);
  const MatrixXd B0inv = prior.B0().llt().solve(I);
  const MatrixXd xtx = X.transpose() * X;
  const auto qr = X.colPivHouseholderQr();
  if (qr.rank() < dim) throw SingularDesignError("lambda_bar_via_ml needs full-rank X");
  const VectorXd beta_hat = qr.solve(y);
  const VectorXd e = y - X * beta_hat;
  const VectorXd gap = beta_hat - prior.beta0();
  const MatrixXd middle = B0inv * (B0inv + xtx).llt().solve(xtx);
  return prior.lambda0() + e.squaredNorm() + gap.dot(middle * gap);
}

BayesEstimates bayes_estimators(const NigPosterior& post) {
  return {post.beta_bar, post.nu_bar / post.lambda_bar};
}

GibbsDraws gibbs_sample(const NigPosterior& post, std::size_t n_draws, std::size_t burn_in,
                        std::uint64_t seed) {
  if (n_draws < 1) throw InputError("need at least one draw");
  const Index dim = post.beta_bar.size();
  Eigen::LLT<MatrixXd> llt(post.B_bar);
  if (llt.info() != Eigen::Success) throw EstimationError("B_bar is not positive definite");
  const MatrixXd L = llt.matrixL();

  RandomStream rng(seed);
  GibbsDraws out;
  out.seed = seed;
  out.burn_in = burn_in;
  out.beta.resize(static_cast<Index>(n_draws), dim);
  out.sigma2.resize(static_cast<Index>(n_draws));
  const double shape = post.nu_bar / 2.0;
  const double rate = post.lambda_bar / 2.0;
  VectorXd z(dim);
  for (std::size_t s = 0; s < burn_in + n_draws; ++s) {
    const double precision = rng.gamma(shape) / rate;
    const double sigma2 = 1.0 / precision;
    for (Index i = 0; i < dim; ++i) z(i) = rng.normal();
    if (s < burn_in) continue;
    const auto row = static_cast<Index>(s - burn_in);
    out.sigma2(row) = sigma2;
    out.beta.row(row) = (post.beta_bar + std::sqrt(sigma2) * (L * z)).transpose();
  }
  return out;
}

double empirical_quantile(std::vector<double> values, double p) {
  if (values.empty()) throw InputError("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double pos = p * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

}  // namespace rror::bayes
