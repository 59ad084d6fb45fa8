#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "rror/data.hpp"

namespace rror::regime {

// Row-stochastic transition matrix (p_ij = Pr(s_t = j | s_{t-1} = i)) and the
// initial distribution rho = z_{1|0}.
class MarkovChainSpec {
 public:
  MarkovChainSpec(Eigen::MatrixXd P, Eigen::VectorXd rho);

  const Eigen::MatrixXd& P() const { return P_; }
  const Eigen::VectorXd& rho() const { return rho_; }
  Eigen::Index regimes() const { return P_.rows(); }

 private:
  Eigen::MatrixXd P_;
  Eigen::VectorXd rho_;
};

// Which regression the regime-switching kernels run on. All three reduce to
// y_t = x_t' beta(s_t) + u_t:
//   Public:           y_t = P_t + d_t - P_{t-1}, x_t = c_t P_{t-1}, beta = k
//   PrivatePaying:    y_t = b_t, x_t = (c_t', -Delta_t)', beta = (k', delta)'
//   PrivateNonPaying: y_t = b_t, x_t = c_t, beta = k
enum class RegimeModel { Public, PrivatePaying, PrivateNonPaying };

struct RegressionData {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  Eigen::MatrixXd covariates;  // T x n, the c_t rows
  RegimeModel model = RegimeModel::Public;
};

RegressionData regression_data(const ObservationSet& obs);
RegressionData regression_data(const PrivateObservationSet& obs);

// log eta_{tj}: normal log-density of y_t - x_t' beta(j) with variance sigma2.
// betas is dim x N (one column per regime).
Eigen::MatrixXd log_densities(const RegressionData& data, const Eigen::MatrixXd& betas,
                              double sigma2);

// eta_t for a single period t (0-based), in linear scale.
Eigen::VectorXd regime_densities(const RegressionData& data, const Eigen::MatrixXd& betas,
                                 double sigma2, Eigen::Index t);

struct FilterResult {
  Eigen::MatrixXd filtered;   // T x N, z_{t|t}
  Eigen::MatrixXd predicted;  // T x N, z_{t|t-1} (first row is rho)
  Eigen::VectorXd next;       // z_{T+1|T}
  double loglik = 0.0;
};

// Hamilton filter on log-densities. Each step rescales by the largest
// log-density, so the normaliser is accumulated in log space.
FilterResult hamilton_filter(const Eigen::MatrixXd& log_dens, const MarkovChainSpec& chain);

// Kim smoother: z_{t|T} = z_{t|t} .* (P (z_{t+1|T} ./ z_{t+1|t})), 0/0 := 0.
Eigen::MatrixXd kim_smoother(const FilterResult& filter, const MarkovChainSpec& chain);

// Pr(s_{t-1} = i, s_t = j | F_T) for 1-based t >= 2, as an N x N matrix.
Eigen::MatrixXd joint_smoothed(const MarkovChainSpec& chain, const FilterResult& filter,
                               const Eigen::MatrixXd& smoothed, Eigen::Index t);

// Sum over t = 2..T of the joint smoothed probabilities.
Eigen::MatrixXd joint_smoothed_sum(const MarkovChainSpec& chain, const FilterResult& filter,
                                   const Eigen::MatrixXd& smoothed);

struct TransitionUpdate {
  Eigen::MatrixXd P;
  std::vector<int> empty_regimes;  // rows kept from the previous matrix
};

// p_ij = sum_t joint(i,j) / sum_{t=2..T} (z_{t-1|T})_i. Rows whose denominator
// is at most `empty_threshold` are reported and copied from `previous`.
TransitionUpdate transition_mle(const Eigen::MatrixXd& joint_sum, const Eigen::MatrixXd& smoothed,
                                const Eigen::MatrixXd& previous, double empty_threshold);

struct RegimeCoefficients {
  Eigen::VectorXd beta;          // k(j) or (k(j)', delta(j))'
  Eigen::VectorXd k;             // the required-rate part of beta
  std::optional<double> delta;   // PrivatePaying only
  std::optional<double> m;       // 1/delta when delta > 0
  double weighted_rss = 0.0;     // e_j' e_j on the sqrt-weighted rows
};

// Least squares on rows scaled by sqrt(weights). Throws SingularDesignError
// when the weighted design loses rank.
RegimeCoefficients weighted_regression(const RegressionData& data, const Eigen::VectorXd& weights);

struct EmOptions {
  double tol = 1e-8;
  int max_iter = 1000;
  int max_restarts = 5;
  std::uint64_t seed = 0;
};

// Optional starting point. When absent, coefficients start at the one-regime
// ML estimate with the intercept spread by +/- the return-scale residual sd,
// P has 0.8 on the diagonal and rho is uniform.
struct EmInit {
  Eigen::MatrixXd betas;  // dim x N
  double sigma2 = 0.0;
  Eigen::MatrixXd P;
  Eigen::VectorXd rho;
};

struct RegimeFit {
  std::vector<RegimeCoefficients> regimes;
  double sigma2 = 0.0;
  Eigen::MatrixXd P;
  Eigen::VectorXd rho;
  Eigen::MatrixXd filtered;
  Eigen::MatrixXd predicted;
  Eigen::MatrixXd smoothed;
  std::vector<double> loglik_trace;
  double loglik = 0.0;
  int iterations = 0;
  int restarts = 0;
  bool converged = false;
  // Regime mean required rate at the mean covariate row; regimes are sorted
  // by it in descending order.
  Eigen::VectorXd mean_rates;
};

EmInit default_init(const RegressionData& data, int regimes);

RegimeFit em_fit(const RegressionData& data, int regimes, const EmOptions& options,
                 const std::optional<EmInit>& init = std::nullopt);

struct ChainDiagnostics {
  Eigen::VectorXd tau;            // 1/(1 - p_jj), +inf for absorbing regimes
  Eigen::VectorXd pi;             // stationary distribution, pi' P = pi'
  double k_inf = 0.0;             // sum_j pi_j mean_rate_j
  Eigen::VectorXd eigen_moduli;   // |lambda| of P, descending
};

// Throws EstimationError listing the eigenvalue moduli when P is not ergodic.
ChainDiagnostics chain_diagnostics(const Eigen::MatrixXd& P, const Eigen::VectorXd& mean_rates);

}  // namespace rror::regime
