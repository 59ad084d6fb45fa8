#include "rror/regime.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "rror/ddm.hpp"
#include "rror/error.hpp"
#include "rror/linear.hpp"
#include "rror/private_valuation.hpp"
#include "rror/rng.hpp"

namespace rror::regime {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {
constexpr double kProbTol = 1e-12;
constexpr double kEmptyFraction = 1e-6;
const double kLogSqrt2Pi = 0.5 * std::log(2.0 * 3.14159265358979323846);
}  // namespace

MarkovChainSpec::MarkovChainSpec(MatrixXd P, VectorXd rho) : P_(std::move(P)), rho_(std::move(rho)) {
  const Index N = P_.rows();
  if (N < 1 || P_.cols() != N) throw InputError("transition matrix must be square and non-empty");
  if (rho_.size() != N) throw InputError("initial distribution has the wrong length");
  if ((P_.array() < 0.0).any() || (P_.array() > 1.0).any())
    throw InputError("transition probabilities must lie in [0, 1]");
  for (Index i = 0; i < N; ++i) {
    if (std::abs(P_.row(i).sum() - 1.0) > kProbTol)
      throw InputError("row " + std::to_string(i + 1) + " of the transition matrix does not sum to 1");
  }
  if ((rho_.array() < 0.0).any() || (rho_.array() > 1.0).any() ||
      std::abs(rho_.sum() - 1.0) > kProbTol)
    throw InputError("initial distribution must be a probability vector");
}

RegressionData regression_data(const ObservationSet& obs) {
  const auto design = ddm::build_design(obs);
  return {design.X, design.y, obs.covariates(), RegimeModel::Public};
}

RegressionData regression_data(const PrivateObservationSet& obs) {
  const auto design = private_valuation::build_private_design(obs);
  return {design.X, design.y, obs.covariates(),
          obs.paying() ? RegimeModel::PrivatePaying : RegimeModel::PrivateNonPaying};
}

MatrixXd log_densities(const RegressionData& data, const MatrixXd& betas, double sigma2) {
  if (!(sigma2 > 0.0)) throw InputError("error variance must be positive");
  if (betas.rows() != data.X.cols()) throw InputError("coefficient dimension mismatch");
  const MatrixXd resid = (-(data.X * betas)).colwise() + data.y;
  const double log_sd = 0.5 * std::log(sigma2);
  return (-0.5 / sigma2 * resid.array().square() - log_sd - kLogSqrt2Pi).matrix();
}

VectorXd regime_densities(const RegressionData& data, const MatrixXd& betas, double sigma2,
                          Index t) {
  if (t < 0 || t >= data.y.size()) throw InputError("period out of range");
  const VectorXd resid = (data.y(t) - (data.X.row(t) * betas).array()).matrix().transpose();
  const double sd = std::sqrt(sigma2);
  return (-0.5 * resid.array().square() / sigma2).exp() / (std::sqrt(2.0 * 3.14159265358979323846) * sd);
}

FilterResult hamilton_filter(const MatrixXd& log_dens, const MarkovChainSpec& chain) {
  const Index T = log_dens.rows();
  const Index N = chain.regimes();
  if (log_dens.cols() != N) throw InputError("density matrix has the wrong number of regimes");
  FilterResult out;
  out.filtered.resize(T, N);
  out.predicted.resize(T, N);
  VectorXd pred = chain.rho();
  for (Index t = 0; t < T; ++t) {
    out.predicted.row(t) = pred.transpose();
    const auto row = log_dens.row(t);
    const double peak = row.maxCoeff();
    if (!std::isfinite(peak))
      throw EstimationError("filter degenerate at t = " + std::to_string(t + 1) +
                            ": all regime densities vanish");
    VectorXd w(N);
    for (Index j = 0; j < N; ++j) w(j) = pred(j) * std::exp(row(j) - peak);
    const double total = w.sum();
    if (!(total > 0.0))
      throw EstimationError("filter degenerate at t = " + std::to_string(t + 1) +
                            ": predicted probabilities and densities do not overlap");
    out.filtered.row(t) = (w / total).transpose();
    out.loglik += peak + std::log(total);
    pred = chain.P().transpose() * out.filtered.row(t).transpose();
  }
  out.next = pred;
  return out;
}

namespace {
// a / b with 0/0 := 0; a > 0 with b == 0 is an inconsistency.
double safe_ratio(double a, double b, Index t) {
  if (b > 0.0) return a / b;
  if (a <= 0.0) return 0.0;
  throw EstimationError("smoothed probability positive where predicted probability is zero (t = " +
                        std::to_string(t + 1) + ")");
}
}  // namespace

MatrixXd kim_smoother(const FilterResult& filter, const MarkovChainSpec& chain) {
  const Index T = filter.filtered.rows();
  const Index N = chain.regimes();
  MatrixXd smoothed(T, N);
  if (T == 0) return smoothed;
  smoothed.row(T - 1) = filter.filtered.row(T - 1);
  VectorXd ratio(N);
  for (Index t = T - 2; t >= 0; --t) {
    for (Index j = 0; j < N; ++j)
      ratio(j) = safe_ratio(smoothed(t + 1, j), filter.predicted(t + 1, j), t + 1);
    smoothed.row(t) = filter.filtered.row(t).cwiseProduct((chain.P() * ratio).transpose());
  }
  return smoothed;
}

MatrixXd joint_smoothed(const MarkovChainSpec& chain, const FilterResult& filter,
                        const MatrixXd& smoothed, Index t) {
  const Index T = filter.filtered.rows();
  if (t < 2 || t > T) throw InputError("joint smoothed probabilities need 2 <= t <= T");
  const Index N = chain.regimes();
  MatrixXd joint(N, N);
  const Index cur = t - 1;
  for (Index j = 0; j < N; ++j) {
    const double r = safe_ratio(smoothed(cur, j), filter.predicted(cur, j), cur);
    for (Index i = 0; i < N; ++i) joint(i, j) = chain.P()(i, j) * filter.filtered(cur - 1, i) * r;
  }
  return joint;
}

MatrixXd joint_smoothed_sum(const MarkovChainSpec& chain, const FilterResult& filter,
                            const MatrixXd& smoothed) {
  const Index N = chain.regimes();
  MatrixXd sum = MatrixXd::Zero(N, N);
  for (Index t = 2; t <= filter.filtered.rows(); ++t) sum += joint_smoothed(chain, filter, smoothed, t);
  return sum;
}

TransitionUpdate transition_mle(const MatrixXd& joint_sum, const MatrixXd& smoothed,
                                const MatrixXd& previous, double empty_threshold) {
  const Index N = joint_sum.rows();
  TransitionUpdate out;
  out.P = previous;
  if (N == 1) {
    out.P = MatrixXd::Ones(1, 1);
    return out;
  }
  const Index T = smoothed.rows();
  VectorXd denom = VectorXd::Zero(N);
  if (T >= 2) denom = smoothed.topRows(T - 1).colwise().sum().transpose();
  for (Index i = 0; i < N; ++i) {
    if (!(denom(i) > empty_threshold)) {
      out.empty_regimes.push_back(static_cast<int>(i));
      continue;
    }
    VectorXd row = joint_sum.row(i).transpose() / denom(i);
    row = row.cwiseMax(0.0);
    out.P.row(i) = (row / row.sum()).transpose();
  }
  return out;
}

RegimeCoefficients weighted_regression(const RegressionData& data, const VectorXd& weights) {
  if (weights.size() != data.y.size()) throw InputError("weight vector has the wrong length");
  if ((weights.array() < 0.0).any()) throw InputError("weights must be non-negative");
  const VectorXd root = weights.cwiseSqrt();
  const MatrixXd Xw = root.asDiagonal() * data.X;
  const VectorXd yw = root.cwiseProduct(data.y);
  const LinearFit fit = fit_least_squares(Xw, yw);

  RegimeCoefficients out;
  out.beta = fit.coeffs;
  out.weighted_rss = fit.rss;
  const Index n = data.covariates.cols();
  out.k = fit.coeffs.head(n);
  if (data.model == RegimeModel::PrivatePaying) {
    out.delta = fit.coeffs(n);
    if (*out.delta > 0.0) out.m = 1.0 / *out.delta;
  }
  return out;
}

EmInit default_init(const RegressionData& data, int regimes) {
  if (regimes < 1) throw InputError("need at least one regime");
  const LinearFit ml = fit_least_squares(data.X, data.y);
  const Index N = regimes;
  // Residual sd on the scale of the first coefficient (a return for the
  // public model, where the first column is P_{t-1}).
  const double scale = std::sqrt(ml.rss / data.X.col(0).squaredNorm());
  EmInit init;
  init.betas = ml.coeffs.replicate(1, N);
  for (Index j = 0; j < N && N > 1; ++j) {
    const double offset = 1.0 - 2.0 * static_cast<double>(j) / static_cast<double>(N - 1);
    init.betas(0, j) += offset * scale;
  }
  init.sigma2 = ml.sigma2_ml;
  init.P = N == 1 ? MatrixXd::Ones(1, 1)
                  : MatrixXd::Constant(N, N, 0.2 / static_cast<double>(N - 1));
  if (N > 1) init.P.diagonal().setConstant(0.8);
  init.rho = VectorXd::Constant(N, 1.0 / static_cast<double>(N));
  return init;
}

namespace {

EmInit perturbed_init(const RegressionData& data, int regimes, std::uint64_t seed, int restart) {
  EmInit init = default_init(data, regimes);
  const LinearFit ml = fit_least_squares(data.X, data.y);
  const double scale = std::sqrt(ml.rss / data.X.col(0).squaredNorm());
  RandomStream rng(seed, static_cast<std::uint64_t>(restart));
  std::vector<double> offsets(static_cast<std::size_t>(regimes));
  for (auto& o : offsets) o = (3.0 * rng.uniform() - 1.5) * scale;
  std::sort(offsets.begin(), offsets.end(), std::greater<>());
  for (Index j = 0; j < regimes; ++j)
    init.betas(0, j) = ml.coeffs(0) + offsets[static_cast<std::size_t>(j)];
  return init;
}

RegimeFit run_em(const RegressionData& data, int regimes, const EmOptions& options,
                 const EmInit& init) {
  const Index T = data.y.size();
  const Index N = regimes;
  const double empty_threshold = kEmptyFraction * static_cast<double>(T);
  const double sigma2_floor = 1e-300;

  MatrixXd betas = init.betas;
  double sigma2 = init.sigma2;
  MatrixXd P = init.P;
  VectorXd rho = init.rho;
  std::vector<RegimeCoefficients> coeffs(static_cast<std::size_t>(N));

  RegimeFit fit;
  double prev = -std::numeric_limits<double>::infinity();
  for (int iter = 0;; ++iter) {
    const MarkovChainSpec chain(P, rho);
    const FilterResult filter = hamilton_filter(log_densities(data, betas, sigma2), chain);
    const MatrixXd smoothed = kim_smoother(filter, chain);
    fit.loglik_trace.push_back(filter.loglik);
    const VectorXd mass = smoothed.colwise().sum().transpose();
    for (Index j = 0; j < N; ++j) {
      if (!(mass(j) >= empty_threshold))
        throw EmptyRegimeError(static_cast<int>(j), "regime " + std::to_string(j + 1) +
                                                        " collapsed (no smoothed mass)");
    }
    const bool converged = iter > 0 && filter.loglik - prev < options.tol;
    if (converged || iter >= options.max_iter) {
      fit.converged = converged;
      fit.iterations = iter;
      fit.loglik = filter.loglik;
      fit.filtered = filter.filtered;
      fit.predicted = filter.predicted;
      fit.smoothed = smoothed;
      break;
    }
    prev = filter.loglik;

    const MatrixXd joint = joint_smoothed_sum(chain, filter, smoothed);
    const TransitionUpdate update = transition_mle(joint, smoothed, P, empty_threshold);
    if (!update.empty_regimes.empty())
      throw EmptyRegimeError(update.empty_regimes.front(), "regime has no transition mass");
    P = update.P;
    rho = smoothed.row(0).transpose();
    rho /= rho.sum();
    double rss = 0.0;
    for (Index j = 0; j < N; ++j) {
      auto& c = coeffs[static_cast<std::size_t>(j)];
      c = weighted_regression(data, smoothed.col(j));
      betas.col(j) = c.beta;
      rss += c.weighted_rss;
    }
    sigma2 = std::max(rss / static_cast<double>(T), sigma2_floor);
  }

  // Coefficients reported for the final parameter set.
  for (Index j = 0; j < N; ++j) {
    RegimeCoefficients c;
    c.beta = betas.col(j);
    const Index n = data.covariates.cols();
    c.k = c.beta.head(n);
    if (data.model == RegimeModel::PrivatePaying) {
      c.delta = c.beta(n);
      if (*c.delta > 0.0) c.m = 1.0 / *c.delta;
    }
    const VectorXd resid = data.y - data.X * c.beta;
    c.weighted_rss = fit.smoothed.col(j).dot(resid.cwiseAbs2());
    fit.regimes.push_back(std::move(c));
  }
  fit.sigma2 = sigma2;
  fit.P = P;
  fit.rho = rho;
  return fit;
}

void sort_regimes(RegimeFit& fit, const RegressionData& data) {
  const Index N = static_cast<Index>(fit.regimes.size());
  const Eigen::RowVectorXd cbar = data.covariates.colwise().mean();
  VectorXd rates(N);
  for (Index j = 0; j < N; ++j) rates(j) = cbar.dot(fit.regimes[static_cast<std::size_t>(j)].k);
  std::vector<Index> order(static_cast<std::size_t>(N));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return rates(a) > rates(b); });

  RegimeFit sorted = fit;
  sorted.mean_rates.resize(N);
  for (Index a = 0; a < N; ++a) {
    const Index src = order[static_cast<std::size_t>(a)];
    sorted.regimes[static_cast<std::size_t>(a)] = fit.regimes[static_cast<std::size_t>(src)];
    sorted.mean_rates(a) = rates(src);
    sorted.rho(a) = fit.rho(src);
    sorted.filtered.col(a) = fit.filtered.col(src);
    sorted.predicted.col(a) = fit.predicted.col(src);
    sorted.smoothed.col(a) = fit.smoothed.col(src);
    for (Index b = 0; b < N; ++b) sorted.P(a, b) = fit.P(src, order[static_cast<std::size_t>(b)]);
  }
  fit = std::move(sorted);
}

}  // namespace

RegimeFit em_fit(const RegressionData& data, int regimes, const EmOptions& options,
                 const std::optional<EmInit>& init) {
  if (regimes < 1) throw InputError("need at least one regime");
  const Index dim = data.X.cols();
  if (data.y.size() <= static_cast<Index>(regimes) * dim)
    throw InputError("too few periods for " + std::to_string(regimes) + " regimes");
  EmInit start = init ? *init : default_init(data, regimes);
  if (start.betas.rows() != dim || start.betas.cols() != regimes)
    throw InputError("initial coefficients must be dim x N");

  std::string last_error;
  for (int attempt = 0; attempt <= options.max_restarts; ++attempt) {
    try {
      RegimeFit fit = run_em(data, regimes, options, start);
      fit.restarts = attempt;
      sort_regimes(fit, data);
      return fit;
    } catch (const EmptyRegimeError& e) {
      last_error = e.what();
    } catch (const SingularDesignError& e) {
      last_error = e.what();
    }
    start = perturbed_init(data, regimes, options.seed, attempt + 1);
  }
  throw EstimationError("regime EM failed after " + std::to_string(options.max_restarts) +
                        " restarts: " + last_error);
}

ChainDiagnostics chain_diagnostics(const MatrixXd& P, const VectorXd& mean_rates) {
  const Index N = P.rows();
  if (P.cols() != N || mean_rates.size() != N) throw InputError("dimension mismatch in chain diagnostics");
  ChainDiagnostics out;
  Eigen::EigenSolver<MatrixXd> es(P, false);
  out.eigen_moduli = es.eigenvalues().cwiseAbs();
  std::sort(out.eigen_moduli.data(), out.eigen_moduli.data() + N, std::greater<>());
  int unit = 0;
  bool inside = true;
  for (Index i = 0; i < N; ++i) {
    const auto lambda = es.eigenvalues()(i);
    if (std::abs(lambda - std::complex<double>(1.0, 0.0)) < 1e-8) {
      ++unit;
    } else if (std::abs(lambda) >= 1.0 - 1e-10) {
      inside = false;
    }
  }
  if (unit != 1 || !inside) {
    std::ostringstream msg;
    msg << "transition matrix is not ergodic; eigenvalue moduli:";
    for (Index i = 0; i < N; ++i) msg << ' ' << out.eigen_moduli(i);
    throw EstimationError(msg.str());
  }
  MatrixXd A(N + 1, N);
  A.topRows(N) = P.transpose() - MatrixXd::Identity(N, N);
  A.row(N).setOnes();
  VectorXd b = VectorXd::Zero(N + 1);
  b(N) = 1.0;
  out.pi = A.colPivHouseholderQr().solve(b);
  out.tau.resize(N);
  for (Index j = 0; j < N; ++j)
    out.tau(j) = P(j, j) < 1.0 ? 1.0 / (1.0 - P(j, j)) : std::numeric_limits<double>::infinity();
  out.k_inf = out.pi.dot(mean_rates);
  return out;
}

}  // namespace rror::regime
