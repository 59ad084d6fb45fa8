#include "rror/simulate.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "rror/error.hpp"
#include "rror/rng.hpp"

namespace rror::simulate {

using Eigen::Index;
using Eigen::Matrix2d;
using Eigen::MatrixXd;
using Eigen::Vector2d;
using Eigen::VectorXd;

Family parse_family(const std::string& name) {
  if (name == "public-ddm") return Family::PublicDdm;
  if (name == "regime-ddm") return Family::RegimeDdm;
  if (name == "private") return Family::Private;
  if (name == "private-regime") return Family::PrivateRegime;
  if (name == "ssm-paying") return Family::SsmPaying;
  if (name == "ssm-nonpaying") return Family::SsmNonPaying;
  throw InputError("unknown model family '" + name + "'");
}

std::string family_name(Family f) {
  switch (f) {
    case Family::PublicDdm: return "public-ddm";
    case Family::RegimeDdm: return "regime-ddm";
    case Family::Private: return "private";
    case Family::PrivateRegime: return "private-regime";
    case Family::SsmPaying: return "ssm-paying";
    case Family::SsmNonPaying: return "ssm-nonpaying";
  }
  return "";
}

namespace {
bool has_regimes(Family f) { return f == Family::RegimeDdm || f == Family::PrivateRegime; }
bool is_ssm(Family f) { return f == Family::SsmPaying || f == Family::SsmNonPaying; }
bool is_private(Family f) { return f == Family::Private || f == Family::PrivateRegime; }
}  // namespace

void SimConfig::validate() const {
  if (periods < 1) throw InputError("need at least one period");
  if (is_ssm(family)) {
    ssm.validate();
    const auto want = family == Family::SsmPaying ? kalman::SsmModel::Paying : kalman::SsmModel::NonPaying;
    if (ssm.model != want) throw InputError("state-space spec does not match the family");
    if (!(book_growth_sd >= 0.0)) throw InputError("book growth sd must be non-negative");
  } else {
    if (k.rows() < 1 || k.cols() < 1) throw InputError("k must be non-empty");
    if (!(sigma >= 0.0)) throw InputError("sigma must be non-negative");
    const Index N = k.cols();
    if (has_regimes(family)) {
      regime::MarkovChainSpec chain(P, rho);  // validates
      if (chain.regimes() != N) throw InputError("k must have one column per regime");
    } else if (N != 1) {
      throw InputError("k must have a single column without regimes");
    }
    if (is_private(family) && paying && delta.size() != N)
      throw InputError("delta must have one entry per regime");
  }
  if (!(covariate_sd >= 0.0)) throw InputError("covariate sd must be non-negative");
  if (!(initial_price > 0.0)) throw InputError("initial price must be positive");
  if (!(payout_fraction >= 0.0)) throw InputError("payout fraction must be non-negative");
  if (!(div_to_book_mean > 0.0)) throw InputError("dividend-to-book mean must be positive");
}

SimResult simulate(const SimConfig& config) {
  config.validate();
  RandomStream rng(config.seed);
  // The regime path has its own stream, so a frozen chain reproduces the
  // single-regime series draw for draw.
  RandomStream regime_rng(config.seed, 1);
  const Index T = config.periods;
  const Index n = is_ssm(config.family) ? config.ssm.k.size() : config.k.rows();
  const Family fam = config.family;
  auto fail = [](const std::string& what, Index t) {
    throw EstimationError("simulation left the model domain at t = " + std::to_string(t) + ": " + what);
  };

  MatrixXd C(T, n);
  SimResult out;
  std::vector<int>& path = out.regime_path;

  auto draw_covariates = [&](Index t) {
    C(t, 0) = 1.0;
    for (Index i = 1; i < n; ++i) C(t, i) = config.covariate_sd * rng.normal();
  };
  auto draw_regime = [&](Index t) {
    const VectorXd& probs = t == 0 ? config.rho : VectorXd(config.P.row(path.back()).transpose());
    const double u = regime_rng.uniform();
    double acc = 0.0;
    int s = static_cast<int>(probs.size()) - 1;
    for (Index j = 0; j < probs.size(); ++j) {
      acc += probs(j);
      if (u < acc) {
        s = static_cast<int>(j);
        break;
      }
    }
    path.push_back(s);
  };

  if (fam == Family::PublicDdm || fam == Family::RegimeDdm) {
    VectorXd prices(T + 1), dividends(T);
    prices(0) = config.initial_price;
    for (Index t = 0; t < T; ++t) {
      draw_covariates(t);
      int s = 0;
      if (fam == Family::RegimeDdm) {
        draw_regime(t);
        s = path.back();
      }
      const double rate = C.row(t).dot(config.k.col(s));
      const double lag = prices(t);
      dividends(t) = config.payout_fraction * lag;
      prices(t + 1) = (1.0 + rate) * lag - dividends(t) + config.sigma * rng.normal();
      if (!(prices(t + 1) > 0.0)) fail("non-positive price " + std::to_string(prices(t + 1)), t + 1);
    }
    out.public_obs.emplace(prices, dividends, C);
    return out;
  }

  if (is_private(fam)) {
    VectorXd b(T), Delta(config.paying ? T : 0);
    for (Index t = 0; t < T; ++t) {
      draw_covariates(t);
      int s = 0;
      if (fam == Family::PrivateRegime) {
        draw_regime(t);
        s = path.back();
      }
      double value = C.row(t).dot(config.k.col(s));
      if (config.paying) {
        Delta(t) = config.div_to_book_mean * (0.5 + rng.uniform());
        value -= config.delta(s) * Delta(t);
      }
      b(t) = value + config.sigma * rng.normal();
      if (!(b(t) > -1.0)) fail("book growth " + std::to_string(b(t)) + " <= -1", t + 1);
    }
    out.private_obs.emplace(b, Delta, C, config.paying);
    return out;
  }

  // State-space families.
  const kalman::SsmSpec& spec = config.ssm;
  const bool paying = fam == Family::SsmPaying;
  VectorXd m(T + 1), b(T), Delta(paying ? T : 0);
  m(0) = spec.mu0 + std::sqrt(spec.sigma0_sq) * rng.normal();
  const double sv = std::sqrt(spec.sigma_v_sq);
  const double su = std::sqrt(spec.sigma_u_sq);
  for (Index t = 0; t < T; ++t) {
    draw_covariates(t);
    m(t + 1) = spec.phi0 + spec.phi1 * m(t) + sv * rng.normal();
    const double lin = C.row(t).dot(spec.k);
    if (paying) {
      if (!(m(t + 1) > 0.0)) fail("non-positive price-to-book ratio", t + 1);
      b(t) = config.book_growth_mean + config.book_growth_sd * rng.normal();
      if (!(b(t) > -1.0)) fail("book growth <= -1", t + 1);
      Delta(t) = -(1.0 + b(t)) * m(t + 1) + (1.0 + lin) * m(t) + su * rng.normal();
      if (!(Delta(t) >= 0.0)) fail("negative dividend-to-book ratio " + std::to_string(Delta(t)), t + 1);
    } else {
      const double log_growth = lin - m(t + 1) + m(t) + su * rng.normal();
      b(t) = std::expm1(log_growth);
    }
  }
  out.state_path = m;
  out.private_obs.emplace(b, Delta, C, paying);
  return out;
}

HmmPosterior enumerate_hmm_posterior(const MatrixXd& densities, const regime::MarkovChainSpec& chain) {
  const Index T = densities.rows();
  const Index N = chain.regimes();
  if (densities.cols() != N) throw InputError("density matrix has the wrong number of regimes");
  if (T < 1) throw InputError("need at least one period");
  double paths = 1.0;
  for (Index t = 0; t < T; ++t) paths *= static_cast<double>(N);
  if (paths > 1e7) throw InputError("enumeration needs N^T <= 1e7 paths");

  HmmPosterior out;
  out.marginals = MatrixXd::Zero(T, N);
  out.joints.assign(static_cast<std::size_t>(T > 1 ? T - 1 : 0), MatrixXd::Zero(N, N));
  std::vector<Index> s(static_cast<std::size_t>(T), 0);
  const auto total = static_cast<long long>(paths);
  double mass = 0.0;
  for (long long p = 0; p < total; ++p) {
    double w = chain.rho()(s[0]) * densities(0, s[0]);
    for (Index t = 1; t < T; ++t) {
      const auto i = static_cast<std::size_t>(t);
      w *= chain.P()(s[i - 1], s[i]) * densities(t, s[i]);
    }
    mass += w;
    for (Index t = 0; t < T; ++t) out.marginals(t, s[static_cast<std::size_t>(t)]) += w;
    for (Index t = 1; t < T; ++t) {
      const auto i = static_cast<std::size_t>(t);
      out.joints[i - 1](s[i - 1], s[i]) += w;
    }
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (++s[i] < N) break;
      s[i] = 0;
    }
  }
  if (!(mass > 0.0)) throw EstimationError("every regime path has zero probability");
  out.marginals /= mass;
  for (auto& J : out.joints) J /= mass;
  out.likelihood = mass;
  return out;
}

namespace {

struct Conditioner {
  MatrixXd cov;   // full covariance of (m_{-1}, m_0..m_T, y_1..y_T)
  VectorXd mean;
  Index T = 0;

  Index m_index(Index t) const { return t + 1; }  // t = -1..T
  Index y_index(Index t) const { return T + 2 + (t - 1); }  // t = 1..T
};

// Conditions the states (m_{-1}, ..., m_T) on the listed y indices.
void condition(const Conditioner& g, const VectorXd& y, const std::vector<Index>& obs, VectorXd& mean,
               MatrixXd& cov, double* loglik, bool& pinv_used) {
  const Index ns = g.T + 2;
  mean = g.mean.head(ns);
  cov = g.cov.topLeftCorner(ns, ns);
  if (obs.empty()) return;
  const auto k = static_cast<Index>(obs.size());
  MatrixXd Syy(k, k), Ssy(ns, k);
  VectorXd r(k);
  for (Index a = 0; a < k; ++a) {
    const Index ia = obs[static_cast<std::size_t>(a)];
    r(a) = y(ia - (g.T + 2)) - g.mean(ia);
    Ssy.col(a) = g.cov.block(0, ia, ns, 1);
    for (Index b = 0; b < k; ++b) Syy(a, b) = g.cov(ia, obs[static_cast<std::size_t>(b)]);
  }
  Eigen::LDLT<MatrixXd> ldlt(Syy);
  MatrixXd solved_s;
  VectorXd solved_r;
  if (ldlt.info() == Eigen::Success && (ldlt.vectorD().array() > 0.0).all()) {
    solved_s = ldlt.solve(Ssy.transpose());
    solved_r = ldlt.solve(r);
    if (loglik) {
      *loglik = -0.5 * (static_cast<double>(k) * std::log(2.0 * 3.14159265358979323846) +
                        ldlt.vectorD().array().log().sum() + r.dot(solved_r));
    }
  } else {
    pinv_used = true;
    Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(Syy);
    const MatrixXd inv = cod.pseudoInverse();
    solved_s = inv * Ssy.transpose();
    solved_r = inv * r;
    if (loglik) *loglik = -std::numeric_limits<double>::infinity();
  }
  mean += Ssy * solved_r;
  cov -= Ssy * solved_s;
  cov = 0.5 * (cov + cov.transpose()).eval();
}

}  // namespace

GaussianOracle joint_gaussian_oracle(const kalman::SsmSpec& spec, const kalman::SsmSystem& sys) {
  const Index T = sys.y.size();
  if (T > 8) throw InputError("joint-Gaussian oracle is limited to T <= 8");
  spec.validate();

  // Every variable is const + L eps with eps = (m_{-1}, m_0 deviations, v_1..v_T, u_1..u_T).
  const Index ne = 2 * T + 2;
  const Index nv = 2 * T + 2;
  MatrixXd L = MatrixXd::Zero(nv, ne);
  VectorXd c = VectorXd::Zero(nv);
  VectorXd d(ne);
  d << spec.sigma0_sq, spec.sigma0_sq, VectorXd::Constant(T, spec.sigma_v_sq),
      VectorXd::Constant(T, spec.sigma_u_sq);

  Conditioner g;
  g.T = T;
  c(g.m_index(-1)) = spec.mu0;
  L(g.m_index(-1), 0) = 1.0;
  c(g.m_index(0)) = spec.mu0;
  L(g.m_index(0), 1) = 1.0;
  for (Index t = 1; t <= T; ++t) {
    const Index i = g.m_index(t);
    c(i) = spec.phi0 + spec.phi1 * c(i - 1);
    L.row(i) = spec.phi1 * L.row(i - 1);
    L(i, 1 + t) += 1.0;
    const Index j = g.y_index(t);
    const double p1 = sys.psi(t - 1, 0), p2 = sys.psi(t - 1, 1);
    c(j) = p1 * c(i) + p2 * c(i - 1) + sys.pi(t - 1);
    L.row(j) = p1 * L.row(i) + p2 * L.row(i - 1);
    L(j, T + 1 + t) += 1.0;
  }
  g.mean = c;
  g.cov = L * d.asDiagonal() * L.transpose();

  GaussianOracle out;
  auto state = [&](const VectorXd& mean, const MatrixXd& cov, Index t, Vector2d& zm, Matrix2d& zc) {
    const Index a = g.m_index(t), b = g.m_index(t - 1);
    zm << mean(a), mean(b);
    zc << cov(a, a), cov(a, b), cov(b, a), cov(b, b);
  };

  std::vector<Index> obs;
  VectorXd mean;
  MatrixXd cov;
  for (Index t = 0; t <= T; ++t) {
    if (t >= 1 && !std::isnan(sys.y(t - 1))) obs.push_back(g.y_index(t));
    condition(g, sys.y, obs, mean, cov, t == T ? &out.loglik : nullptr, out.used_pseudo_inverse);
    Vector2d zm;
    Matrix2d zc;
    state(mean, cov, t, zm, zc);
    out.filtered.mean.push_back(zm);
    out.filtered.cov.push_back(zc);
  }
  // mean/cov now hold the full-sample conditional moments.
  for (Index t = 0; t <= T; ++t) {
    Vector2d zm;
    Matrix2d zc;
    state(mean, cov, t, zm, zc);
    out.smoothed.mean.push_back(zm);
    out.smoothed.cov.push_back(zc);
  }
  for (Index t = 0; t < T; ++t) {
    const Index a0 = g.m_index(t), a1 = g.m_index(t - 1);
    const Index b0 = g.m_index(t + 1), b1 = g.m_index(t);
    Matrix2d x;
    x << cov(a0, b0), cov(a0, b1), cov(a1, b0), cov(a1, b1);
    out.cross.push_back(x);
  }
  return out;
}

}  // namespace rror::simulate
