#include "rror/kalman.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "rror/error.hpp"
#include "rror/linear.hpp"

namespace rror::kalman {

using Eigen::Index;
using Eigen::Matrix2d;
using Eigen::MatrixXd;
using Eigen::Vector2d;
using Eigen::VectorXd;

namespace {
const double kLog2Pi = std::log(2.0 * 3.14159265358979323846);

Matrix2d symmetrize(const Matrix2d& M) { return 0.5 * (M + M.transpose()); }
}  // namespace

void SsmSpec::validate() const {
  if (!(sigma_u_sq > 0.0) || !std::isfinite(sigma_u_sq))
    throw InputError("sigma_u^2 must be positive");
  if (!(sigma_v_sq >= 0.0) || !std::isfinite(sigma_v_sq))
    throw InputError("sigma_v^2 must be non-negative");
  if (!(sigma0_sq >= 0.0) || !std::isfinite(sigma0_sq))
    throw InputError("sigma_0^2 must be non-negative");
  if (k.size() < 1) throw InputError("k must have at least one coefficient");
  if (!std::isfinite(phi0) || !std::isfinite(phi1) || !std::isfinite(mu0) || !k.allFinite())
    throw InputError("state-space parameters must be finite");
}

SsmData SsmData::from(const PrivateObservationSet& obs) {
  SsmData d;
  d.model = obs.paying() ? SsmModel::Paying : SsmModel::NonPaying;
  d.book_growth = obs.book_growth();
  d.div_to_book = obs.paying() ? obs.div_to_book() : VectorXd();
  d.covariates = obs.covariates();
  return d;
}

double required_rate(const SsmSpec& spec, const Eigen::RowVectorXd& c) {
  const double lin = c.dot(spec.k);
  return spec.model == SsmModel::Paying ? lin : std::expm1(lin);
}

SsmSystem build_system(const SsmSpec& spec, const SsmData& data) {
  spec.validate();
  if (spec.model != data.model) throw InputError("spec and data disagree on the company type");
  const Index T = data.periods();
  if (data.covariates.rows() != T) throw InputError("covariate rows do not match the periods");
  if (data.covariates.cols() != spec.k.size())
    throw InputError("k has " + std::to_string(spec.k.size()) + " entries but there are " +
                     std::to_string(data.covariates.cols()) + " covariates");
  SsmSystem sys;
  sys.A << spec.phi1, 0.0, 1.0, 0.0;
  sys.a << spec.phi0, 0.0;
  sys.Q << spec.sigma_v_sq, 0.0, 0.0, 0.0;
  sys.sigma_u_sq = spec.sigma_u_sq;
  sys.psi.resize(T, 2);
  sys.pi = VectorXd::Zero(T);
  const VectorXd lin = data.covariates * spec.k;
  if (spec.model == SsmModel::Paying) {
    if (data.div_to_book.size() != T) throw InputError("dividend-to-book series has the wrong length");
    sys.y = data.div_to_book;
    sys.psi.col(0) = -(1.0 + data.book_growth.array()).matrix();
    sys.psi.col(1) = (1.0 + lin.array()).matrix();
  } else {
    if ((data.book_growth.array() <= -1.0).any()) throw InputError("book growth must exceed -1");
    sys.y = data.book_growth.array().log1p().matrix();
    sys.psi.col(0).setConstant(-1.0);
    sys.psi.col(1).setConstant(1.0);
    sys.pi = lin;
  }
  return sys;
}

FilterOutput filter(const SsmSpec& spec, const SsmSystem& sys) {
  const Index T = sys.y.size();
  FilterOutput out;
  out.z_filt.reserve(static_cast<std::size_t>(T + 1));
  out.P_filt.reserve(static_cast<std::size_t>(T + 1));
  out.y_pred.resize(T);
  out.y_var.resize(T);
  out.z_filt.emplace_back(spec.mu0, spec.mu0);
  out.P_filt.push_back(Matrix2d(Vector2d::Constant(spec.sigma0_sq).asDiagonal()));

  for (Index t = 0; t < T; ++t) {
    const Vector2d zp = sys.a + sys.A * out.z_filt.back();
    const Matrix2d Pp = symmetrize(sys.A * out.P_filt.back() * sys.A.transpose() + sys.Q);
    const Vector2d psi = sys.psi.row(t).transpose();
    const double yp = psi.dot(zp) + sys.pi(t);
    const double var = psi.dot(Pp * psi) + sys.sigma_u_sq;
    if (!(var > 0.0) || !std::isfinite(var))
      throw EstimationError("prediction variance is not positive at t = " + std::to_string(t + 1));
    out.z_pred.push_back(zp);
    out.P_pred.push_back(Pp);
    out.y_pred(t) = yp;
    out.y_var(t) = var;
    if (std::isnan(sys.y(t))) {
      out.gains.push_back(Vector2d::Zero());
      out.z_filt.push_back(zp);
      out.P_filt.push_back(Pp);
      continue;
    }
    const Vector2d K = Pp * psi / var;
    const double err = sys.y(t) - yp;
    out.gains.push_back(K);
    out.z_filt.push_back(zp + K * err);
    out.P_filt.push_back(symmetrize(Pp - var * K * K.transpose()));
    out.loglik += -0.5 * (kLog2Pi + std::log(var) + err * err / var);
  }
  return out;
}

Matrix2d pinv_psd(const Matrix2d& M) {
  Eigen::SelfAdjointEigenSolver<Matrix2d> es(symmetrize(M));
  const Vector2d lambda = es.eigenvalues();
  const double top = lambda.cwiseAbs().maxCoeff();
  if (top == 0.0) return Matrix2d::Zero();
  Vector2d inv = Vector2d::Zero();
  for (int i = 0; i < 2; ++i)
    if (lambda(i) > 1e-13 * top) inv(i) = 1.0 / lambda(i);
  return symmetrize(es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose());
}

SmootherOutput smooth(const FilterOutput& filt, const SsmSystem& sys) {
  const std::size_t T = filt.z_pred.size();
  SmootherOutput out;
  out.z_smooth.resize(T + 1);
  out.P_smooth.resize(T + 1);
  out.cross.resize(T);
  out.gains.resize(T);
  out.z_smooth[T] = filt.z_filt[T];
  out.P_smooth[T] = filt.P_filt[T];
  for (std::size_t i = T; i-- > 0;) {
    const Matrix2d S = filt.P_filt[i] * sys.A.transpose() * pinv_psd(filt.P_pred[i]);
    out.gains[i] = S;
    out.z_smooth[i] = filt.z_filt[i] + S * (out.z_smooth[i + 1] - filt.z_pred[i]);
    out.P_smooth[i] =
        symmetrize(filt.P_filt[i] + S * (out.P_smooth[i + 1] - filt.P_pred[i]) * S.transpose());
    out.cross[i] = S * out.P_smooth[i + 1];
  }
  return out;
}

Forecast forecast(const SsmSpec& spec, const FilterOutput& filt, const SsmData& future, int horizon) {
  if (horizon < 1) throw InputError("forecast horizon must be at least 1");
  if (future.periods() < horizon)
    throw InputError("future inputs cover " + std::to_string(future.periods()) +
                     " periods but the horizon is " + std::to_string(horizon));
  SsmData padded = future;
  if (spec.model == SsmModel::Paying && padded.div_to_book.size() != padded.periods())
    padded.div_to_book = VectorXd::Zero(padded.periods());
  const SsmSystem sys = build_system(spec, padded);
  Forecast out;
  out.y.resize(horizon);
  out.y_var.resize(horizon);
  Vector2d z = filt.z_filt.back();
  Matrix2d P = filt.P_filt.back();
  for (int h = 0; h < horizon; ++h) {
    z = sys.a + sys.A * z;
    P = symmetrize(sys.A * P * sys.A.transpose() + sys.Q);
    const Vector2d psi = sys.psi.row(h).transpose();
    out.z.push_back(z);
    out.P.push_back(P);
    out.y(h) = psi.dot(z) + sys.pi(h);
    out.y_var(h) = psi.dot(P * psi) + sys.sigma_u_sq;
  }
  return out;
}

MStepResult m_step(const SsmSpec& current, const SsmData& data, const SsmSystem& sys,
                   const SmootherOutput& sm, const EmFixed& fixed) {
  const Index T = data.periods();
  const Index n = data.covariates.cols();
  MStepResult out;
  SsmSpec& next = out.spec;
  next = current;

  // Second moments E(z_t z_t' | F_T); z_t = (m_t, m_{t-1}).
  std::vector<Matrix2d> G(static_cast<std::size_t>(T + 1));
  for (Index t = 0; t <= T; ++t) {
    const auto i = static_cast<std::size_t>(t);
    G[i] = sm.P_smooth[i] + sm.z_smooth[i] * sm.z_smooth[i].transpose();
  }

  // k
  MatrixXd lhs = MatrixXd::Zero(n, n);
  VectorXd rhs = VectorXd::Zero(n);
  for (Index t = 1; t <= T; ++t) {
    const auto i = static_cast<std::size_t>(t);
    const VectorXd c = data.covariates.row(t - 1).transpose();
    const Vector2d& z = sm.z_smooth[i];
    if (current.model == SsmModel::Paying) {
      lhs += G[i](1, 1) * c * c.transpose();
      rhs += c * (sys.y(t - 1) * z(1) + (1.0 + data.book_growth(t - 1)) * G[i](0, 1) - G[i](1, 1));
    } else {
      lhs += c * c.transpose();
      rhs += c * (sys.y(t - 1) + z(0) - z(1));
    }
  }
  if (!fixed.k) {
    Eigen::LDLT<MatrixXd> ldlt(lhs);
    if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().array() > 0.0).all())
      throw SingularDesignError("k normal equations are singular in the M-step");
    next.k = ldlt.solve(rhs);
  }

  // phi0, phi1
  double s_m = 0.0, s_lag = 0.0, s_lag2 = 0.0, s_cross = 0.0;
  for (Index t = 1; t <= T; ++t) {
    const auto i = static_cast<std::size_t>(t);
    s_m += sm.z_smooth[i](0);
    s_lag += sm.z_smooth[i](1);
    s_lag2 += G[i](1, 1);
    s_cross += G[i](0, 1);
  }
  const double Td = static_cast<double>(T);
  const double det = Td * s_lag2 - s_lag * s_lag;
  if (fixed.phi) {
    // keep phi0, phi1
  } else if (det > 1e-12 * Td * s_lag2) {
    next.phi1 = (Td * s_cross - s_lag * s_m) / det;
    next.phi0 = (s_m - next.phi1 * s_lag) / Td;
  } else {
    // Smoothed lag has no spread: only phi0 + phi1 m is identified.
    next.phi1 = current.phi1;
    next.phi0 = (s_m - next.phi1 * s_lag) / Td;
  }

  // Noise variances at the new k and phi.
  SsmSpec probe = next;
  probe.sigma_u_sq = 1.0;
  const SsmSystem nsys = build_system(probe, data);
  double su = 0.0, sv = 0.0;
  for (Index t = 1; t <= T; ++t) {
    const auto i = static_cast<std::size_t>(t);
    const Vector2d psi = nsys.psi.row(t - 1).transpose();
    const double u = nsys.y(t - 1) - psi.dot(sm.z_smooth[i]) - nsys.pi(t - 1);
    su += u * u + psi.dot(sm.P_smooth[i] * psi);
    const double p0 = next.phi0, p1 = next.phi1;
    sv += G[i](0, 0) + p0 * p0 + p1 * p1 * G[i](1, 1) - 2.0 * p0 * sm.z_smooth[i](0) -
          2.0 * p1 * G[i](0, 1) + 2.0 * p0 * p1 * sm.z_smooth[i](1);
  }
  if (!fixed.sigma_u_sq) {
    next.sigma_u_sq = su / Td;
    if (!(next.sigma_u_sq > kVarianceFloor)) {
      next.sigma_u_sq = kVarianceFloor;
      out.sigma_u_floored = true;
    }
  }
  if (!fixed.sigma_v_sq) {
    next.sigma_v_sq = sv / Td;
    if (!(next.sigma_v_sq > kVarianceFloor)) {
      next.sigma_v_sq = kVarianceFloor;
      out.sigma_v_floored = true;
    }
  }
  if (!fixed.initial) {
    next.mu0 = sm.z_smooth[0](0);
    next.sigma0_sq = std::max(sm.P_smooth[0](0, 0), 0.0);
  }
  return out;
}

SsmFit em_estimate(const SsmData& data, const SsmSpec& init, double tol, int max_iter,
                   const EmFixed& fixed) {
  if (data.periods() < 8) throw InputError("state-space EM needs at least 8 periods");
  if (max_iter < 0) throw InputError("max_iter must be non-negative");
  init.validate();
  SsmFit fit;
  SsmSpec spec = init;
  double prev = -std::numeric_limits<double>::infinity();
  for (int iter = 0;; ++iter) {
    SsmSystem sys = build_system(spec, data);
    FilterOutput filt = filter(spec, sys);
    if (!std::isfinite(filt.loglik))
      throw EstimationError("log-likelihood is not finite at iteration " + std::to_string(iter) +
                            "; check the initial values");
    SmootherOutput sm = smooth(filt, sys);
    fit.loglik_trace.push_back(filt.loglik);
    const bool converged = iter > 0 && filt.loglik - prev < tol;
    if (converged || iter >= max_iter) {
      fit.spec = spec;
      fit.system = std::move(sys);
      fit.filtered = std::move(filt);
      fit.smoothed = std::move(sm);
      fit.loglik = fit.loglik_trace.back();
      fit.iterations = iter;
      fit.converged = converged;
      return fit;
    }
    prev = filt.loglik;
    const MStepResult step = m_step(spec, data, sys, sm, fixed);
    spec = step.spec;
    fit.sigma_u_floored = step.sigma_u_floored;
    fit.sigma_v_floored = step.sigma_v_floored;
  }
}

SsmSpec default_init(const SsmData& data) {
  const Index T = data.periods();
  const Index n = data.covariates.cols();
  SsmSpec spec;
  spec.model = data.model;
  VectorXd y;
  if (data.model == SsmModel::Paying) {
    MatrixXd X(T, n + 1);
    X.leftCols(n) = data.covariates;
    X.col(n) = -data.div_to_book;
    const LinearFit ols = fit_least_squares(X, data.book_growth);
    spec.k = ols.coeffs.head(n);
    const double delta = ols.coeffs(n);
    spec.mu0 = delta > 0.0 ? 1.0 / delta : 1.0;
    y = data.div_to_book;
  } else {
    y = data.book_growth.array().log1p().matrix();
    const LinearFit ols = fit_least_squares(data.covariates, y);
    spec.k = ols.coeffs;
    spec.mu0 = 0.0;
  }
  spec.phi1 = 0.9;
  spec.phi0 = spec.mu0 * (1.0 - spec.phi1);
  spec.sigma0_sq = 1.0;
  const double var = (y.array() - y.mean()).square().sum() / static_cast<double>(std::max<Index>(T - 1, 1));
  const double half = std::max(0.5 * var, 1e-8);
  spec.sigma_u_sq = half;
  spec.sigma_v_sq = half;
  return spec;
}

}  // namespace rror::kalman
