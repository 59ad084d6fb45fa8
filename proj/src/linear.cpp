#include "rror/linear.hpp"

#include <cmath>
#include <sstream>

#include "rror/error.hpp"

namespace rror {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

LinearFit fit_least_squares(const MatrixXd& X, const VectorXd& y) {
  const Index T = X.rows();
  const Index p = X.cols();
  if (y.size() != T) throw InputError("design and response lengths differ");
  if (p < 1) throw InputError("design has no columns");
  if (T <= p) {
    throw SingularDesignError("need more periods than coefficients (T = " +
                              std::to_string(T) + ", dim = " + std::to_string(p) + ")");
  }

  // Column equilibration makes the rank test invariant to price scale.
  VectorXd scale = X.colwise().norm().transpose();
  for (Index j = 0; j < p; ++j) {
    if (scale(j) == 0.0) {
      throw SingularDesignError("singular design: column " + std::to_string(j + 1) +
                                " is identically zero");
    }
  }
  const MatrixXd Xs = X * scale.cwiseInverse().asDiagonal();
  Eigen::JacobiSVD<MatrixXd> svd(Xs, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const VectorXd& sv = svd.singularValues();
  if (sv(p - 1) <= kRankTolerance * sv(0)) {
    const VectorXd null_dir = scale.cwiseInverse().asDiagonal() * svd.matrixV().col(p - 1);
    const double peak = null_dir.cwiseAbs().maxCoeff();
    std::ostringstream msg;
    msg << "singular design: columns {";
    bool first = true;
    for (Index j = 0; j < p; ++j) {
      if (std::abs(null_dir(j)) > 1e-6 * peak) {
        msg << (first ? "" : ", ") << (j + 1);
        first = false;
      }
    }
    msg << "} are linearly dependent (relative singular value "
        << sv(p - 1) / sv(0) << ")";
    throw SingularDesignError(msg.str());
  }

  const VectorXd inv_sv = sv.cwiseInverse();
  const MatrixXd& V = svd.matrixV();
  const MatrixXd& U = svd.matrixU();

  LinearFit fit;
  fit.periods = T;
  fit.dof = T - p;
  fit.coeffs = scale.cwiseInverse().asDiagonal() * (V * (inv_sv.asDiagonal() * (U.transpose() * y)));
  fit.residuals = y - X * fit.coeffs;
  fit.rss = fit.residuals.squaredNorm();
  fit.sigma2_ml = fit.rss / static_cast<double>(T);
  fit.sigma2_unbiased = fit.rss / static_cast<double>(fit.dof);
  const MatrixXd W = V * inv_sv.asDiagonal();
  fit.xtx_inv = scale.cwiseInverse().asDiagonal() * (W * W.transpose()) *
                scale.cwiseInverse().asDiagonal();
  fit.xtx_inv = 0.5 * (fit.xtx_inv + fit.xtx_inv.transpose()).eval();
  fit.coeff_cov = fit.sigma2_unbiased * fit.xtx_inv;
  return fit;
}

VectorXd standard_errors(const LinearFit& fit) {
  return fit.coeff_cov.diagonal().cwiseMax(0.0).cwiseSqrt();
}

}  // namespace rror
