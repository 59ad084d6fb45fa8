#include "rror/inference.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>

#include "rror/distributions.hpp"
#include "rror/error.hpp"

namespace rror::inference {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

LinearRestriction::LinearRestriction(MatrixXd R, VectorXd r) : R_(std::move(R)), r_(std::move(r)) {
  if (R_.rows() < 1) throw InputError("restriction needs at least one row");
  if (R_.rows() != r_.size()) throw InputError("restriction: R and r row counts differ");
  if (R_.rows() > R_.cols())
    throw InputError("restriction: need q <= dim (q = " + std::to_string(R_.rows()) +
                     ", dim = " + std::to_string(R_.cols()) + ")");
  Eigen::FullPivLU<MatrixXd> lu(R_);
  lu.setThreshold(1e-12);
  if (lu.rank() != R_.rows())
    throw InputError("restriction: R must have full row rank q = " + std::to_string(R_.rows()));
}

namespace {

class RestrictionParser {
 public:
  RestrictionParser(const std::string& text, Index dim, bool has_delta)
      : text_(text), dim_(dim), has_delta_(has_delta) {}

  // One equation "lhs = number".
  std::pair<Eigen::RowVectorXd, double> equation() {
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(dim_);
    skip_ws();
    bool any = false;
    while (pos_ < text_.size() && text_[pos_] != '=') {
      double sign = 1.0;
      if (peek('+')) {
        ++pos_;
      } else if (peek('-')) {
        sign = -1.0;
        ++pos_;
      } else if (any) {
        fail("expected '+' or '-'");
      }
      skip_ws();
      double coef = 1.0;
      if (pos_ < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[pos_])) ||
                                  text_[pos_] == '.')) {
        coef = number();
        skip_ws();
        if (peek('*')) {
          ++pos_;
          skip_ws();
        }
      }
      const Index col = name();
      row(col) += sign * coef;
      any = true;
      skip_ws();
    }
    if (!any) fail("empty left-hand side");
    if (!peek('=')) fail("expected '='");
    ++pos_;
    skip_ws();
    double sign = 1.0;
    if (peek('-')) {
      sign = -1.0;
      ++pos_;
    } else if (peek('+')) {
      ++pos_;
    }
    const double rhs = sign * number();
    skip_ws();
    if (pos_ != text_.size()) fail("trailing characters");
    return {row, rhs};
  }

 private:
  bool peek(char c) const { return pos_ < text_.size() && text_[pos_] == c; }
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  [[noreturn]] void fail(const std::string& why) const {
    throw InputError("cannot parse restriction '" + text_ + "' at offset " +
                     std::to_string(pos_) + ": " + why);
  }
  double number() {
    std::size_t end = pos_;
    while (end < text_.size() &&
           (std::isdigit(static_cast<unsigned char>(text_[end])) || text_[end] == '.' ||
            text_[end] == 'e' || text_[end] == 'E' ||
            ((text_[end] == '-' || text_[end] == '+') && end > pos_ &&
             (text_[end - 1] == 'e' || text_[end - 1] == 'E'))))
      ++end;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text_.data() + pos_, text_.data() + end, v);
    if (ec != std::errc() || ptr == text_.data() + pos_) fail("expected a number");
    pos_ = static_cast<std::size_t>(ptr - text_.data());
    return v;
  }
  Index name() {
    std::size_t end = pos_;
    while (end < text_.size() && std::isalnum(static_cast<unsigned char>(text_[end]))) ++end;
    const std::string id = text_.substr(pos_, end - pos_);
    if (id.empty()) fail("expected a coefficient name");
    pos_ = end;
    if (id == "delta") {
      if (!has_delta_) fail("'delta' only exists in the dividend-paying private model");
      return dim_ - 1;
    }
    if (id.size() >= 2 && id[0] == 'k') {
      int idx = 0;
      const auto [ptr, ec] = std::from_chars(id.data() + 1, id.data() + id.size(), idx);
      const Index n_k = has_delta_ ? dim_ - 1 : dim_;
      if (ec == std::errc() && ptr == id.data() + id.size() && idx >= 1 && idx <= n_k)
        return idx - 1;
    }
    fail("unknown coefficient '" + id + "'");
  }

  std::string text_;
  Index dim_;
  bool has_delta_;
  std::size_t pos_ = 0;
};

}  // namespace

LinearRestriction parse_restriction(const std::string& expr, Index dim, bool has_delta) {
  std::vector<std::string> parts;
  std::stringstream ss(expr);
  std::string part;
  while (std::getline(ss, part, ';')) {
    if (part.find_first_not_of(" \t") != std::string::npos) parts.push_back(part);
  }
  if (parts.empty()) throw InputError("empty restriction");
  MatrixXd R(static_cast<Index>(parts.size()), dim);
  VectorXd r(static_cast<Index>(parts.size()));
  for (std::size_t i = 0; i < parts.size(); ++i) {
    RestrictionParser p(parts[i], dim, has_delta);
    auto [row, rhs] = p.equation();
    R.row(static_cast<Index>(i)) = row;
    r(static_cast<Index>(i)) = rhs;
  }
  return LinearRestriction(std::move(R), std::move(r));
}

CrossProducts cross_products(const MatrixXd& X) {
  CrossProducts xp;
  xp.xtx = X.transpose() * X;
  xp.periods = X.rows();
  return xp;
}

LinearFit fit_restricted(const LinearFit& fit, const CrossProducts& xp,
                         const LinearRestriction& restriction) {
  const MatrixXd& R = restriction.R();
  if (R.cols() != fit.dim()) throw InputError("restriction dimension does not match the fit");
  const MatrixXd& Ainv = fit.xtx_inv;
  const MatrixXd middle = R * Ainv * R.transpose();
  Eigen::LDLT<MatrixXd> ldlt(middle);
  const double scale = middle.diagonal().cwiseAbs().maxCoeff();
  if (ldlt.info() != Eigen::Success || !(scale > 0.0) ||
      ldlt.vectorD().cwiseAbs().minCoeff() <= 1e-13 * scale) {
    throw EstimationError("restriction is degenerate: R (X'X)^{-1} R' is singular");
  }
  const VectorXd gap = R * fit.coeffs - restriction.r();
  const MatrixXd AinvRt = Ainv * R.transpose();

  LinearFit out;
  out.coeffs = fit.coeffs - AinvRt * ldlt.solve(gap);
  const VectorXd shift = fit.coeffs - out.coeffs;
  const double added = std::max(shift.dot(xp.xtx * shift), 0.0);
  out.rss = fit.rss + added;
  out.periods = fit.periods;
  out.dof = fit.dof + restriction.q();
  out.sigma2_ml = out.rss / static_cast<double>(out.periods);
  out.sigma2_unbiased = out.rss / static_cast<double>(out.dof);
  out.xtx_inv = Ainv - AinvRt * ldlt.solve(AinvRt.transpose());
  out.xtx_inv = 0.5 * (out.xtx_inv + out.xtx_inv.transpose()).eval();
  out.coeff_cov = out.sigma2_unbiased * out.xtx_inv;
  return out;
}

double f_statistic_quadratic(const LinearFit& fit, const LinearRestriction& restriction) {
  const MatrixXd& R = restriction.R();
  const VectorXd gap = R * fit.coeffs - restriction.r();
  const MatrixXd middle = fit.sigma2_unbiased * (R * fit.xtx_inv * R.transpose());
  return gap.dot(middle.ldlt().solve(gap)) / static_cast<double>(restriction.q());
}

TestReport run_tests(const LinearFit& unrestricted, const LinearFit& restricted,
                     const LinearRestriction& restriction, Index periods) {
  if (!(unrestricted.rss > 0.0))
    throw ExactFitError("exact fit (e'e = 0): test statistics are undefined");
  TestReport rep;
  rep.restricted = restricted;
  rep.q = restriction.q();
  rep.periods = periods;
  rep.dof = periods - unrestricted.dim();
  rep.rss = unrestricted.rss;
  rep.restricted_rss = std::max(restricted.rss, unrestricted.rss);
  const double diff = rep.restricted_rss - rep.rss;
  const double x = diff / rep.rss;
  const auto T = static_cast<double>(periods);
  const auto q = static_cast<double>(rep.q);
  const auto dof = static_cast<double>(rep.dof);

  rep.f_stat = (diff / q) / (rep.rss / dof);
  rep.lr_stat = T * std::log1p(x);
  rep.w_stat = T * x;
  rep.lm_stat = T * diff / rep.restricted_rss;
  rep.f_p = dist::f_upper_tail(rep.f_stat, q, dof);
  rep.lr_p = dist::chi2_upper_tail(rep.lr_stat, q);
  rep.w_p = dist::chi2_upper_tail(rep.w_stat, q);
  rep.lm_p = dist::chi2_upper_tail(rep.lm_stat, q);

  if (rep.q == 1) {
    const Eigen::RowVectorXd row = restriction.R().row(0);
    const double gap = row.dot(unrestricted.coeffs) - restriction.r()(0);
    const double var = unrestricted.sigma2_unbiased * row.dot(unrestricted.xtx_inv * row.transpose());
    if (var > 0.0) {
      rep.t_stat = gap / std::sqrt(var);
      rep.t_p = dist::student_t_two_sided_p(*rep.t_stat, dof);
    }
  }
  return rep;
}

TTest t_test(const LinearFit& fit, Index i, double value) {
  if (i < 0 || i >= fit.dim()) throw InputError("coefficient index out of range");
  const double se = std::sqrt(std::max(fit.coeff_cov(i, i), 0.0));
  if (!(se > 0.0)) throw ExactFitError("exact fit (se = 0): t statistic is undefined");
  TTest out;
  out.t_stat = (fit.coeffs(i) - value) / se;
  out.p_value = dist::student_t_two_sided_p(out.t_stat, static_cast<double>(fit.dof));
  return out;
}

}  // namespace rror::inference
