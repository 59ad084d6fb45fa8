#include "rror/report.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rror/bayes.hpp"
#include "rror/ddm.hpp"
#include "rror/error.hpp"
#include "rror/inference.hpp"
#include "rror/private_valuation.hpp"
#include "rror/regime.hpp"

#ifndef RROR_VERSION
#define RROR_VERSION "0.0.0"
#endif

namespace rror::report {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json vector(const VectorXd& v) {
  Json out = Json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(number(v(i)));
  return out;
}

Json matrix(const MatrixXd& m) {
  Json out = Json::array();
  for (Index i = 0; i < m.rows(); ++i) out.push_back(vector(m.row(i).transpose()));
  return out;
}

Json linear_fit(const LinearFit& fit) {
  Json j;
  j["coeffs"] = vector(fit.coeffs);
  j["standard_errors"] = vector(standard_errors(fit));
  j["coeff_cov"] = matrix(fit.coeff_cov);
  j["rss"] = number(fit.rss);
  j["sigma2_ml"] = number(fit.sigma2_ml);
  j["sigma2_unbiased"] = number(fit.sigma2_unbiased);
  j["dof"] = fit.dof;
  j["periods"] = fit.periods;
  return j;
}

namespace {

std::vector<std::string> coefficient_names(const std::vector<std::string>& covariates, bool with_delta) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < covariates.size(); ++i) names.push_back("k" + std::to_string(i + 1));
  if (with_delta) names.push_back("delta");
  return names;
}

Json intervals(const LinearFit& fit, double alpha) {
  Json out = Json::array();
  for (Index i = 0; i < fit.dim(); ++i) {
    const auto [lo, hi] = ddm::confidence_interval(fit, i, alpha);
    out.push_back({number(lo), number(hi)});
  }
  return out;
}

std::string fmt(double v) { return std::isfinite(v) ? format_double(v) : std::string(); }

Report test_common(const LinearFit& fit, const MatrixXd& X, Index periods,
                   const inference::LinearRestriction& restr, const std::vector<std::string>& names,
                   std::vector<std::string> stats) {
  static const std::vector<std::string> all{"f", "t", "lr", "w", "lm"};
  if (stats.empty()) stats = all;
  for (const auto& s : stats)
    if (std::find(all.begin(), all.end(), s) == all.end())
      throw InputError("unknown statistic '" + s + "' (choose from f,t,lr,w,lm)");
  const auto restricted = inference::fit_restricted(fit, inference::cross_products(X), restr);
  const auto rep = inference::run_tests(fit, restricted, restr, periods);
  const bool want_t = std::find(stats.begin(), stats.end(), "t") != stats.end();
  if (want_t && !rep.t_stat)
    throw InputError("the t statistic needs a single restriction (q = 1)");

  Report out;
  Json& r = out.result;
  r["coefficient_names"] = names;
  r["restriction"] = {{"R", matrix(restr.R())}, {"r", vector(restr.r())}, {"q", restr.q()}};
  r["unrestricted"] = linear_fit(fit);
  r["restricted"] = {{"coeffs", vector(restricted.coeffs)},
                     {"rss", number(restricted.rss)},
                     {"max_constraint_violation",
                      number((restr.R() * restricted.coeffs - restr.r()).cwiseAbs().maxCoeff())}};
  r["periods"] = periods;
  r["dof"] = rep.dof;
  Json st = Json::object();
  const double q = static_cast<double>(rep.q);
  for (const auto& s : stats) {
    if (s == "f")
      st["f"] = {{"statistic", number(rep.f_stat)}, {"p_value", number(rep.f_p)},
                 {"distribution", "F"}, {"dof", {rep.q, rep.dof}}};
    if (s == "t")
      st["t"] = {{"statistic", number(*rep.t_stat)}, {"p_value", number(*rep.t_p)},
                 {"distribution", "t"}, {"dof", {rep.dof}}};
    if (s == "lr")
      st["lr"] = {{"statistic", number(rep.lr_stat)}, {"p_value", number(rep.lr_p)},
                  {"distribution", "chi2"}, {"dof", {q}}};
    if (s == "w")
      st["w"] = {{"statistic", number(rep.w_stat)}, {"p_value", number(rep.w_p)},
                 {"distribution", "chi2"}, {"dof", {q}}};
    if (s == "lm")
      st["lm"] = {{"statistic", number(rep.lm_stat)}, {"p_value", number(rep.lm_p)},
                  {"distribution", "chi2"}, {"dof", {q}}};
  }
  r["statistics"] = st;
  return out;
}

Report regimes_common(const regime::RegressionData& data, const std::vector<std::string>& names,
                      const RegimeOptions& opt) {
  if (opt.regimes < 1) throw InputError("need at least one regime");
  regime::EmOptions em;
  em.tol = opt.tol;
  em.max_iter = opt.max_iter;
  em.max_restarts = opt.max_restarts;
  em.seed = opt.seed;
  const auto fit = regime::em_fit(data, opt.regimes, em);
  const Index N = opt.regimes;
  const Index T = data.y.size();

  Report out;
  Json& r = out.result;
  r["coefficient_names"] = names;
  r["regimes"] = N;
  r["periods"] = T;
  Json regs = Json::array();
  for (Index j = 0; j < N; ++j) {
    const auto& c = fit.regimes[j];
    Json rj;
    rj["k"] = vector(c.k);
    rj["delta"] = c.delta ? number(*c.delta) : Json(nullptr);
    rj["m"] = c.m ? number(*c.m) : Json(nullptr);
    rj["mean_rate"] = number(fit.mean_rates(j));
    regs.push_back(rj);
  }
  r["sigma2"] = number(fit.sigma2);
  r["sigma"] = number(std::sqrt(fit.sigma2));
  r["P"] = matrix(fit.P);
  r["rho"] = vector(fit.rho);
  Json diag;
  try {
    const auto d = regime::chain_diagnostics(fit.P, fit.mean_rates);
    diag["ergodic"] = true;
    diag["pi"] = vector(d.pi);
    diag["k_inf"] = number(d.k_inf);
    diag["eigen_moduli"] = vector(d.eigen_moduli);
    for (Index j = 0; j < N; ++j) regs[j]["tau"] = number(d.tau(j));
    diag["message"] = nullptr;
  } catch (const EstimationError& e) {
    diag["ergodic"] = false;
    diag["pi"] = nullptr;
    diag["k_inf"] = nullptr;
    const Eigen::EigenSolver<MatrixXd> es(fit.P);
    VectorXd moduli = es.eigenvalues().cwiseAbs();
    std::sort(moduli.data(), moduli.data() + moduli.size(), std::greater<>());
    diag["eigen_moduli"] = vector(moduli);
    for (Index j = 0; j < N; ++j) regs[j]["tau"] = number(1.0 / (1.0 - fit.P(j, j)));
    diag["message"] = e.what();
  }
  r["regime_parameters"] = regs;
  r["diagnostics"] = diag;
  r["loglik"] = number(fit.loglik);
  r["loglik_trace"] = Json::array();
  for (double v : fit.loglik_trace) r["loglik_trace"].push_back(number(v));
  r["iterations"] = fit.iterations;
  r["converged"] = fit.converged;
  r["restarts"] = fit.restarts;
  r["smoothed"] = matrix(fit.smoothed);

  std::ostringstream csv;
  csv << "t";
  for (Index j = 1; j <= N; ++j) csv << ",smoothed_" << j;
  for (Index j = 1; j <= N; ++j) csv << ",filtered_" << j;
  csv << '\n';
  for (Index t = 0; t < T; ++t) {
    csv << (t + 1);
    for (Index j = 0; j < N; ++j) csv << ',' << fmt(fit.smoothed(t, j));
    for (Index j = 0; j < N; ++j) csv << ',' << fmt(fit.filtered(t, j));
    csv << '\n';
  }
  out.series.push_back({"probabilities", csv.str()});
  return out;
}

Report bayes_common(const MatrixXd& X, const VectorXd& y, const std::vector<std::string>& names,
                    const BayesOptions& opt) {
  const Index dim = X.cols();
  const VectorXd beta0 = opt.beta0 ? *opt.beta0 : VectorXd::Zero(dim);
  if (beta0.size() != dim)
    throw InputError("prior mean has " + std::to_string(beta0.size()) + " entries, model has " +
                     std::to_string(dim) + " coefficients");
  if (!(opt.b0_scale > 0.0)) throw InputError("prior scale must be positive");
  const bayes::NigPrior prior(beta0, opt.b0_scale * MatrixXd::Identity(dim, dim), opt.nu0, opt.lambda0);
  const auto post = bayes::posterior(prior, X, y);
  const auto est = bayes::bayes_estimators(post);
  const auto draws = bayes::gibbs_sample(post, opt.draws, opt.burn_in, opt.seed);

  Report out;
  Json& r = out.result;
  r["coefficient_names"] = names;
  r["periods"] = X.rows();
  r["prior"] = {{"beta0", vector(beta0)}, {"B0_scale", number(opt.b0_scale)},
                {"nu0", number(opt.nu0)}, {"lambda0", number(opt.lambda0)}};
  r["posterior"] = {{"beta_bar", vector(post.beta_bar)}, {"B_bar", matrix(post.B_bar)},
                    {"nu_bar", number(post.nu_bar)}, {"lambda_bar", number(post.lambda_bar)}};
  r["estimators"] = {{"beta_mean", vector(est.beta_mean)}, {"precision_mean", number(est.precision_mean)}};
  r["draws"] = {{"count", opt.draws}, {"burn_in", opt.burn_in}, {"seed", opt.seed}};

  auto summarize = [](const VectorXd& v) {
    std::vector<double> vals(v.data(), v.data() + v.size());
    return Json{{"mean", number(v.mean())},
                {"q025", number(bayes::empirical_quantile(vals, 0.025))},
                {"q500", number(bayes::empirical_quantile(vals, 0.5))},
                {"q975", number(bayes::empirical_quantile(vals, 0.975))}};
  };
  Json coefs = Json::array();
  for (Index j = 0; j < dim; ++j) coefs.push_back(summarize(draws.beta.col(j)));
  r["summary"] = {{"coefficients", coefs}, {"sigma2", summarize(draws.sigma2)}};

  std::ostringstream csv;
  csv << "draw";
  for (const auto& n : names) csv << ',' << n;
  csv << ",sigma2\n";
  for (Index s = 0; s < draws.beta.rows(); ++s) {
    csv << (s + 1);
    for (Index j = 0; j < dim; ++j) csv << ',' << fmt(draws.beta(s, j));
    csv << ',' << fmt(draws.sigma2(s)) << '\n';
  }
  out.series.push_back({"draws", csv.str()});
  return out;
}

}  // namespace

Report estimate_public(const ObservationSet& obs, double alpha) {
  const auto design = ddm::build_design(obs);
  const auto fit = ddm::fit_ml(design);
  Report out;
  Json& r = out.result;
  r["model"] = "ddm";
  r["coefficient_names"] = coefficient_names(obs.covariate_names(), false);
  r["covariate_names"] = obs.covariate_names();
  r["fit"] = linear_fit(fit);
  r["alpha"] = alpha;
  r["confidence_intervals"] = intervals(fit, alpha);
  const auto nonpos = ddm::nonpositive_rate_periods(obs, fit);
  r["nonpositive_rate_periods"] = Json(std::vector<Index>(nonpos.begin(), nonpos.end()));
  return out;
}

Report estimate_private(const PrivateObservationSet& obs, double alpha) {
  const auto design = private_valuation::build_private_design(obs);
  const auto pf = private_valuation::fit_private(design);
  Report out;
  Json& r = out.result;
  r["model"] = "private";
  r["paying"] = obs.paying();
  r["coefficient_names"] = coefficient_names(obs.covariate_names(), obs.paying());
  r["covariate_names"] = obs.covariate_names();
  r["fit"] = linear_fit(pf.fit);
  r["alpha"] = alpha;
  r["confidence_intervals"] = intervals(pf.fit, alpha);
  r["k"] = vector(pf.k);
  r["delta"] = pf.delta ? number(*pf.delta) : Json(nullptr);
  r["m"] = pf.m ? number(*pf.m) : Json(nullptr);
  r["delta_nonpositive"] = pf.delta_nonpositive;
  return out;
}

Report test_public(const ObservationSet& obs, const std::string& restriction,
                   const std::vector<std::string>& stats) {
  const auto design = ddm::build_design(obs);
  const auto fit = ddm::fit_ml(design);
  const auto restr = inference::parse_restriction(restriction, fit.dim(), false);
  auto out = test_common(fit, design.X, obs.periods(), restr,
                         coefficient_names(obs.covariate_names(), false), stats);
  out.result["model"] = "ddm";
  out.result["expression"] = restriction;
  return out;
}

Report test_private(const PrivateObservationSet& obs, const std::string& restriction,
                    const std::vector<std::string>& stats) {
  const auto design = private_valuation::build_private_design(obs);
  const auto pf = private_valuation::fit_private(design);
  const auto restr = inference::parse_restriction(restriction, pf.fit.dim(), obs.paying());
  auto out = test_common(pf.fit, design.X, obs.periods(), restr,
                         coefficient_names(obs.covariate_names(), obs.paying()), stats);
  out.result["model"] = "private";
  out.result["paying"] = obs.paying();
  out.result["expression"] = restriction;
  return out;
}

Report regimes_public(const ObservationSet& obs, const RegimeOptions& opt) {
  auto out = regimes_common(regime::regression_data(obs), coefficient_names(obs.covariate_names(), false), opt);
  out.result["model"] = "ddm";
  return out;
}

Report regimes_private(const PrivateObservationSet& obs, const RegimeOptions& opt) {
  auto out = regimes_common(regime::regression_data(obs),
                            coefficient_names(obs.covariate_names(), obs.paying()), opt);
  out.result["model"] = "private";
  out.result["paying"] = obs.paying();
  return out;
}

Report bayes_public(const ObservationSet& obs, const BayesOptions& opt) {
  const auto design = ddm::build_design(obs);
  auto out = bayes_common(design.X, design.y, coefficient_names(obs.covariate_names(), false), opt);
  out.result["model"] = "ddm";
  return out;
}

Report bayes_private(const PrivateObservationSet& obs, const BayesOptions& opt) {
  const auto design = private_valuation::build_private_design(obs);
  auto out = bayes_common(design.X, design.y, coefficient_names(obs.covariate_names(), obs.paying()), opt);
  out.result["model"] = "private";
  out.result["paying"] = obs.paying();
  return out;
}

Report kalman_fit(const PrivateObservationSet& obs, const KalmanOptions& opt) {
  const auto data = kalman::SsmData::from(obs);
  kalman::SsmSpec init = kalman::default_init(data);
  if (opt.k.size() > 0) {
    if (opt.k.size() != init.k.size())
      throw InputError("initial k has " + std::to_string(opt.k.size()) + " entries, model has " +
                       std::to_string(init.k.size()));
    init.k = opt.k;
  }
  auto set = [](double& dst, double v) {
    if (!std::isnan(v)) dst = v;
  };
  set(init.phi0, opt.phi0);
  set(init.phi1, opt.phi1);
  set(init.mu0, opt.mu0);
  set(init.sigma0_sq, opt.sigma0_sq);
  set(init.sigma_u_sq, opt.sigma_u_sq);
  set(init.sigma_v_sq, opt.sigma_v_sq);
  if (opt.horizon < 0) throw InputError("forecast horizon must be non-negative");
  if (opt.horizon > 0 && !opt.future) throw InputError("a forecast needs future book growth and covariates");

  const auto fit = kalman::em_estimate(data, init, opt.tol, opt.max_iter, opt.fixed);
  const bool paying = data.model == kalman::SsmModel::Paying;
  const Index T = data.periods();

  Report out;
  Json& r = out.result;
  r["model"] = paying ? "paying" : "nonpaying";
  r["periods"] = T;
  r["coefficient_names"] = coefficient_names(obs.covariate_names(), false);
  auto params = [](const kalman::SsmSpec& s) {
    return Json{{"k", vector(s.k)},         {"phi0", number(s.phi0)},
                {"phi1", number(s.phi1)},   {"mu0", number(s.mu0)},
                {"sigma0_sq", number(s.sigma0_sq)}, {"sigma_u_sq", number(s.sigma_u_sq)},
                {"sigma_v_sq", number(s.sigma_v_sq)}};
  };
  r["initial"] = params(init);
  r["parameters"] = params(fit.spec);
  r["fixed"] = {{"k", opt.fixed.k}, {"phi", opt.fixed.phi}, {"sigma_u_sq", opt.fixed.sigma_u_sq},
                {"sigma_v_sq", opt.fixed.sigma_v_sq}, {"initial", opt.fixed.initial}};
  r["state"] = paying ? "price_to_book" : "log_price_to_book";
  r["loglik"] = number(fit.loglik);
  r["loglik_trace"] = Json::array();
  for (double v : fit.loglik_trace) r["loglik_trace"].push_back(number(v));
  r["iterations"] = fit.iterations;
  r["converged"] = fit.converged;
  r["sigma_u_floored"] = fit.sigma_u_floored;
  r["sigma_v_floored"] = fit.sigma_v_floored;

  const MatrixXd& C = data.covariates;
  const Eigen::RowVectorXd cbar = C.colwise().mean();
  r["mean_required_rate"] = number(kalman::required_rate(fit.spec, cbar));

  constexpr double z975 = 1.959963984540054;
  Json smoothed = Json::array();
  std::ostringstream csv;
  csv << "t,mean,variance,lower,upper";
  if (!paying) csv << ",ratio,ratio_lower,ratio_upper";
  csv << ",required_rate\n";
  for (Index t = 0; t <= T; ++t) {
    const double mean = fit.smoothed.z_smooth[t](0);
    const double var = std::max(fit.smoothed.P_smooth[t](0, 0), 0.0);
    const double lo = mean - z975 * std::sqrt(var), hi = mean + z975 * std::sqrt(var);
    const double rate = t == 0 ? std::numeric_limits<double>::quiet_NaN()
                               : kalman::required_rate(fit.spec, C.row(t - 1));
    Json row{{"t", t}, {"mean", number(mean)}, {"variance", number(var)},
             {"lower", number(lo)}, {"upper", number(hi)}};
    csv << t << ',' << fmt(mean) << ',' << fmt(var) << ',' << fmt(lo) << ',' << fmt(hi);
    if (!paying) {
      row["ratio"] = number(std::exp(mean));
      row["ratio_lower"] = number(std::exp(lo));
      row["ratio_upper"] = number(std::exp(hi));
      csv << ',' << fmt(std::exp(mean)) << ',' << fmt(std::exp(lo)) << ',' << fmt(std::exp(hi));
    }
    csv << ',' << fmt(rate) << '\n';
    smoothed.push_back(row);
  }
  r["smoothed"] = smoothed;
  out.series.push_back({"smoothed", csv.str()});

  if (opt.horizon > 0) {
    const auto future = kalman::SsmData::from(*opt.future);
    if (future.model != data.model) throw InputError("future data must match the model type");
    const auto fc = kalman::forecast(fit.spec, fit.filtered, future, opt.horizon);
    Json rows = Json::array();
    for (int h = 0; h < opt.horizon; ++h) {
      rows.push_back({{"h", h + 1},
                      {"state_mean", number(fc.z[h](0))},
                      {"state_variance", number(fc.P[h](0, 0))},
                      {"y_mean", number(fc.y(h))},
                      {"y_variance", number(fc.y_var(h))}});
    }
    r["forecast"] = rows;
  } else {
    r["forecast"] = nullptr;
  }
  return out;
}

Report simulate_run(const simulate::SimConfig& config) {
  const auto sim = simulate::simulate(config);
  Report out;
  Json& r = out.result;
  r["family"] = simulate::family_name(config.family);
  r["periods"] = config.periods;
  r["seed"] = config.seed;
  r["config"] = sim_config_to_json(config);
  std::ostringstream truth;
  if (!sim.regime_path.empty()) {
    VectorXd counts = VectorXd::Zero(config.k.cols());
    truth << "t,regime\n";
    for (std::size_t t = 0; t < sim.regime_path.size(); ++t) {
      truth << (t + 1) << ',' << (sim.regime_path[t] + 1) << '\n';
      counts(sim.regime_path[t]) += 1.0;
    }
    r["regime_counts"] = vector(counts);
  } else if (sim.state_path.size() > 0) {
    truth << "t,state\n";
    for (Index t = 0; t < sim.state_path.size(); ++t) truth << t << ',' << fmt(sim.state_path(t)) << '\n';
  }
  if (sim.public_obs) {
    r["kind"] = "public";
    r["covariate_names"] = sim.public_obs->covariate_names();
    out.series.push_back({"data", write_public_csv(*sim.public_obs)});
  } else {
    r["kind"] = "private";
    r["paying"] = sim.private_obs->paying();
    r["covariate_names"] = sim.private_obs->covariate_names();
    out.series.push_back({"data", write_private_csv(*sim.private_obs)});
  }
  if (!truth.str().empty()) out.series.push_back({"truth", truth.str()});
  return out;
}

namespace {

MatrixXd matrix_from_json(const Json& j, const char* key) {
  if (!j.is_array() || j.empty()) throw InputError(std::string("'") + key + "' must be a non-empty array");
  const Index rows = static_cast<Index>(j.size());
  const Index cols = static_cast<Index>(j[0].is_array() ? j[0].size() : 0);
  if (cols == 0) throw InputError(std::string("'") + key + "' must be an array of rows");
  MatrixXd m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    const Json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Index>(row.size()) != cols)
      throw InputError(std::string("'") + key + "' rows must all have " + std::to_string(cols) + " entries");
    for (Index c = 0; c < cols; ++c) {
      if (!row[static_cast<std::size_t>(c)].is_number())
        throw InputError(std::string("'") + key + "' entries must be numbers");
      m(i, c) = row[static_cast<std::size_t>(c)].get<double>();
    }
  }
  return m;
}

VectorXd vector_from_json(const Json& j, const char* key) {
  if (!j.is_array() || j.empty()) throw InputError(std::string("'") + key + "' must be a non-empty array");
  VectorXd v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw InputError(std::string("'") + key + "' entries must be numbers");
    v(static_cast<Index>(i)) = j[i].get<double>();
  }
  return v;
}

double number_from_json(const Json& j, const char* key) {
  if (!j.is_number()) throw InputError(std::string("'") + key + "' must be a number");
  return j.get<double>();
}

MatrixXd persistent_chain(Index N, double stay) {
  if (N == 1) return MatrixXd::Ones(1, 1);
  MatrixXd P = MatrixXd::Constant(N, N, (1.0 - stay) / static_cast<double>(N - 1));
  P.diagonal().setConstant(stay);
  return P;
}

}  // namespace

simulate::SimConfig sim_config_from_json(const Json& j) {
  using simulate::Family;
  if (!j.is_object()) throw InputError("simulation config must be a JSON object");
  if (!j.contains("family") || !j["family"].is_string()) throw InputError("simulation config needs a 'family' string");
  simulate::SimConfig c;
  c.family = simulate::parse_family(j["family"].get<std::string>());
  const bool regimes = c.family == Family::RegimeDdm || c.family == Family::PrivateRegime;

  switch (c.family) {
    case Family::PublicDdm:
      c.k = MatrixXd::Constant(1, 1, 0.025);
      c.sigma = 1.0;
      break;
    case Family::RegimeDdm:
      c.k.resize(1, 2);
      c.k << 0.11, -0.08;
      c.sigma = 3.0;
      c.initial_price = 1000.0;
      break;
    case Family::Private:
      c.k = MatrixXd::Constant(1, 1, 0.09);
      c.delta = VectorXd::Constant(1, 0.3);
      c.sigma = 0.01;
      break;
    case Family::PrivateRegime:
      c.k.resize(1, 2);
      c.k << 0.12, 0.04;
      c.delta = VectorXd::Constant(2, 0.3);
      c.sigma = 0.01;
      break;
    case Family::SsmPaying:
      c.ssm.model = kalman::SsmModel::Paying;
      c.ssm.k = VectorXd::Constant(1, 0.08);
      c.ssm.phi0 = 0.2;
      c.ssm.phi1 = 0.9;
      c.ssm.mu0 = 2.0;
      c.ssm.sigma0_sq = 0.01;
      c.ssm.sigma_u_sq = 1e-4;
      c.ssm.sigma_v_sq = 4e-4;
      c.book_growth_sd = 0.01;
      break;
    case Family::SsmNonPaying:
      c.ssm.model = kalman::SsmModel::NonPaying;
      c.ssm.k = VectorXd::Constant(1, 0.02);
      c.ssm.phi0 = 0.05;
      c.ssm.phi1 = 0.9;
      c.ssm.mu0 = 0.5;
      c.ssm.sigma0_sq = 0.01;
      c.ssm.sigma_u_sq = 1e-4;
      c.ssm.sigma_v_sq = 0.0025;
      break;
  }

  for (const auto& [key, val] : j.items()) {
    if (key == "family") continue;
    if (key == "periods") {
      if (!val.is_number_integer()) throw InputError("'periods' must be an integer");
      c.periods = val.get<Index>();
    } else if (key == "seed") {
      if (!val.is_number_unsigned()) throw InputError("'seed' must be a non-negative integer");
      c.seed = val.get<std::uint64_t>();
    } else if (key == "k") {
      if (val.is_array() && !val.empty() && val[0].is_number()) {
        const VectorXd v = vector_from_json(val, "k");
        c.k = regimes ? MatrixXd(v.transpose()) : MatrixXd(v);
      } else {
        c.k = matrix_from_json(val, "k");
      }
    } else if (key == "delta") {
      c.delta = vector_from_json(val, "delta");
    } else if (key == "paying") {
      if (!val.is_boolean()) throw InputError("'paying' must be true or false");
      c.paying = val.get<bool>();
    } else if (key == "sigma") {
      c.sigma = number_from_json(val, "sigma");
    } else if (key == "P") {
      c.P = matrix_from_json(val, "P");
    } else if (key == "rho") {
      c.rho = vector_from_json(val, "rho");
    } else if (key == "initial_price") {
      c.initial_price = number_from_json(val, "initial_price");
    } else if (key == "payout_fraction") {
      c.payout_fraction = number_from_json(val, "payout_fraction");
    } else if (key == "covariate_sd") {
      c.covariate_sd = number_from_json(val, "covariate_sd");
    } else if (key == "div_to_book_mean") {
      c.div_to_book_mean = number_from_json(val, "div_to_book_mean");
    } else if (key == "book_growth_mean") {
      c.book_growth_mean = number_from_json(val, "book_growth_mean");
    } else if (key == "book_growth_sd") {
      c.book_growth_sd = number_from_json(val, "book_growth_sd");
    } else if (key == "ssm") {
      if (!val.is_object()) throw InputError("'ssm' must be an object");
      for (const auto& [sk, sv] : val.items()) {
        if (sk == "k") c.ssm.k = vector_from_json(sv, "ssm.k");
        else if (sk == "phi0") c.ssm.phi0 = number_from_json(sv, "ssm.phi0");
        else if (sk == "phi1") c.ssm.phi1 = number_from_json(sv, "ssm.phi1");
        else if (sk == "mu0") c.ssm.mu0 = number_from_json(sv, "ssm.mu0");
        else if (sk == "sigma0_sq") c.ssm.sigma0_sq = number_from_json(sv, "ssm.sigma0_sq");
        else if (sk == "sigma_u_sq") c.ssm.sigma_u_sq = number_from_json(sv, "ssm.sigma_u_sq");
        else if (sk == "sigma_v_sq") c.ssm.sigma_v_sq = number_from_json(sv, "ssm.sigma_v_sq");
        else throw InputError("unknown key 'ssm." + sk + "' in simulation config");
      }
    } else {
      throw InputError("unknown key '" + key + "' in simulation config");
    }
  }

  // Chain defaults follow the number of regimes in k.
  if (regimes) {
    const Index N = c.k.cols();
    if (c.P.size() == 0) c.P = persistent_chain(N, 0.9);
    if (c.rho.size() == 0) c.rho = VectorXd::Constant(N, 1.0 / static_cast<double>(N));
    if (!j.contains("delta") && c.family == Family::PrivateRegime) c.delta = VectorXd::Constant(N, 0.3);
  }
  c.validate();
  return c;
}

Json sim_config_to_json(const simulate::SimConfig& c) {
  using simulate::Family;
  Json j;
  j["family"] = simulate::family_name(c.family);
  j["periods"] = c.periods;
  j["seed"] = c.seed;
  j["covariate_sd"] = c.covariate_sd;
  if (c.family == Family::SsmPaying || c.family == Family::SsmNonPaying) {
    j["ssm"] = {{"k", vector(c.ssm.k)},
                {"phi0", c.ssm.phi0},
                {"phi1", c.ssm.phi1},
                {"mu0", c.ssm.mu0},
                {"sigma0_sq", c.ssm.sigma0_sq},
                {"sigma_u_sq", c.ssm.sigma_u_sq},
                {"sigma_v_sq", c.ssm.sigma_v_sq}};
    if (c.family == Family::SsmPaying) {
      j["book_growth_mean"] = c.book_growth_mean;
      j["book_growth_sd"] = c.book_growth_sd;
    }
    return j;
  }
  j["k"] = matrix(c.k);
  j["sigma"] = c.sigma;
  if (c.family == Family::RegimeDdm || c.family == Family::PrivateRegime) {
    j["P"] = matrix(c.P);
    j["rho"] = vector(c.rho);
  }
  if (c.family == Family::PublicDdm || c.family == Family::RegimeDdm) {
    j["initial_price"] = c.initial_price;
    j["payout_fraction"] = c.payout_fraction;
  } else {
    j["paying"] = c.paying;
    if (c.paying) {
      j["delta"] = vector(c.delta);
      j["div_to_book_mean"] = c.div_to_book_mean;
    }
  }
  return j;
}

std::string version() { return RROR_VERSION; }

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw EstimationError("SHA-256 digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

std::string output_digest(const Report& rep) {
  std::string bytes = rep.result.dump();
  for (const auto& s : rep.series) {
    bytes += '\0';
    bytes += s.name;
    bytes += '\0';
    bytes += s.csv;
  }
  return "sha256:" + sha256_hex(bytes);
}

Json finalize(const Report& rep, const Manifest& manifest) {
  Json m;
  m["command"] = manifest.command;
  m["inputs"] = manifest.inputs;
  m["options"] = manifest.options;
  m["seed"] = manifest.seed ? Json(*manifest.seed) : Json(nullptr);
  m["version"] = version();
  m["output_digest"] = output_digest(rep);
  Json out;
  out["manifest"] = m;
  out["result"] = rep.result;
  return out;
}

}  // namespace rror::report
