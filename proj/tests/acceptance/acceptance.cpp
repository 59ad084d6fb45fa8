// Acceptance run: one PASS/FAIL line per criterion, each at its stated
// tolerance and within its runtime budget. Exit status is the number of
// failed criteria (capped at 1).

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rror/bayes.hpp"
#include "rror/ddm.hpp"
#include "rror/distributions.hpp"
#include "rror/error.hpp"
#include "rror/inference.hpp"
#include "rror/kalman.hpp"
#include "rror/linear.hpp"
#include "rror/private_valuation.hpp"
#include "rror/regime.hpp"
#include "rror/rng.hpp"
#include "rror/simulate.hpp"

using namespace rror;
using Eigen::Index;
using Eigen::Matrix2d;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Accumulates the worst deviation of a family of checks.
struct Worst {
  double value = 0.0;
  void see(double v) { value = std::max(value, std::isnan(v) ? INFINITY : v); }
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

MatrixXd random_stochastic(RandomStream& rng, int N) {
  MatrixXd P(N, N);
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < N; ++j) P(i, j) = 0.05 + rng.uniform();
    P.row(i) /= P.row(i).sum();
  }
  return P;
}

VectorXd random_simplex(RandomStream& rng, int N) {
  VectorXd v(N);
  for (int i = 0; i < N; ++i) v(i) = 0.05 + rng.uniform();
  return v / v.sum();
}

// --- 1 ---------------------------------------------------------------------

Outcome table_rows() {
  MatrixXd pep(3, 3);
  pep << 0.000, 0.756, 0.244, 0.077, 0.812, 0.111, 0.781, 0.000, 0.219;
  VectorXd rates(3);
  rates << 0.1139, 0.0289, -0.0825;
  const auto d = regime::chain_diagnostics(pep, rates);
  VectorXd printed(3);
  printed << 0.169, 0.681, 0.150;
  const double pi_err = (d.pi - printed).cwiseAbs().maxCoeff();
  const double kinf_err = std::abs(d.k_inf - 0.0266);

  MatrixXd jnj(3, 3);
  jnj << 0.000, 1.000, 0.000, 0.000, 0.762, 0.238, 0.492, 0.000, 0.508;
  VectorXd jrates(3);
  jrates << 0.1043, 0.0472, -0.0486;
  const auto dj = regime::chain_diagnostics(jnj, jrates);
  const double tau_err = std::abs(dj.tau(1) - 4.199);

  Outcome o;
  o.pass = pi_err <= 0.005 && kinf_err <= 0.0002 && tau_err <= 0.01;
  o.detail = "pi err " + fmt("%.4f", pi_err) + ", k_inf " + fmt("%.4f%%", 100 * d.k_inf) + ", tau2 " +
             fmt("%.4f", dj.tau(1));
  return o;
}

// --- 2 ---------------------------------------------------------------------

Outcome hmm_oracle() {
  RandomStream rng(2024);
  Worst err;
  int instances = 0;
  for (int i = 0; i < 200; ++i) {
    const int N = 1 + i % 3;
    const int T = 1 + (i / 3) % 8;
    const regime::MarkovChainSpec chain(random_stochastic(rng, N), random_simplex(rng, N));
    MatrixXd dens(T, N);
    for (int t = 0; t < T; ++t)
      for (int j = 0; j < N; ++j) dens(t, j) = 0.01 + 2.0 * rng.uniform();
    const auto f = regime::hamilton_filter(dens.array().log().matrix(), chain);
    const MatrixXd sm = regime::kim_smoother(f, chain);
    const auto exact = simulate::enumerate_hmm_posterior(dens, chain);
    err.see((sm - exact.marginals).cwiseAbs().maxCoeff());
    err.see(std::abs(f.loglik - std::log(exact.likelihood)));
    for (int t = 1; t <= T; ++t) {
      const auto partial = simulate::enumerate_hmm_posterior(dens.topRows(t), chain);
      err.see((f.filtered.row(t - 1) - partial.marginals.row(t - 1)).cwiseAbs().maxCoeff());
    }
    for (int t = 2; t <= T; ++t)
      err.see((regime::joint_smoothed(chain, f, sm, t) - exact.joints[static_cast<std::size_t>(t - 2)])
                  .cwiseAbs()
                  .maxCoeff());
    ++instances;
  }
  return {instances == 200 && err.value <= 1e-10,
          std::to_string(instances) + " instances, max err " + fmt("%.2e", err.value)};
}

// --- 3 ---------------------------------------------------------------------

kalman::SsmData random_ssm_data(RandomStream& rng, kalman::SsmModel model, int T, int n) {
  kalman::SsmData d;
  d.model = model;
  d.book_growth.resize(T);
  d.covariates.resize(T, n);
  if (model == kalman::SsmModel::Paying) d.div_to_book.resize(T);
  for (int t = 0; t < T; ++t) {
    d.book_growth(t) = 0.1 * rng.normal();
    d.covariates(t, 0) = 1.0;
    for (int i = 1; i < n; ++i) d.covariates(t, i) = rng.normal();
    if (model == kalman::SsmModel::Paying) d.div_to_book(t) = 0.05 * rng.uniform();
  }
  return d;
}

kalman::SsmSpec random_ssm_spec(RandomStream& rng, kalman::SsmModel model, int n) {
  kalman::SsmSpec s;
  s.model = model;
  s.k.resize(n);
  for (int i = 0; i < n; ++i) s.k(i) = 0.05 * rng.normal();
  s.phi0 = 0.3 * rng.normal();
  s.phi1 = 0.5 + 0.6 * rng.uniform();
  s.mu0 = 1.0 + rng.normal();
  s.sigma0_sq = 0.1 + rng.uniform();
  s.sigma_u_sq = 0.01 + 0.2 * rng.uniform();
  s.sigma_v_sq = 0.01 + 0.2 * rng.uniform();
  return s;
}

Outcome kalman_oracle() {
  RandomStream rng(2025);
  Worst err;
  for (int i = 0; i < 200; ++i) {
    const auto model = i % 2 ? kalman::SsmModel::NonPaying : kalman::SsmModel::Paying;
    const int T = 1 + (i / 2) % 8;
    const int n = 1 + (i / 16) % 2;
    const auto data = random_ssm_data(rng, model, T, n);
    const auto spec = random_ssm_spec(rng, model, n);
    const auto sys = kalman::build_system(spec, data);
    const auto f = kalman::filter(spec, sys);
    const auto sm = kalman::smooth(f, sys);
    const auto oracle = simulate::joint_gaussian_oracle(spec, sys);
    for (int t = 0; t <= T; ++t) {
      const auto k = static_cast<std::size_t>(t);
      err.see((f.z_filt[k] - oracle.filtered.mean[k]).cwiseAbs().maxCoeff());
      err.see((f.P_filt[k] - oracle.filtered.cov[k]).cwiseAbs().maxCoeff());
      err.see((sm.z_smooth[k] - oracle.smoothed.mean[k]).cwiseAbs().maxCoeff());
      err.see((sm.P_smooth[k] - oracle.smoothed.cov[k]).cwiseAbs().maxCoeff());
    }
    for (int t = 0; t < T; ++t) {
      const auto k = static_cast<std::size_t>(t);
      err.see((sm.cross[k] - oracle.cross[k]).cwiseAbs().maxCoeff());
    }
  }
  return {err.value <= 1e-8, "200 instances, max err " + fmt("%.2e", err.value)};
}

// --- 4 ---------------------------------------------------------------------

// Under k = (0.11, -0.08) with persistence 0.9 the log price wanders like a
// random walk with a long-run sd near 0.28 per period, so a start near 1e3
// often drifts to zero within 2000 periods. 1e5 keeps almost every seed
// inside the domain; fitted errors are tiny at every start tried.
constexpr double kRegimeInitialPrice = 1e5;

// The monotonicity runs start lower. From 1e5 prices reach 1e9-1e10 within
// 300 periods, where one ulp of k already moves the loglik by ~3e-8, so a
// 1e-8 drop would be below double resolution.
constexpr double kMonotoneInitialPrice = 1e4;

double worst_drop(const std::vector<double>& trace) {
  double drop = 0.0;
  for (std::size_t i = 1; i < trace.size(); ++i) drop = std::max(drop, trace[i - 1] - trace[i]);
  return drop;
}

Outcome em_monotone() {
  Worst regime_drop, kalman_drop;
  int regime_runs = 0, kalman_runs = 0;
  for (int run = 0; run < 50; ++run) {
    simulate::SimConfig cfg;
    cfg.family = simulate::Family::RegimeDdm;
    cfg.periods = 300;
    cfg.seed = 4000 + static_cast<std::uint64_t>(run);
    const int N = 2 + run % 2;
    cfg.k = MatrixXd(1, N);
    if (N == 2) cfg.k << 0.11, -0.08;
    else cfg.k << 0.11, 0.03, -0.08;
    cfg.P = MatrixXd::Constant(N, N, 0.1 / (N - 1));
    cfg.P.diagonal().setConstant(0.9);
    cfg.rho = VectorXd::Constant(N, 1.0 / N);
    cfg.sigma = 3.0;
    cfg.initial_price = kMonotoneInitialPrice;
    cfg.payout_fraction = 0.0;
    regime::EmOptions opt;
    opt.seed = cfg.seed;
    opt.max_iter = 300;
    try {
      const auto data = regime::regression_data(*simulate::simulate(cfg).public_obs);
      const auto fit = regime::em_fit(data, N, opt);
      regime_drop.see(worst_drop(fit.loglik_trace));
      ++regime_runs;
    } catch (const Error& e) {
      std::printf("      regime run %d: %s\n", run, e.what());
    }
  }
  RandomStream rng(4100);
  for (int run = 0; run < 50; ++run) {
    const auto model = run % 2 ? kalman::SsmModel::NonPaying : kalman::SsmModel::Paying;
    const auto data = random_ssm_data(rng, model, 80, 1 + run % 2);
    const auto init = random_ssm_spec(rng, model, 1 + run % 2);
    const auto fit = kalman::em_estimate(data, init, 1e-10, 200);
    kalman_drop.see(worst_drop(fit.loglik_trace));
    ++kalman_runs;
  }
  Outcome o;
  o.pass = regime_runs == 50 && kalman_runs == 50 && regime_drop.value <= 1e-8 && kalman_drop.value <= 1e-8;
  o.detail = std::to_string(regime_runs) + " regime + " + std::to_string(kalman_runs) +
             " Kalman runs, worst drop " + fmt("%.2e", std::max(regime_drop.value, kalman_drop.value));
  return o;
}

// --- 5 ---------------------------------------------------------------------

Outcome recovery() {
  int hits = 0, domain_exits = 0;
  double worst = 0.0;
  for (int seed = 0; seed < 50; ++seed) {
    simulate::SimConfig cfg;
    cfg.family = simulate::Family::RegimeDdm;
    cfg.periods = 2000;
    cfg.seed = 5000 + static_cast<std::uint64_t>(seed);
    cfg.k = MatrixXd(1, 2);
    cfg.k << 0.11, -0.08;
    cfg.P = MatrixXd(2, 2);
    cfg.P << 0.9, 0.1, 0.1, 0.9;
    cfg.rho = VectorXd::Constant(2, 0.5);
    cfg.sigma = 3.0;
    cfg.initial_price = kRegimeInitialPrice;
    cfg.payout_fraction = 0.0;
    regime::EmOptions opt;
    opt.seed = cfg.seed;
    std::optional<simulate::SimResult> sim;
    try {
      sim = simulate::simulate(cfg);
    } catch (const EstimationError& e) {
      // Counted as a miss: the seed is not replaced.
      ++domain_exits;
      std::printf("      regime seed %d: %s\n", seed, e.what());
      continue;
    }
    try {
      const auto fit = regime::em_fit(regime::regression_data(*sim->public_obs), 2, opt);
      // Regimes come back sorted by mean rate, highest first.
      const double err = std::max(std::abs(fit.regimes[0].k(0) - 0.11), std::abs(fit.regimes[1].k(0) + 0.08));
      worst = std::max(worst, err);
      hits += err <= 0.02;
    } catch (const Error& e) {
      std::printf("      regime seed %d: %s\n", seed, e.what());
    }
  }

  int kal_hits = 0;
  const int kal_seeds = 10;
  for (int seed = 0; seed < kal_seeds; ++seed) {
    simulate::SimConfig cfg;
    cfg.family = simulate::Family::SsmNonPaying;
    cfg.periods = 1000;
    cfg.seed = 5100 + static_cast<std::uint64_t>(seed);
    cfg.ssm.model = kalman::SsmModel::NonPaying;
    cfg.ssm.k = VectorXd::Constant(1, 0.02);
    cfg.ssm.phi0 = 0.05;
    cfg.ssm.phi1 = 0.9;
    cfg.ssm.mu0 = 0.5;
    cfg.ssm.sigma0_sq = 0.01;
    cfg.ssm.sigma_v_sq = 0.05 * 0.05;
    cfg.ssm.sigma_u_sq = 0.01 * 0.01;
    const auto data = kalman::SsmData::from(*simulate::simulate(cfg).private_obs);
    const auto fit = kalman::em_estimate(data, kalman::default_init(data), 1e-8, 2000);
    kal_hits += std::abs(fit.spec.k(0) - 0.02) <= 0.01 && std::abs(fit.spec.phi1 - 0.9) <= 0.1;
  }
  Outcome o;
  o.pass = hits >= 45 && kal_hits == kal_seeds;
  o.detail = "regime " + std::to_string(hits) + "/50 seeds within 0.02 (" + std::to_string(domain_exits) +
             " domain exits, worst fitted err " + fmt("%.1e", worst) + "), Kalman non-paying " +
             std::to_string(kal_hits) + "/" + std::to_string(kal_seeds) + " within (0.01, 0.1)";
  return o;
}

// --- 6 ---------------------------------------------------------------------

Outcome calibration() {
  VectorXd k(2);
  k << 0.025, 0.0;
  const int reps = 4000;
  const Index T = 126;
  int f = 0, t = 0, lr = 0, w = 0, lm = 0, ordered = 0;
  const auto restr = inference::parse_restriction("k2=0", 2);
  const double tcrit = dist::student_t_quantile(0.975, static_cast<double>(T - 2));
  for (int rep = 0; rep < reps; ++rep) {
    simulate::SimConfig cfg;
    cfg.family = simulate::Family::PublicDdm;
    cfg.periods = T;
    cfg.seed = 6000 + static_cast<std::uint64_t>(rep);
    cfg.k = k;
    cfg.sigma = 8.4;
    cfg.initial_price = 1000.0;
    const auto des = ddm::build_design(*simulate::simulate(cfg).public_obs);
    const auto fit = ddm::fit_ml(des);
    const auto restricted = inference::fit_restricted(fit, inference::cross_products(des.X), restr);
    const auto r = inference::run_tests(fit, restricted, restr, T);
    f += r.f_p < 0.05;
    lr += r.lr_p < 0.05;
    w += r.w_p < 0.05;
    lm += r.lm_p < 0.05;
    t += std::abs(*r.t_stat) > tcrit;
    ordered += r.w_stat >= r.lr_stat && r.lr_stat >= r.lm_stat;
  }
  bool ok = ordered == reps;
  std::string detail = "rejection %";
  const char* names[] = {"F", "t", "LR", "W", "LM"};
  int i = 0;
  for (int hits : {f, t, lr, w, lm}) {
    const double rate = hits / double(reps);
    ok = ok && std::abs(rate - 0.05) <= 0.015;
    detail += std::string(" ") + names[i++] + " " + fmt("%.2f", 100 * rate);
  }
  detail += ", ordering " + std::to_string(ordered) + "/" + std::to_string(reps);
  return {ok, detail};
}

// --- 7 ---------------------------------------------------------------------

Outcome coverage() {
  VectorXd k(2);
  k << 0.025, 0.004;
  const int reps = 2000;
  int covered[2] = {0, 0};
  for (int rep = 0; rep < reps; ++rep) {
    simulate::SimConfig cfg;
    cfg.family = simulate::Family::PublicDdm;
    cfg.periods = 126;
    cfg.seed = 7000 + static_cast<std::uint64_t>(rep);
    cfg.k = k;
    cfg.sigma = 8.4;
    cfg.initial_price = 1000.0;
    const auto fit = ddm::fit_ml(ddm::build_design(*simulate::simulate(cfg).public_obs));
    for (int i = 0; i < 2; ++i) {
      const auto ci = ddm::confidence_interval(fit, i, 0.05);
      covered[i] += ci.first <= k(i) && k(i) <= ci.second;
    }
  }
  const double c1 = covered[0] / double(reps), c2 = covered[1] / double(reps);
  return {std::abs(c1 - 0.95) <= 0.02 && std::abs(c2 - 0.95) <= 0.02,
          "coverage k1 " + fmt("%.2f%%", 100 * c1) + ", k2 " + fmt("%.2f%%", 100 * c2)};
}

// --- 8 ---------------------------------------------------------------------

Outcome bayes_consistency() {
  RandomStream rng(8000);
  const int T = 120;
  MatrixXd X(T, 3);
  VectorXd y(T);
  for (int t = 0; t < T; ++t) {
    const double delta = 0.01 + 0.05 * rng.uniform();
    X.row(t) << 1.0, rng.normal(), -delta;
    y(t) = 0.08 + 0.01 * X(t, 1) - 0.4 * delta + 0.02 * rng.normal();
  }
  const auto ml = fit_least_squares(X, y);
  const bayes::NigPrior diffuse(VectorXd::Zero(3), 1e12 * MatrixXd::Identity(3, 3), 2.0, 1.0);
  const auto dpost = bayes::posterior(diffuse, X, y);
  double diffuse_rel = 0.0;
  for (int i = 0; i < 3; ++i)
    diffuse_rel = std::max(diffuse_rel, std::abs(dpost.beta_bar(i) - ml.coeffs(i)) / std::abs(ml.coeffs(i)));

  const auto post = bayes::posterior(bayes::NigPrior::weakly_informative(3), X, y);
  const std::size_t n = 50000;
  const auto draws = bayes::gibbs_sample(post, n, 1000, 8001);
  double worst_z = 0.0;
  for (int j = 0; j < 3; ++j) {
    const VectorXd col = draws.beta.col(j);
    const double mean = col.mean();
    const double sd = std::sqrt((col.array() - mean).square().sum() / double(n - 1));
    worst_z = std::max(worst_z, std::abs(mean - post.beta_bar(j)) / (sd / std::sqrt(double(n))));
  }
  const VectorXd prec = draws.sigma2.cwiseInverse();
  const double pmean = prec.mean();
  const double psd = std::sqrt((prec.array() - pmean).square().sum() / double(n - 1));
  worst_z = std::max(worst_z, std::abs(pmean - post.nu_bar / post.lambda_bar) / (psd / std::sqrt(double(n))));

  const auto again = bayes::gibbs_sample(post, n, 1000, 8001);
  const bool identical =
      std::memcmp(draws.beta.data(), again.beta.data(), sizeof(double) * draws.beta.size()) == 0 &&
      std::memcmp(draws.sigma2.data(), again.sigma2.data(), sizeof(double) * draws.sigma2.size()) == 0;
  return {diffuse_rel <= 1e-4 && worst_z <= 3.0 && identical,
          "diffuse rel err " + fmt("%.2e", diffuse_rel) + ", worst MC z " + fmt("%.2f", worst_z) +
              (identical ? ", reruns bit-identical" : ", reruns differ")};
}

// --- 9 ---------------------------------------------------------------------

Outcome exact_fits() {
  Worst resid, joint, orth, constraint;
  using simulate::Family;

  // Noiseless public data with covariates.
  simulate::SimConfig pub;
  pub.family = Family::PublicDdm;
  pub.periods = 60;
  pub.seed = 9000;
  pub.k = MatrixXd(3, 1);
  pub.k << 0.04, 0.01, -0.005;
  pub.sigma = 0.0;
  const auto pfit = ddm::fit_ml(ddm::build_design(*simulate::simulate(pub).public_obs));
  resid.see(pfit.residuals.cwiseAbs().maxCoeff());

  // Regime public, regressed within the true path.
  simulate::SimConfig reg = pub;
  reg.family = Family::RegimeDdm;
  reg.periods = 150;
  reg.k = MatrixXd(3, 2);
  reg.k << 0.04, -0.03, 0.01, 0.0, -0.005, 0.02;
  reg.P = MatrixXd(2, 2);
  reg.P << 0.9, 0.1, 0.2, 0.8;
  reg.rho = VectorXd::Constant(2, 0.5);
  auto by_regime = [&](const simulate::SimResult& sim, const regime::RegressionData& data, int N) {
    for (int j = 0; j < N; ++j) {
      VectorXd w(data.y.size());
      for (Index t = 0; t < w.size(); ++t) w(t) = sim.regime_path[static_cast<std::size_t>(t)] == j ? 1.0 : 0.0;
      const auto coef = regime::weighted_regression(data, w);
      resid.see(std::sqrt(coef.weighted_rss));
    }
  };
  const auto rsim = simulate::simulate(reg);
  by_regime(rsim, regime::regression_data(*rsim.public_obs), 2);

  // Private, paying and not, with and without regimes.
  for (bool paying : {true, false}) {
    simulate::SimConfig pc;
    pc.family = Family::Private;
    pc.periods = 40;
    pc.seed = 9001;
    pc.k = MatrixXd(2, 1);
    pc.k << 0.09, 0.02;
    pc.delta = VectorXd::Constant(1, 0.4);
    pc.paying = paying;
    pc.sigma = 0.0;
    const auto fit = private_valuation::fit_private(
        private_valuation::build_private_design(*simulate::simulate(pc).private_obs));
    resid.see(fit.fit.residuals.cwiseAbs().maxCoeff());

    simulate::SimConfig prc = pc;
    prc.family = Family::PrivateRegime;
    prc.periods = 100;
    prc.k = MatrixXd(2, 2);
    prc.k << 0.09, 0.01, 0.02, -0.01;
    prc.delta = VectorXd(2);
    prc.delta << 0.4, 0.25;
    prc.P = reg.P;
    prc.rho = reg.rho;
    const auto psim = simulate::simulate(prc);
    by_regime(psim, regime::regression_data(*psim.private_obs), 2);
  }

  // Joint solve against the two-step decomposition, orthogonality and
  // restricted fits on noisy data.
  RandomStream rng(9002);
  for (int rep = 0; rep < 100; ++rep) {
    const int T = 30 + rep, n = 1 + rep % 3;
    MatrixXd C(T, n);
    VectorXd delta(T), b(T);
    for (int t = 0; t < T; ++t) {
      C(t, 0) = 1.0;
      for (int i = 1; i < n; ++i) C(t, i) = rng.normal();
      delta(t) = 0.01 + 0.05 * rng.uniform();
      b(t) = 0.08 + 0.01 * (n > 1 ? C(t, 1) : 0.0) - 0.4 * delta(t) + 0.01 * rng.normal();
    }
    const auto des = private_valuation::build_private_design(PrivateObservationSet(b, delta, C, true));
    const auto fit = private_valuation::fit_private(des);
    const auto dec = private_valuation::decompose_paying(des);
    joint.see(std::abs(dec.delta - *fit.delta) / std::max(1.0, std::abs(dec.delta)));
    joint.see((dec.k - fit.k).norm() / std::max(1.0, fit.k.norm()));

    const VectorXd xte = des.X.transpose() * fit.fit.residuals;
    orth.see(xte.cwiseAbs().maxCoeff() / (des.X.norm() * fit.fit.residuals.norm()));

    const std::string expr = n > 1 ? "delta = 0.4; k1 + k2 = 0.1" : "delta - 2 k1 = 0.2";
    const auto restr = inference::parse_restriction(expr, fit.fit.dim(), true);
    const auto restricted = inference::fit_restricted(fit.fit, inference::cross_products(des.X), restr);
    constraint.see((restr.R() * restricted.coeffs - restr.r()).cwiseAbs().maxCoeff());
  }

  Outcome o;
  o.pass = resid.value < 1e-10 && joint.value <= 1e-10 && orth.value <= 1e-8 && constraint.value <= 1e-10;
  o.detail = "residual " + fmt("%.1e", resid.value) + ", joint/decomposed " + fmt("%.1e", joint.value) +
             ", X'e " + fmt("%.1e", orth.value) + ", R b - r " + fmt("%.1e", constraint.value);
  return o;
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria = {
      {1, "published chain diagnostics", 1, table_rows},
      {2, "HMM oracle equivalence", 30, hmm_oracle},
      {3, "Kalman oracle equivalence", 60, kalman_oracle},
      {4, "EM monotonicity", 300, em_monotone},
      {5, "parameter recovery", 600, recovery},
      {6, "test-statistic calibration", 300, calibration},
      {7, "confidence interval coverage", 180, coverage},
      {8, "Bayesian consistency", 120, bayes_consistency},
      {9, "exact-fit identities", 30, exact_fits},
  };
  // Optional arguments select criteria by number.
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));

  int failed = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs <= c.budget_s;
    const bool pass = o.pass && in_time;
    failed += !pass;
    std::printf("%s [%d] %s: %s; %.2f s of %.0f s%s\n", pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs,
                c.budget_s, in_time ? "" : " (over budget)");
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
