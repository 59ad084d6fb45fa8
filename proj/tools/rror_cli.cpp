// Command-line front end. Everything numeric goes through the C API in
// librror; this file only parses flags, writes files and builds manifests.

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rror/rror.h"

namespace {

using Json = nlohmann::ordered_json;

// Thrown after a C API call fails; carries the status as the exit code.
struct Failure {
  int code;
  std::string message;
};

void check(rror_status st) {
  if (st != RROR_OK) throw Failure{static_cast<int>(st), rror_last_error()};
}

using PublicHandle = std::unique_ptr<rror_public_data, decltype(&rror_public_free)>;
using PrivateHandle = std::unique_ptr<rror_private_data, decltype(&rror_private_free)>;
using ReportHandle = std::unique_ptr<rror_report, decltype(&rror_report_free)>;

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Failure{RROR_ERR_INPUT, "cannot write '" + path + "'"};
  out << text;
  if (!out) throw Failure{RROR_ERR_INPUT, "failed writing '" + path + "'"};
  spdlog::info("wrote {}", path);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure{RROR_ERR_INPUT, "cannot open '" + path + "'"};
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Json input_entry(const std::string& path) {
  char digest[96];
  check(rror_file_sha256(path.c_str(), digest, sizeof digest));
  return {{"path", path}, {"digest", digest}};
}

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i];
  return s;
}

Json optional_number(double v) { return std::isnan(v) ? Json(nullptr) : Json(v); }

// Data-source flags shared by the estimation subcommands.
struct DataFlags {
  std::string model;
  std::string input;
  bool paying = false;
  std::vector<std::string> covariates;
  std::string label_column;
  std::string price_column = "price";
  std::string dividend_column = "dividend";
  bool no_dividend = false;
  std::string growth_column = "book_growth";
  std::string div_to_book_column = "div_to_book";

  void add(CLI::App* app, bool kalman = false) {
    if (kalman)
      app->add_option("--model", model, "company type")->required()->check(CLI::IsMember({"paying", "nonpaying"}));
    else
      app->add_option("--model", model, "model family")->required()->check(CLI::IsMember({"ddm", "private"}));
    app->add_option("--input", input, "observation CSV")->required();
    if (!kalman) app->add_flag("--paying", paying, "private model: read the div_to_book column");
    app->add_option("--covariates", covariates, "covariate columns (constant column added first)")->delimiter(',');
    app->add_option("--label-column", label_column, "period label column");
    if (!kalman) {
      app->add_option("--price-column", price_column, "public price column");
      app->add_option("--dividend-column", dividend_column, "public dividend column");
      app->add_flag("--no-dividend", no_dividend, "public data without dividends (d = 0)");
    }
    app->add_option("--growth-column", growth_column, "private book growth column");
    app->add_option("--div-to-book-column", div_to_book_column, "private dividend-to-book column");
  }

  bool is_public() const { return model == "ddm"; }
  bool private_paying() const { return model == "paying" || (model == "private" && paying); }

  Json options() const {
    Json j;
    j["model"] = model;
    if (is_public()) {
      j["price_column"] = price_column;
      j["dividend_column"] = no_dividend ? Json(nullptr) : Json(dividend_column);
    } else {
      j["paying"] = private_paying();
      j["growth_column"] = growth_column;
      j["div_to_book_column"] = private_paying() ? Json(div_to_book_column) : Json(nullptr);
    }
    j["covariates"] = covariates;
    j["label_column"] = label_column.empty() ? Json(nullptr) : Json(label_column);
    return j;
  }

  PublicHandle load_public() const {
    rror_public_data* p = nullptr;
    check(rror_public_load(input.c_str(), price_column.c_str(), no_dividend ? nullptr : dividend_column.c_str(),
                           join(covariates).c_str(), label_column.c_str(), &p));
    spdlog::debug("loaded {} periods from {}", rror_public_periods(p), input);
    return PublicHandle(p, &rror_public_free);
  }

  PrivateHandle load_private(const std::string& path) const {
    rror_private_data* p = nullptr;
    check(rror_private_load(path.c_str(), growth_column.c_str(),
                            private_paying() ? div_to_book_column.c_str() : nullptr, join(covariates).c_str(),
                            label_column.c_str(), &p));
    spdlog::debug("loaded {} periods from {}", rror_private_periods(p), path);
    return PrivateHandle(p, &rror_private_free);
  }
};

// Finalizes the report, writes the JSON (stdout when no path is given) and
// the requested CSV series.
void finish(rror_report* rep, const std::string& command, Json manifest, const std::string& output,
            const std::map<std::string, std::string>& series_paths) {
  const char* text = nullptr;
  check(rror_report_finalize(rep, command.c_str(), manifest.dump().c_str(), &text));
  for (std::size_t i = 0; i < rror_report_series_count(rep); ++i) {
    const auto it = series_paths.find(rror_report_series_name(rep, i));
    if (it != series_paths.end() && !it->second.empty()) write_file(it->second, rror_report_series_csv(rep, i));
  }
  if (output.empty() || output == "-")
    std::cout << text;
  else
    write_file(output, text);
}

void configure_logging() {
  auto logger = spdlog::stderr_color_mt("rror");
  logger->set_pattern("rror: %l: %v");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("RROR_LOG")) {
    const auto level = spdlog::level::from_str(env);
    // from_str maps unknown names to off; only accept that for "off" itself.
    if (level != spdlog::level::off || std::string(env) == "off") spdlog::set_level(level);
    else spdlog::warn("ignoring unknown RROR_LOG level '{}'", env);
  }
}

}  // namespace

int main(int argc, char** argv) {
  configure_logging();

  CLI::App app{"Required rate of return estimation: dividend discount regressions, regime switching, "
               "private company valuation, Bayesian and state-space estimators."};
  app.set_version_flag("--version", std::string(rror_version()));
  app.require_subcommand(1);

  std::string output;
  auto add_output = [&](CLI::App* sub) { sub->add_option("--output,-o", output, "JSON report path (default stdout)"); };

  // estimate
  auto* estimate = app.add_subcommand("estimate", "maximum likelihood fit with confidence intervals");
  DataFlags est_data;
  double alpha = 0.05;
  est_data.add(estimate);
  estimate->add_option("--alpha", alpha, "interval level is 1 - alpha")->check(CLI::Range(0.0, 1.0));
  add_output(estimate);

  // regimes
  auto* regimes = app.add_subcommand("regimes", "Markov regime-switching fit by EM");
  DataFlags reg_data;
  int n_regimes = 2, reg_max_iter = 1000, max_restarts = 5;
  double reg_tol = 1e-8;
  std::uint64_t reg_seed = 0;
  std::string probabilities;
  reg_data.add(regimes);
  regimes->add_option("--n-regimes", n_regimes, "number of regimes")->check(CLI::PositiveNumber);
  regimes->add_option("--tol", reg_tol, "log-likelihood convergence tolerance");
  regimes->add_option("--max-iter", reg_max_iter, "EM iteration cap");
  regimes->add_option("--max-restarts", max_restarts, "restarts after an empty regime");
  regimes->add_option("--seed", reg_seed, "seed for restart perturbations")->required();
  regimes->add_option("--probabilities", probabilities, "smoothed/filtered probability CSV path");
  add_output(regimes);

  // test
  auto* test = app.add_subcommand("test", "F, t, LR, Wald and LM tests of linear restrictions");
  DataFlags test_data;
  std::string restriction;
  std::vector<std::string> stats;
  test_data.add(test);
  test->add_option("--restrict", restriction, "restrictions, e.g. \"k2+k3=0.1; delta=0.5\"")->required();
  test->add_option("--stats", stats, "subset of f,t,lr,w,lm")
      ->delimiter(',')
      ->check(CLI::IsMember({"f", "t", "lr", "w", "lm"}));
  add_output(test);

  // bayes
  auto* bayes = app.add_subcommand("bayes", "normal-inverse-gamma posterior and Gibbs draws");
  DataFlags bayes_data;
  std::size_t draws = 10000, burn_in = 1000;
  std::uint64_t bayes_seed = 0;
  std::vector<double> beta0;
  double b0_scale = 100.0, nu0 = 2.0, lambda0 = 1.0;
  std::string draws_csv;
  bayes_data.add(bayes);
  bayes->add_option("--draws", draws, "retained Gibbs draws")->check(CLI::PositiveNumber);
  bayes->add_option("--burn-in", burn_in, "discarded initial draws");
  bayes->add_option("--seed", bayes_seed, "sampler seed")->required();
  bayes->add_option("--beta0", beta0, "prior mean (default zero)")->delimiter(',');
  bayes->add_option("--b0-scale", b0_scale, "prior covariance scale, B0 = s I");
  bayes->add_option("--nu0", nu0, "prior shape");
  bayes->add_option("--lambda0", lambda0, "prior scale");
  bayes->add_option("--draws-csv", draws_csv, "CSV path for the retained draws");
  add_output(bayes);

  // kalman
  auto* kalman = app.add_subcommand("kalman", "state-space price-to-book model by Kalman EM");
  DataFlags kal_data;
  double kal_tol = 1e-8;
  int kal_max_iter = 1000, horizon = 0;
  std::vector<std::string> fixed;
  std::vector<double> k_init;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  double phi0 = nan, phi1 = nan, mu0 = nan, sigma0_sq = nan, sigma_u_sq = nan, sigma_v_sq = nan;
  std::string future, smoothed;
  kal_data.add(kalman, true);
  kalman->add_option("--tol", kal_tol, "log-likelihood convergence tolerance");
  kalman->add_option("--max-iter", kal_max_iter, "EM iteration cap");
  kalman->add_option("--fix", fixed, "parameter blocks held at their start values")
      ->delimiter(',')
      ->check(CLI::IsMember({"k", "phi", "sigma_u", "sigma_v", "initial"}));
  kalman->add_option("--k", k_init, "starting k")->delimiter(',');
  kalman->add_option("--phi0", phi0, "starting phi0");
  kalman->add_option("--phi1", phi1, "starting phi1");
  kalman->add_option("--mu0", mu0, "starting initial-state mean");
  kalman->add_option("--sigma0-sq", sigma0_sq, "starting initial-state variance");
  kalman->add_option("--sigma-u-sq", sigma_u_sq, "starting measurement variance");
  kalman->add_option("--sigma-v-sq", sigma_v_sq, "starting state variance");
  kalman->add_option("--horizon", horizon, "forecast steps")->check(CLI::NonNegativeNumber);
  kalman->add_option("--future", future, "CSV with the future book growth and covariates");
  kalman->add_option("--smoothed", smoothed, "smoothed state CSV path");
  add_output(kalman);

  // simulate
  auto* simulate = app.add_subcommand("simulate", "synthetic data from any model family");
  std::string family, config_path, data_path, truth_path;
  std::int64_t periods = 0;
  std::uint64_t sim_seed = 0;
  simulate->add_option("--family", family, "model family")
      ->required()
      ->check(CLI::IsMember({"public-ddm", "regime-ddm", "private", "private-regime", "ssm-paying", "ssm-nonpaying"}));
  simulate->add_option("--seed", sim_seed, "generator seed")->required();
  simulate->add_option("--periods", periods, "number of periods (default 200)")->check(CLI::PositiveNumber);
  simulate->add_option("--config", config_path, "JSON file with parameter overrides");
  simulate->add_option("--data", data_path, "CSV path for the observations")->required();
  simulate->add_option("--truth", truth_path, "CSV path for the hidden path (default <data>.truth.csv)");
  add_output(simulate);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : RROR_ERR_INPUT;
  }

  try {
    rror_report* raw = nullptr;
    Json manifest;
    Json options;
    std::map<std::string, std::string> series;

    if (*estimate) {
      options = est_data.options();
      options["alpha"] = alpha;
      if (est_data.is_public()) {
        auto d = est_data.load_public();
        check(rror_estimate_public(d.get(), alpha, &raw));
      } else {
        auto d = est_data.load_private(est_data.input);
        check(rror_estimate_private(d.get(), alpha, &raw));
      }
      manifest["inputs"] = Json::array({input_entry(est_data.input)});
    } else if (*regimes) {
      options = reg_data.options();
      rror_regime_options o;
      rror_regime_options_default(&o);
      o.regimes = n_regimes;
      o.tol = reg_tol;
      o.max_iter = reg_max_iter;
      o.max_restarts = max_restarts;
      o.seed = reg_seed;
      options["n_regimes"] = n_regimes;
      options["tol"] = reg_tol;
      options["max_iter"] = reg_max_iter;
      options["max_restarts"] = max_restarts;
      if (reg_data.is_public()) {
        auto d = reg_data.load_public();
        check(rror_regimes_public(d.get(), &o, &raw));
      } else {
        auto d = reg_data.load_private(reg_data.input);
        check(rror_regimes_private(d.get(), &o, &raw));
      }
      manifest["inputs"] = Json::array({input_entry(reg_data.input)});
      manifest["seed"] = reg_seed;
      series["probabilities"] = probabilities;
    } else if (*test) {
      options = test_data.options();
      options["restrict"] = restriction;
      options["stats"] = stats.empty() ? std::vector<std::string>{"f", "t", "lr", "w", "lm"} : stats;
      if (test_data.is_public()) {
        auto d = test_data.load_public();
        check(rror_test_public(d.get(), restriction.c_str(), join(stats).c_str(), &raw));
      } else {
        auto d = test_data.load_private(test_data.input);
        check(rror_test_private(d.get(), restriction.c_str(), join(stats).c_str(), &raw));
      }
      manifest["inputs"] = Json::array({input_entry(test_data.input)});
    } else if (*bayes) {
      options = bayes_data.options();
      rror_bayes_options o;
      rror_bayes_options_default(&o);
      o.draws = draws;
      o.burn_in = burn_in;
      o.seed = bayes_seed;
      if (!beta0.empty()) {
        o.beta0 = beta0.data();
        o.beta0_len = beta0.size();
      }
      o.b0_scale = b0_scale;
      o.nu0 = nu0;
      o.lambda0 = lambda0;
      options["draws"] = draws;
      options["burn_in"] = burn_in;
      options["beta0"] = beta0.empty() ? Json(nullptr) : Json(beta0);
      options["b0_scale"] = b0_scale;
      options["nu0"] = nu0;
      options["lambda0"] = lambda0;
      if (bayes_data.is_public()) {
        auto d = bayes_data.load_public();
        check(rror_bayes_public(d.get(), &o, &raw));
      } else {
        auto d = bayes_data.load_private(bayes_data.input);
        check(rror_bayes_private(d.get(), &o, &raw));
      }
      manifest["inputs"] = Json::array({input_entry(bayes_data.input)});
      manifest["seed"] = bayes_seed;
      series["draws"] = draws_csv;
    } else if (*kalman) {
      options = kal_data.options();
      rror_kalman_options o;
      rror_kalman_options_default(&o);
      o.tol = kal_tol;
      o.max_iter = kal_max_iter;
      const std::string fixed_list = join(fixed);
      o.fixed = fixed_list.c_str();
      if (!k_init.empty()) {
        o.k = k_init.data();
        o.k_len = k_init.size();
      }
      o.phi0 = phi0;
      o.phi1 = phi1;
      o.mu0 = mu0;
      o.sigma0_sq = sigma0_sq;
      o.sigma_u_sq = sigma_u_sq;
      o.sigma_v_sq = sigma_v_sq;
      o.horizon = horizon;
      options["tol"] = kal_tol;
      options["max_iter"] = kal_max_iter;
      options["fix"] = fixed;
      options["init"] = {{"k", k_init.empty() ? Json(nullptr) : Json(k_init)},
                         {"phi0", optional_number(phi0)},
                         {"phi1", optional_number(phi1)},
                         {"mu0", optional_number(mu0)},
                         {"sigma0_sq", optional_number(sigma0_sq)},
                         {"sigma_u_sq", optional_number(sigma_u_sq)},
                         {"sigma_v_sq", optional_number(sigma_v_sq)}};
      options["horizon"] = horizon;
      auto d = kal_data.load_private(kal_data.input);
      manifest["inputs"] = Json::array({input_entry(kal_data.input)});
      PrivateHandle fut(nullptr, &rror_private_free);
      if (!future.empty()) {
        fut = kal_data.load_private(future);
        o.future = fut.get();
        manifest["inputs"].push_back(input_entry(future));
      }
      check(rror_kalman(d.get(), &o, &raw));
      series["smoothed"] = smoothed;
    } else if (*simulate) {
      Json config = Json::object();
      if (!config_path.empty()) {
        try {
          config = Json::parse(read_file(config_path));
        } catch (const Json::exception& e) {
          throw Failure{RROR_ERR_INPUT, config_path + ": " + e.what()};
        }
        if (!config.is_object()) throw Failure{RROR_ERR_INPUT, config_path + ": expected a JSON object"};
      }
      config["family"] = family;
      config["seed"] = sim_seed;
      if (periods > 0) config["periods"] = periods;
      else if (!config.contains("periods")) config["periods"] = 200;
      check(rror_simulate(config.dump().c_str(), &raw));
      if (truth_path.empty()) {
        const auto dot = data_path.rfind(".csv");
        truth_path = (dot != std::string::npos && dot + 4 == data_path.size() ? data_path.substr(0, dot) : data_path) +
                     ".truth.csv";
      }
      options = Json::parse(rror_report_json(raw))["config"];
      options["data"] = data_path;
      options["truth"] = truth_path;
      manifest["inputs"] = Json::array();
      if (!config_path.empty()) manifest["inputs"].push_back(input_entry(config_path));
      manifest["seed"] = sim_seed;
      series["data"] = data_path;
      series["truth"] = truth_path;
    }

    manifest["options"] = options;
    const std::string command = app.get_subcommands().front()->get_name();
    const ReportHandle rep(raw, &rror_report_free);
    spdlog::debug("output digest {}", rror_report_digest(rep.get()));
    finish(rep.get(), command, manifest, output, series);
    return 0;
  } catch (const Failure& f) {
    spdlog::error("{}", f.message);
    return f.code;
  }
}
