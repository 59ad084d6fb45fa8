#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "rror/data.hpp"
#include "rror/kalman.hpp"
#include "rror/linear.hpp"
#include "rror/simulate.hpp"

// Report builders behind every CLI subcommand. Each returns the "result"
// object plus any per-period CSV series; finalize() wraps them with the run
// manifest and the output digest.
namespace rror::report {

using Json = nlohmann::ordered_json;

struct Series {
  std::string name;
  std::string csv;
};

struct Report {
  Json result;
  std::vector<Series> series;
};

// Non-finite values become null so every report stays valid JSON.
Json number(double v);
Json vector(const Eigen::VectorXd& v);
Json matrix(const Eigen::MatrixXd& m);  // array of rows
Json linear_fit(const LinearFit& fit);

Report estimate_public(const ObservationSet& obs, double alpha);
Report estimate_private(const PrivateObservationSet& obs, double alpha);

// stats: any subset of {"f", "t", "lr", "w", "lm"}; empty means all.
Report test_public(const ObservationSet& obs, const std::string& restriction,
                   const std::vector<std::string>& stats);
Report test_private(const PrivateObservationSet& obs, const std::string& restriction,
                    const std::vector<std::string>& stats);

struct RegimeOptions {
  int regimes = 2;
  double tol = 1e-8;
  int max_iter = 1000;
  int max_restarts = 5;
  std::uint64_t seed = 0;
};
Report regimes_public(const ObservationSet& obs, const RegimeOptions& opt);
Report regimes_private(const PrivateObservationSet& obs, const RegimeOptions& opt);

struct BayesOptions {
  std::size_t draws = 10000;
  std::size_t burn_in = 1000;
  std::uint64_t seed = 0;
  std::optional<Eigen::VectorXd> beta0;  // zero when absent
  double b0_scale = 100.0;               // B0 = b0_scale * I
  double nu0 = 2.0;
  double lambda0 = 1.0;
};
Report bayes_public(const ObservationSet& obs, const BayesOptions& opt);
Report bayes_private(const PrivateObservationSet& obs, const BayesOptions& opt);

struct KalmanOptions {
  double tol = 1e-8;
  int max_iter = 1000;
  kalman::EmFixed fixed;
  // Overrides of the default starting point; NaN or empty means "not given".
  Eigen::VectorXd k;
  double phi0 = std::numeric_limits<double>::quiet_NaN();
  double phi1 = std::numeric_limits<double>::quiet_NaN();
  double mu0 = std::numeric_limits<double>::quiet_NaN();
  double sigma0_sq = std::numeric_limits<double>::quiet_NaN();
  double sigma_u_sq = std::numeric_limits<double>::quiet_NaN();
  double sigma_v_sq = std::numeric_limits<double>::quiet_NaN();
  int horizon = 0;
  std::optional<PrivateObservationSet> future;
};
Report kalman_fit(const PrivateObservationSet& obs, const KalmanOptions& opt);

// Simulation configuration from JSON. Absent keys take per-family defaults;
// unknown keys are an input error. "k" is an array of rows (one per
// covariate, one column per regime); a flat array is one column without
// regimes and one row with them.
simulate::SimConfig sim_config_from_json(const Json& j);
Json sim_config_to_json(const simulate::SimConfig& config);

// Series "data" holds the observations in the input CSV layout, "truth" the
// hidden regime or state path.
Report simulate_run(const simulate::SimConfig& config);

struct Manifest {
  std::string command;
  Json inputs = Json::array();
  Json options = Json::object();
  std::optional<std::uint64_t> seed;
};

// SHA-256 of the result text followed by every series (name and CSV).
std::string output_digest(const Report& rep);

// {"manifest": {..., "version", "output_digest"}, "result": ...}
Json finalize(const Report& rep, const Manifest& manifest);

std::string version();
std::string sha256_hex(const std::string& bytes);

}  // namespace rror::report
