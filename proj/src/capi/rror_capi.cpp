#include "rror/rror.h"

#include <cmath>
#include <algorithm>
#include <exception>
#include <fstream>
#include <new>
#include <sstream>
#include <string>
#include <vector>

#include "rror/error.hpp"
#include "rror/report.hpp"

using rror::report::Json;

struct rror_public_data {
  rror::ObservationSet obs;
};

struct rror_private_data {
  rror::PrivateObservationSet obs;
};

struct rror_report {
  rror::report::Report rep;
  std::string json;
  std::string digest;
  std::string finalized;
};

namespace {

thread_local std::string last_error;

rror_status fail(rror_status code, const char* what) {
  last_error = what;
  return code;
}

// Runs body and maps exceptions onto status codes. Anything that is not an
// InputError counts as an estimation failure.
template <typename F>
rror_status guarded(F&& body) {
  try {
    body();
    last_error.clear();
    return RROR_OK;
  } catch (const rror::InputError& e) {
    return fail(RROR_ERR_INPUT, e.what());
  } catch (const Json::exception& e) {
    return fail(RROR_ERR_INPUT, e.what());
  } catch (const std::bad_alloc&) {
    return fail(RROR_ERR_ESTIMATION, "out of memory");
  } catch (const std::exception& e) {
    return fail(RROR_ERR_ESTIMATION, e.what());
  }
}

std::vector<std::string> split_list(const char* s) {
  std::vector<std::string> out;
  if (s == nullptr) return out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

void require(const void* p, const char* what) {
  if (p == nullptr) throw rror::InputError(std::string(what) + " must not be NULL");
}

rror_status emit(rror::report::Report rep, rror_report** out) {
  auto* r = new rror_report{std::move(rep), {}, {}, {}};
  r->json = r->rep.result.dump(2);
  r->digest = rror::report::output_digest(r->rep);
  *out = r;
  return RROR_OK;
}

template <typename F>
rror_status build(rror_report** out, F&& make) {
  if (out == nullptr) return fail(RROR_ERR_INPUT, "output pointer must not be NULL");
  *out = nullptr;
  return guarded([&] { emit(make(), out); });
}

}  // namespace

extern "C" {

const char* rror_last_error(void) { return last_error.c_str(); }

const char* rror_version(void) {
  static const std::string v = rror::report::version();
  return v.c_str();
}

rror_status rror_file_sha256(const char* path, char* out, size_t out_len) {
  return guarded([&] {
    require(path, "path");
    require(out, "output buffer");
    std::ifstream in(path, std::ios::binary);
    if (!in) throw rror::InputError(std::string("cannot open '") + path + "'");
    std::ostringstream bytes;
    bytes << in.rdbuf();
    const std::string digest = "sha256:" + rror::report::sha256_hex(bytes.str());
    if (out_len < digest.size() + 1) throw rror::InputError("output buffer too small for the digest");
    std::copy(digest.begin(), digest.end(), out);
    out[digest.size()] = '\0';
  });
}

rror_status rror_public_load(const char* path, const char* price_column, const char* dividend_column,
                             const char* covariates, const char* label_column, rror_public_data** out) {
  if (out == nullptr) return fail(RROR_ERR_INPUT, "output pointer must not be NULL");
  *out = nullptr;
  return guarded([&] {
    require(path, "path");
    rror::PublicCsvSchema schema;
    if (price_column != nullptr && *price_column != '\0') schema.price_column = price_column;
    schema.dividend_column = dividend_column ? std::optional<std::string>(dividend_column) : std::nullopt;
    schema.covariate_columns = split_list(covariates);
    if (label_column != nullptr && *label_column != '\0') schema.label_column = label_column;
    *out = new rror_public_data{rror::load_public_csv(path, schema)};
  });
}

rror_status rror_private_load(const char* path, const char* growth_column, const char* div_to_book_column,
                              const char* covariates, const char* label_column, rror_private_data** out) {
  if (out == nullptr) return fail(RROR_ERR_INPUT, "output pointer must not be NULL");
  *out = nullptr;
  return guarded([&] {
    require(path, "path");
    rror::PrivateCsvSchema schema;
    if (growth_column != nullptr && *growth_column != '\0') schema.growth_column = growth_column;
    schema.div_to_book_column =
        div_to_book_column ? std::optional<std::string>(div_to_book_column) : std::nullopt;
    schema.covariate_columns = split_list(covariates);
    if (label_column != nullptr && *label_column != '\0') schema.label_column = label_column;
    *out = new rror_private_data{rror::load_private_csv(path, schema)};
  });
}

int64_t rror_public_periods(const rror_public_data* data) { return data ? data->obs.periods() : -1; }
int64_t rror_private_periods(const rror_private_data* data) { return data ? data->obs.periods() : -1; }
int rror_private_paying(const rror_private_data* data) { return data && data->obs.paying() ? 1 : 0; }
void rror_public_free(rror_public_data* data) { delete data; }
void rror_private_free(rror_private_data* data) { delete data; }

rror_status rror_estimate_public(const rror_public_data* data, double alpha, rror_report** out) {
  return build(out, [&] {
    require(data, "data");
    return rror::report::estimate_public(data->obs, alpha);
  });
}

rror_status rror_estimate_private(const rror_private_data* data, double alpha, rror_report** out) {
  return build(out, [&] {
    require(data, "data");
    return rror::report::estimate_private(data->obs, alpha);
  });
}

rror_status rror_test_public(const rror_public_data* data, const char* restriction, const char* stats,
                             rror_report** out) {
  return build(out, [&] {
    require(data, "data");
    require(restriction, "restriction");
    return rror::report::test_public(data->obs, restriction, split_list(stats));
  });
}

rror_status rror_test_private(const rror_private_data* data, const char* restriction, const char* stats,
                              rror_report** out) {
  return build(out, [&] {
    require(data, "data");
    require(restriction, "restriction");
    return rror::report::test_private(data->obs, restriction, split_list(stats));
  });
}

void rror_regime_options_default(rror_regime_options* opt) {
  if (opt == nullptr) return;
  const rror::report::RegimeOptions d;
  *opt = {d.regimes, d.tol, d.max_iter, d.max_restarts, d.seed};
}

namespace {
rror::report::RegimeOptions regime_options(const rror_regime_options* opt) {
  require(opt, "options");
  rror::report::RegimeOptions o;
  o.regimes = opt->regimes;
  o.tol = opt->tol;
  o.max_iter = opt->max_iter;
  o.max_restarts = opt->max_restarts;
  o.seed = opt->seed;
  return o;
}
}  // namespace

rror_status rror_regimes_public(const rror_public_data* data, const rror_regime_options* opt,
                                rror_report** out) {
  return build(out, [&] {
    require(data, "data");
    return rror::report::regimes_public(data->obs, regime_options(opt));
  });
}

rror_status rror_regimes_private(const rror_private_data* data, const rror_regime_options* opt,
                                 rror_report** out) {
  return build(out, [&] {
    require(data, "data");
    return rror::report::regimes_private(data->obs, regime_options(opt));
  });
}

void rror_bayes_options_default(rror_bayes_options* opt) {
  if (opt == nullptr) return;
  const rror::report::BayesOptions d;
  *opt = {d.draws, d.burn_in, d.seed, nullptr, 0, d.b0_scale, d.nu0, d.lambda0};
}

namespace {
rror::report::BayesOptions bayes_options(const rror_bayes_options* opt) {
  require(opt, "options");
  rror::report::BayesOptions o;
  o.draws = opt->draws;
  o.burn_in = opt->burn_in;
  o.seed = opt->seed;
  if (opt->beta0 != nullptr)
    o.beta0 = Eigen::Map<const Eigen::VectorXd>(opt->beta0, static_cast<Eigen::Index>(opt->beta0_len));
  o.b0_scale = opt->b0_scale;
  o.nu0 = opt->nu0;
  o.lambda0 = opt->lambda0;
  return o;
}
}  // namespace

rror_status rror_bayes_public(const rror_public_data* data, const rror_bayes_options* opt, rror_report** out) {
  return build(out, [&] {
    require(data, "data");
    return rror::report::bayes_public(data->obs, bayes_options(opt));
  });
}

rror_status rror_bayes_private(const rror_private_data* data, const rror_bayes_options* opt,
                               rror_report** out) {
  return build(out, [&] {
    require(data, "data");
    return rror::report::bayes_private(data->obs, bayes_options(opt));
  });
}

void rror_kalman_options_default(rror_kalman_options* opt) {
  if (opt == nullptr) return;
  const rror::report::KalmanOptions d;
  *opt = {d.tol,   d.max_iter,     nullptr,         nullptr,         0,       d.phi0, d.phi1,
          d.mu0,   d.sigma0_sq,    d.sigma_u_sq,    d.sigma_v_sq,    d.horizon, nullptr};
}

rror_status rror_kalman(const rror_private_data* data, const rror_kalman_options* opt, rror_report** out) {
  return build(out, [&] {
    require(data, "data");
    require(opt, "options");
    rror::report::KalmanOptions o;
    o.tol = opt->tol;
    o.max_iter = opt->max_iter;
    for (const auto& f : split_list(opt->fixed)) {
      if (f == "k") o.fixed.k = true;
      else if (f == "phi") o.fixed.phi = true;
      else if (f == "sigma_u") o.fixed.sigma_u_sq = true;
      else if (f == "sigma_v") o.fixed.sigma_v_sq = true;
      else if (f == "initial") o.fixed.initial = true;
      else throw rror::InputError("unknown parameter block '" + f + "' (choose from k,phi,sigma_u,sigma_v,initial)");
    }
    if (opt->k != nullptr)
      o.k = Eigen::Map<const Eigen::VectorXd>(opt->k, static_cast<Eigen::Index>(opt->k_len));
    o.phi0 = opt->phi0;
    o.phi1 = opt->phi1;
    o.mu0 = opt->mu0;
    o.sigma0_sq = opt->sigma0_sq;
    o.sigma_u_sq = opt->sigma_u_sq;
    o.sigma_v_sq = opt->sigma_v_sq;
    o.horizon = opt->horizon;
    if (opt->future != nullptr) o.future = opt->future->obs;
    return rror::report::kalman_fit(data->obs, o);
  });
}

rror_status rror_simulate(const char* config_json, rror_report** out) {
  return build(out, [&] {
    require(config_json, "config");
    return rror::report::simulate_run(rror::report::sim_config_from_json(Json::parse(config_json)));
  });
}

const char* rror_report_json(const rror_report* rep) { return rep ? rep->json.c_str() : ""; }

size_t rror_report_series_count(const rror_report* rep) { return rep ? rep->rep.series.size() : 0; }

const char* rror_report_series_name(const rror_report* rep, size_t i) {
  return rep && i < rep->rep.series.size() ? rep->rep.series[i].name.c_str() : nullptr;
}

const char* rror_report_series_csv(const rror_report* rep, size_t i) {
  return rep && i < rep->rep.series.size() ? rep->rep.series[i].csv.c_str() : nullptr;
}

const char* rror_report_digest(const rror_report* rep) { return rep ? rep->digest.c_str() : ""; }

rror_status rror_report_finalize(rror_report* rep, const char* command, const char* manifest_json,
                                 const char** out) {
  if (out == nullptr) return fail(RROR_ERR_INPUT, "output pointer must not be NULL");
  *out = nullptr;
  return guarded([&] {
    require(rep, "report");
    require(command, "command");
    rror::report::Manifest m;
    m.command = command;
    if (manifest_json != nullptr && *manifest_json != '\0') {
      const Json j = Json::parse(manifest_json);
      if (!j.is_object()) throw rror::InputError("manifest must be a JSON object");
      if (j.contains("inputs")) m.inputs = j["inputs"];
      if (j.contains("options")) m.options = j["options"];
      if (j.contains("seed") && !j["seed"].is_null()) m.seed = j["seed"].get<std::uint64_t>();
    }
    rep->finalized = rror::report::finalize(rep->rep, m).dump(2) + "\n";
    *out = rep->finalized.c_str();
  });
}

void rror_report_free(rror_report* rep) { delete rep; }

}  // extern "C"
