#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include <sponsurv/cox.hpp>
#include <sponsurv/csv.hpp>
#include <sponsurv/error.hpp>
#include <sponsurv/forecast.hpp>
#include <sponsurv/simulate.hpp>
#include <sponsurv/version.hpp>

namespace sponsurv {

using json = nlohmann::ordered_json;

namespace detail {

inline json matrix_to_json(const Eigen::MatrixXd& m) {
  json flat = json::array();  // row-major
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) flat.push_back(m(r, c));
  }
  return flat;
}

inline Eigen::MatrixXd matrix_from_json(const json& flat, Eigen::Index dim) {
  if (static_cast<Eigen::Index>(flat.size()) != dim * dim) {
    throw Error::validation("InvalidValue", "covariance array has wrong length");
  }
  Eigen::MatrixXd m(dim, dim);
  for (Eigen::Index r = 0; r < dim; ++r) {
    for (Eigen::Index c = 0; c < dim; ++c) {
      m(r, c) = flat[static_cast<std::size_t>(r * dim + c)].get<double>();
    }
  }
  return m;
}

inline json parse_json(std::istream& in, const char* what) {
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) {
    throw Error::validation("InvalidValue",
                            std::string("cannot parse ") + what + " as JSON");
  }
  return j;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Fitted model persistence
// ---------------------------------------------------------------------------

inline json model_to_json(const CoxModel& model) {
  json j;
  j["library_version"] = kVersion;
  j["ties"] = to_token(model.ties);
  j["columns"] = model.column_names;
  j["blocks"] = model.column_blocks;
  json beta = json::array();
  for (Eigen::Index i = 0; i < model.beta.size(); ++i) beta.push_back(model.beta(i));
  j["beta"] = beta;
  j["covariance_model"] = detail::matrix_to_json(model.covariance_model);
  j["covariance_clustered"] = detail::matrix_to_json(model.covariance_clustered);
  j["log_likelihood"] = model.log_likelihood;
  j["iterations"] = model.iterations;
  j["converged"] = model.converged;
  j["n_observations"] = model.n_observations;
  j["n_clusters"] = model.n_clusters;
  j["n_events"] = model.n_events;
  j["baseline"] = {{"times", model.baseline.times},
                   {"increments", model.baseline.increments}};
  return j;
}

inline void write_model_json(const CoxModel& model, std::ostream& out) {
  out << model_to_json(model).dump(2) << "\n";
}

inline CoxModel read_model_json(std::istream& in) {
  const json j = detail::parse_json(in, "model file");
  CoxModel model;
  try {
    model.column_names = j.at("columns").get<std::vector<std::string>>();
    model.column_blocks = j.at("blocks").get<std::vector<std::string>>();
    const auto beta = j.at("beta").get<std::vector<double>>();
    model.beta = Eigen::Map<const Eigen::VectorXd>(
        beta.data(), static_cast<Eigen::Index>(beta.size()));
    const auto dim = static_cast<Eigen::Index>(beta.size());
    model.covariance_model = detail::matrix_from_json(j.at("covariance_model"), dim);
    model.covariance_clustered =
        detail::matrix_from_json(j.at("covariance_clustered"), dim);
    model.log_likelihood = j.at("log_likelihood").get<double>();
    model.ties = j.at("ties").get<std::string>() == "breslow" ? TiesMethod::breslow
                                                              : TiesMethod::efron;
    model.iterations = j.value("iterations", 0);
    model.converged = j.value("converged", true);
    model.n_observations = j.value("n_observations", std::size_t{0});
    model.n_clusters = j.value("n_clusters", std::size_t{0});
    model.n_events = j.value("n_events", std::size_t{0});
    model.baseline.times =
        j.at("baseline").at("times").get<std::vector<double>>();
    model.baseline.increments =
        j.at("baseline").at("increments").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw Error::validation("InvalidValue",
                            std::string("malformed model file: ") + e.what());
  }
  if (model.column_names.size() != static_cast<std::size_t>(model.beta.size()) ||
      model.baseline.times.size() != model.baseline.increments.size()) {
    throw Error::validation("InvalidValue",
                            "model file fields have inconsistent sizes");
  }
  return model;
}

// ---------------------------------------------------------------------------
// Covariate profiles and portfolios
// ---------------------------------------------------------------------------

inline CovariateProfile profile_from_json(const json& j) {
  CovariateProfile profile;
  try {
    profile.id = j.value("id", std::string{});
    if (j.contains("values")) {
      for (const auto& [key, value] : j.at("values").items()) {
        profile.values[key] = value.get<double>();
      }
    }
    profile.annual_fee = j.value("annual_fee", 0.0);
    profile.current_tenure = j.value("current_tenure", 0);
    if (j.contains("gdp_growth_path")) {
      profile.gdp_growth_path = j.at("gdp_growth_path").get<std::vector<double>>();
    }
    if (j.contains("cpi_inflation_path")) {
      profile.cpi_inflation_path =
          j.at("cpi_inflation_path").get<std::vector<double>>();
    }
  } catch (const json::exception& e) {
    throw Error::validation("InvalidValue",
                            std::string("malformed profile: ") + e.what());
  }
  return profile;
}

inline CovariateProfile read_profile_json(std::istream& in) {
  return profile_from_json(detail::parse_json(in, "profile file"));
}

/// Portfolio CSV: `sponsorship_id,current_tenure,annual_fee,<covariate...>`.
/// Covariate headers must be design columns of the model; omitted columns are
/// zero.
inline std::vector<CovariateProfile> read_portfolio_csv(std::istream& in) {
  auto rows = csv::read_rows(in);
  if (rows.size() < 2) {
    throw Error::validation("EmptyInput", "portfolio file has no rows");
  }
  const auto& header = rows[0];
  if (header.size() < 3 || csv::trim(header[0]) != "sponsorship_id" ||
      csv::trim(header[1]) != "current_tenure" ||
      csv::trim(header[2]) != "annual_fee") {
    throw Error::validation(
        "MissingColumn",
        "portfolio header must start with sponsorship_id,current_tenure,annual_fee");
  }
  std::vector<CovariateProfile> portfolio;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() < header.size()) {
      throw Error::validation("InvalidValue",
                              "portfolio row " + std::to_string(r) + " is short");
    }
    CovariateProfile p;
    p.id = csv::trim(rows[r][0]);
    p.current_tenure =
        static_cast<int>(csv::parse_long(rows[r][1], r, "current_tenure"));
    p.annual_fee = csv::parse_double(rows[r][2], r, "annual_fee");
    for (std::size_t c = 3; c < header.size(); ++c) {
      p.values[csv::trim(header[c])] = csv::parse_double(rows[r][c], r, header[c]);
    }
    portfolio.push_back(std::move(p));
  }
  return portfolio;
}

// ---------------------------------------------------------------------------
// Generator and block specifications
// ---------------------------------------------------------------------------

inline GeneratorSpec read_generator_spec_json(std::istream& in) {
  const json j = detail::parse_json(in, "generator spec");
  GeneratorSpec spec;
  try {
    spec.n = j.at("n").get<int>();
    spec.baseline_hazard = j.at("baseline_hazard").get<std::vector<double>>();
    if (!j.contains("seed")) {
      throw Error::validation("InvalidValue", "generator spec requires a seed");
    }
    spec.seed = j.at("seed").get<std::uint64_t>();
    spec.censoring_rate = j.value("censoring_rate", 0.0);
    spec.max_horizon = j.value("max_horizon", 50);
    spec.clamp_hazard = j.value("clamp_hazard", false);
    if (j.contains("covariates")) {
      for (const auto& c : j.at("covariates")) {
        CovariateSpec cov;
        cov.name = c.at("name").get<std::string>();
        const std::string kind = c.value("kind", std::string("bernoulli"));
        if (kind == "bernoulli") {
          cov.kind = CovariateSpec::Kind::bernoulli;
          cov.prevalence = c.value("prevalence", 0.5);
        } else if (kind == "uniform") {
          cov.kind = CovariateSpec::Kind::uniform;
          cov.lo = c.value("lo", 0.0);
          cov.hi = c.value("hi", 1.0);
        } else {
          throw Error::validation("InvalidValue",
                                  "covariate kind must be bernoulli or uniform");
        }
        cov.beta = c.value("beta", 0.0);
        cov.time_varying = c.value("time_varying", false);
        spec.covariates.push_back(std::move(cov));
      }
    }
  } catch (const json::exception& e) {
    throw Error::validation("InvalidValue",
                            std::string("malformed generator spec: ") + e.what());
  }
  return spec;
}

inline BlockSpec read_block_spec_json(std::istream& in) {
  const json j = detail::parse_json(in, "block spec");
  BlockSpec spec;
  try {
    spec.big_four_interacts_with_league =
        j.value("big_four_interacts_with_league", false);
    for (const auto& b : j.at("blocks")) {
      BlockSpec::Block block;
      block.name = b.at("name").get<std::string>();
      block.columns = b.at("columns").get<std::vector<std::string>>();
      spec.blocks.push_back(std::move(block));
    }
  } catch (const json::exception& e) {
    throw Error::validation("InvalidValue",
                            std::string("malformed block spec: ") + e.what());
  }
  return spec;
}

}  // namespace sponsurv
