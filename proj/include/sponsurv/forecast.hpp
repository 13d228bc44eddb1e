#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include <sponsurv/cox.hpp>
#include <sponsurv/design.hpp>
#include <sponsurv/error.hpp>
#include <sponsurv/life_table.hpp>

namespace sponsurv {

/// Breslow estimator of the baseline cumulative hazard: the increment at each
/// event time is (events at t) / sum over the risk set of exp(x . beta).
inline BaselineHazard baseline_cumulative_hazard(const CoxModel& model,
                                                 const DesignMatrix& m) {
  if (model.beta.size() != static_cast<Eigen::Index>(m.cols())) {
    throw Error::validation("DimensionMismatch",
                            "model and design matrix column counts differ");
  }
  const Eigen::VectorXd eta = m.values() * model.beta;
  BaselineHazard baseline;
  baseline.times.reserve(m.risk_sets().size());
  baseline.increments.reserve(m.risk_sets().size());
  for (const auto& rs : m.risk_sets()) {
    double shift = -std::numeric_limits<double>::infinity();
    for (int i : rs.at_risk) shift = std::max(shift, eta(i));
    double s0 = 0.0;
    for (int i : rs.at_risk) s0 += std::exp(eta(i) - shift);
    baseline.times.push_back(rs.time);
    baseline.increments.push_back(static_cast<double>(rs.deaths.size()) *
                                  std::exp(-shift) / s0);
  }
  return baseline;
}

// A forecastable sponsor: values keyed by design column name (omitted columns
// are zero), an annual fee, elapsed tenure, and optional per-period paths for
// the two economic covariates (flat values otherwise).
struct CovariateProfile {
  std::string id;
  std::map<std::string, double> values;
  double annual_fee = 0.0;
  int current_tenure = 0;
  std::vector<double> gdp_growth_path;
  std::vector<double> cpi_inflation_path;
};

namespace detail {

inline double path_value(const std::vector<double>& path, double flat, int period) {
  if (path.empty()) return flat;
  const auto idx = static_cast<std::size_t>(
      std::min(period - 1, static_cast<int>(path.size()) - 1));
  return path[idx];
}

// Linear predictor for one profile period; economic covariates read from the
// assumed path for that period.
inline double profile_eta(const CoxModel& model, const CovariateProfile& profile,
                          int period) {
  double eta = 0.0;
  for (std::size_t j = 0; j < model.column_names.size(); ++j) {
    const std::string& name = model.column_names[j];
    double x = 0.0;
    auto it = profile.values.find(name);
    if (it != profile.values.end()) x = it->second;
    if (name == "gdp_growth") {
      x = path_value(profile.gdp_growth_path, x, period);
    } else if (name == "cpi_inflation") {
      x = path_value(profile.cpi_inflation_path, x, period);
    }
    eta += model.beta(static_cast<Eigen::Index>(j)) * x;
  }
  return eta;
}

inline void check_profile_columns(const CoxModel& model,
                                  const CovariateProfile& profile) {
  for (const auto& [name, value] : profile.values) {
    if (std::find(model.column_names.begin(), model.column_names.end(), name) ==
        model.column_names.end()) {
      throw Error::validation("ProfileDimensionMismatch",
                              "profile value '" + name +
                                  "' does not match any model column");
    }
  }
  if (profile.annual_fee < 0.0) {
    throw Error::validation("InvalidValue", "annual fee must be non-negative");
  }
  if (profile.current_tenure < 0) {
    throw Error::validation("InvalidValue", "current tenure must be >= 0");
  }
}

}  // namespace detail

/// Survival curve for a covariate profile on the period grid 1..horizon:
/// S(t|x) = exp(-H0(t) exp(x . beta)), with the per-period economic path
/// applied inside the cumulative sum.
inline SurvivorCurve survival_profile(const CoxModel& model,
                                      const CovariateProfile& profile,
                                      int horizon = 50) {
  if (horizon < 1) {
    throw Error::validation("InvalidValue", "horizon must be >= 1");
  }
  if (model.baseline.times.empty()) {
    throw Error::validation("InvalidValue",
                            "model carries no baseline hazard; fit it first");
  }
  detail::check_profile_columns(model, profile);
  SurvivorCurve curve;
  curve.values.resize(static_cast<std::size_t>(horizon) + 1);
  curve.values[0] = 1.0;
  double cumulative = 0.0;
  for (int t = 1; t <= horizon; ++t) {
    const double increment = model.baseline.increment_at(static_cast<double>(t));
    cumulative += increment * std::exp(detail::profile_eta(model, profile, t));
    curve.values[static_cast<std::size_t>(t)] = std::exp(-cumulative);
  }
  return curve;
}

struct ExpectedDuration {
  double years = 0.0;
  bool truncation_warning = false;  // S(horizon) > .05: horizon too short
  double survivor_at_horizon = 0.0;
};

/// Restricted mean duration: sum of S(t) for t = 0..horizon-1. Conditional on
/// tenure k the tail is renormalized by S(k) and the elapsed k years added.
inline ExpectedDuration expected_duration(const SurvivorCurve& curve,
                                          int current_tenure, int horizon) {
  if (horizon < 1 || current_tenure < 0) {
    throw Error::validation("InvalidValue",
                            "horizon must be >= 1 and tenure >= 0");
  }
  ExpectedDuration out;
  out.survivor_at_horizon = curve.at(horizon);
  out.truncation_warning = out.survivor_at_horizon > 0.05;
  const int k = current_tenure;
  const double sk = curve.at(k);
  if (sk <= 0.0) {
    out.years = static_cast<double>(k);
    return out;
  }
  double tail = 0.0;
  for (int t = k; t < horizon; ++t) tail += curve.at(t) / sk;
  out.years = static_cast<double>(k) + tail;
  return out;
}

/// Total projected revenue: duration times fee at full precision.
inline double revenue_forecast(double expected_duration_years, double annual_fee) {
  if (expected_duration_years < 0.0 || annual_fee < 0.0) {
    throw Error::validation("InvalidValue",
                            "duration and fee must be non-negative");
  }
  return expected_duration_years * annual_fee;
}

struct ForecastReport {
  SurvivorCurve curve;
  double renewal_next_period = 0.0;
  double expected_total_years = 0.0;
  double expected_remaining_years = 0.0;
  double expected_total_revenue = 0.0;
  bool truncation_warning = false;
  int horizon = 0;
};

inline ForecastReport forecast_profile(const CoxModel& model,
                                       const CovariateProfile& profile,
                                       int horizon = 50) {
  const int k = profile.current_tenure;
  const int h = std::max(horizon, k + 2);
  ForecastReport report;
  report.horizon = h;
  report.curve = survival_profile(model, profile, h);
  const double sk = report.curve.at(k);
  report.renewal_next_period = sk > 0.0 ? report.curve.at(k + 1) / sk : 0.0;
  const ExpectedDuration duration = expected_duration(report.curve, k, h);
  report.expected_total_years = duration.years;
  report.expected_remaining_years = duration.years - k;
  report.truncation_warning = duration.truncation_warning;
  report.expected_total_revenue =
      revenue_forecast(duration.years, profile.annual_fee);
  return report;
}

// ---------------------------------------------------------------------------
// Portfolio audit
// ---------------------------------------------------------------------------

struct AuditEntry {
  std::string id;
  int current_tenure = 0;
  double exit_within_1yr = 0.0;
  double exit_within_2yr = 0.0;
  double expected_remaining_years = 0.0;
  double expected_remaining_revenue = 0.0;
};

namespace detail {

// Discrete survivor over per-period hazards h_j = dH0(j) exp(eta_j), clamped
// to one. Exit probabilities over whole years condition on surviving the
// elapsed tenure: 1 - S(k+d)/S(k) telescopes over the per-period hazards.
inline std::vector<double> discrete_survivor(const CoxModel& model,
                                             const CovariateProfile& profile,
                                             int horizon) {
  std::vector<double> s(static_cast<std::size_t>(horizon) + 1, 1.0);
  double running = 1.0;
  for (int t = 1; t <= horizon; ++t) {
    const double hazard =
        std::min(1.0, model.baseline.increment_at(static_cast<double>(t)) *
                          std::exp(profile_eta(model, profile, t)));
    running *= 1.0 - hazard;
    s[static_cast<std::size_t>(t)] = running;
  }
  return s;
}

}  // namespace detail

/// Triage report: per sponsor, the probability of exit within the next one
/// and two years given current tenure, plus expected remaining revenue;
/// sorted by descending two-year exit probability, ties by ascending id.
inline std::vector<AuditEntry> portfolio_audit(
    const CoxModel& model, const std::vector<CovariateProfile>& portfolio,
    int horizon = 50) {
  std::vector<AuditEntry> entries;
  entries.reserve(portfolio.size());
  for (const auto& profile : portfolio) {
    detail::check_profile_columns(model, profile);
    const int k = profile.current_tenure;
    const int h = std::max(horizon, k + 2);
    const std::vector<double> s = detail::discrete_survivor(model, profile, h);
    AuditEntry entry;
    entry.id = profile.id;
    entry.current_tenure = k;
    const double sk = s[static_cast<std::size_t>(k)];
    if (sk > 0.0) {
      entry.exit_within_1yr = 1.0 - s[static_cast<std::size_t>(k + 1)] / sk;
      entry.exit_within_2yr = 1.0 - s[static_cast<std::size_t>(k + 2)] / sk;
      double tail = 0.0;
      for (int t = k; t < h; ++t) tail += s[static_cast<std::size_t>(t)] / sk;
      entry.expected_remaining_years = tail;
    } else {
      entry.exit_within_1yr = 1.0;
      entry.exit_within_2yr = 1.0;
      entry.expected_remaining_years = 0.0;
    }
    entry.expected_remaining_revenue =
        entry.expected_remaining_years * profile.annual_fee;
    entries.push_back(std::move(entry));
  }
  std::sort(entries.begin(), entries.end(),
            [](const AuditEntry& a, const AuditEntry& b) {
              if (a.exit_within_2yr != b.exit_within_2yr)
                return a.exit_within_2yr > b.exit_within_2yr;
              return a.id < b.id;
            });
  return entries;
}

}  // namespace sponsurv
