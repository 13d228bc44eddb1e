#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include <sponsurv/cox.hpp>
#include <sponsurv/design.hpp>
#include <sponsurv/error.hpp>
#include <sponsurv/panel.hpp>

namespace sponsurv {

// Deterministic random source for fixtures. std::mt19937_64 has a
// standard-specified output sequence; uniforms are formed from the top 53
// bits, so generated panels are byte-identical across platforms.
class SimulationRng {
 public:
  explicit SimulationRng(std::uint64_t seed) : engine_(seed) {}
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

 private:
  std::mt19937_64 engine_;
};

// One generated covariate: a panel field, its sampling distribution, and its
// true log-hazard coefficient. Time-varying draws are redrawn every period.
struct CovariateSpec {
  enum class Kind { bernoulli, uniform };
  std::string name;
  Kind kind = Kind::bernoulli;
  double prevalence = 0.5;  // bernoulli
  double lo = 0.0, hi = 1.0;  // uniform
  double beta = 0.0;
  bool time_varying = false;
};

// Discrete-time proportional-hazards data generating process: in period j a
// live spell exits with probability baseline[j] * exp(x . beta), then (if
// still live) censors with the per-period censoring rate; spells reaching
// max_horizon are censored there.
struct GeneratorSpec {
  int n = 0;
  std::vector<double> baseline_hazard;  // per period; last value reused beyond
  std::vector<CovariateSpec> covariates;
  double censoring_rate = 0.0;
  int max_horizon = 50;
  std::uint64_t seed = 0;
  bool clamp_hazard = false;  // opt-in: clamp baseline*exp(x.beta) below 1
};

namespace detail {

enum class PanelField {
  regional_proximity,
  congruence,
  brand_equity,
  b2b,
  publicly_traded,
  gdp_growth,
  cpi_inflation,
  clutter,
};

inline PanelField panel_field(const std::string& name) {
  if (name == "regional_proximity") return PanelField::regional_proximity;
  if (name == "congruence") return PanelField::congruence;
  if (name == "brand_equity") return PanelField::brand_equity;
  if (name == "b2b") return PanelField::b2b;
  if (name == "publicly_traded") return PanelField::publicly_traded;
  if (name == "gdp_growth") return PanelField::gdp_growth;
  if (name == "cpi_inflation") return PanelField::cpi_inflation;
  if (name == "clutter") return PanelField::clutter;
  throw Error::validation("UnknownCovariate",
                          "generator covariate '" + name +
                              "' is not a simulatable panel field");
}

inline void apply_field(PanelObservation& o, PanelField field, double value) {
  switch (field) {
    case PanelField::regional_proximity: o.regional_proximity = value >= 0.5; break;
    case PanelField::congruence: o.congruence = value >= 0.5; break;
    case PanelField::brand_equity: o.brand_equity = value >= 0.5; break;
    case PanelField::b2b: o.b2b = value >= 0.5; break;
    case PanelField::publicly_traded: o.publicly_traded = value >= 0.5; break;
    case PanelField::gdp_growth: o.gdp_growth = value; break;
    case PanelField::cpi_inflation: o.cpi_inflation = value; break;
    case PanelField::clutter:
      o.clutter = std::max(1, static_cast<int>(std::lround(value)));
      break;
  }
}

inline double draw_covariate(const CovariateSpec& spec, SimulationRng& rng) {
  if (spec.kind == CovariateSpec::Kind::bernoulli) {
    return rng.uniform() < spec.prevalence ? 1.0 : 0.0;
  }
  return spec.lo + rng.uniform() * (spec.hi - spec.lo);
}

inline double covariate_max_contribution(const CovariateSpec& spec) {
  if (spec.kind == CovariateSpec::Kind::bernoulli) {
    return std::max(0.0, spec.beta);
  }
  double lo = spec.lo, hi = spec.hi;
  if (spec.name == "clutter") {  // rounded up to at least 1
    lo = std::max(1.0, std::round(lo));
    hi = std::max(1.0, std::round(hi));
  }
  return std::max(spec.beta * lo, spec.beta * hi);
}

inline void validate_generator_spec(const GeneratorSpec& spec) {
  if (spec.n < 0 || spec.max_horizon < 1) {
    throw Error::validation("InvalidValue",
                            "generator needs n >= 0 and max_horizon >= 1");
  }
  if (spec.baseline_hazard.empty()) {
    throw Error::validation("InvalidValue",
                            "generator needs a baseline hazard sequence");
  }
  double max_baseline = 0.0;
  for (double h : spec.baseline_hazard) {
    if (h < 0.0 || h >= 1.0) {
      throw Error::validation("InvalidValue",
                              "baseline hazards must lie in [0, 1)");
    }
    max_baseline = std::max(max_baseline, h);
  }
  double max_eta = 0.0;
  for (const auto& cov : spec.covariates) {
    panel_field(cov.name);  // validates the name
    if (cov.kind == CovariateSpec::Kind::bernoulli &&
        (cov.prevalence < 0.0 || cov.prevalence > 1.0)) {
      throw Error::validation("InvalidValue", "prevalence must lie in [0, 1]");
    }
    if (cov.kind == CovariateSpec::Kind::uniform && cov.hi < cov.lo) {
      throw Error::validation("InvalidValue", "uniform range must have lo <= hi");
    }
    max_eta += covariate_max_contribution(cov);
  }
  if (!spec.clamp_hazard && max_baseline * std::exp(max_eta) >= 1.0) {
    throw Error::validation(
        "HazardOverflow",
        "baseline * exp(x . beta) reaches 1 for a reachable covariate vector; "
        "reduce the baseline or opt into clamping");
  }
}

}  // namespace detail

/// Generates a panel Dataset from the discrete-hazard process. The draw order
/// is fixed: per spell, fixed covariates in listed order; per period,
/// time-varying covariates in listed order, then the exit draw, then the
/// censoring draw. Output is reproducible for a given seed and round-trips
/// through the panel CSV format.
inline Dataset generate_panel(const GeneratorSpec& spec) {
  detail::validate_generator_spec(spec);
  SimulationRng rng(spec.seed);
  std::vector<PanelObservation> rows;

  for (int i = 0; i < spec.n; ++i) {
    char id[16];
    std::snprintf(id, sizeof(id), "S%06d", i + 1);

    PanelObservation base;
    base.sponsorship_id = id;
    for (const auto& cov : spec.covariates) {
      if (!cov.time_varying) {
        detail::apply_field(base, detail::panel_field(cov.name),
                            detail::draw_covariate(cov, rng));
      }
    }

    std::vector<PanelObservation> spell_rows;
    for (int j = 1; j <= spec.max_horizon; ++j) {
      PanelObservation o = base;
      o.period = j;
      for (const auto& cov : spec.covariates) {
        if (cov.time_varying) {
          detail::apply_field(o, detail::panel_field(cov.name),
                              detail::draw_covariate(cov, rng));
        }
      }
      double eta = 0.0;
      for (const auto& cov : spec.covariates) {
        eta += cov.beta * detail::column_value(o, cov.name, false);
      }
      const auto baseline_idx = static_cast<std::size_t>(
          std::min<int>(j, static_cast<int>(spec.baseline_hazard.size())) - 1);
      double hazard = spec.baseline_hazard[baseline_idx] * std::exp(eta);
      if (spec.clamp_hazard) hazard = std::min(hazard, 1.0);

      const bool exits = rng.uniform() < hazard;
      if (exits) {
        o.event = true;
        spell_rows.push_back(std::move(o));
        break;
      }
      o.event = false;
      spell_rows.push_back(std::move(o));
      if (spec.censoring_rate > 0.0 && rng.uniform() < spec.censoring_rate) break;
    }
    for (auto& o : spell_rows) rows.push_back(std::move(o));
  }
  return Dataset::from_observations(std::move(rows));
}

// ---------------------------------------------------------------------------
// Brute-force oracles
// ---------------------------------------------------------------------------

struct GridSearchResult {
  Eigen::VectorXd beta;
  bool on_boundary = false;  // optimum at a bound: monotone likelihood suspected
};

/// Exhaustive grid maximization of the partial likelihood; the oracle against
/// which the Newton path is checked. Limited to two covariates.
inline GridSearchResult grid_search_mle(const DesignMatrix& m,
                                        std::pair<double, double> bounds,
                                        double resolution,
                                        TiesMethod ties = TiesMethod::breslow) {
  if (m.cols() > 2) {
    throw Error::validation("TooManyColumns",
                            "grid search supports at most two covariates");
  }
  if (resolution <= 0.0 || bounds.second <= bounds.first) {
    throw Error::validation("InvalidValue", "need lo < hi and resolution > 0");
  }
  const auto steps =
      static_cast<long>(std::floor((bounds.second - bounds.first) / resolution +
                                   1e-9));
  auto grid_point = [&](long t) { return bounds.first + t * resolution; };

  GridSearchResult best;
  best.beta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m.cols()));
  double best_value = -std::numeric_limits<double>::infinity();
  Eigen::VectorXd candidate(static_cast<Eigen::Index>(m.cols()));
  std::vector<long> best_steps(m.cols(), 0);

  if (m.cols() == 1) {
    for (long t = 0; t <= steps; ++t) {
      candidate(0) = grid_point(t);
      const double value = partial_log_likelihood_value(m, candidate, ties);
      if (value > best_value) {
        best_value = value;
        best.beta = candidate;
        best_steps[0] = t;
      }
    }
  } else {
    for (long t0 = 0; t0 <= steps; ++t0) {
      candidate(0) = grid_point(t0);
      for (long t1 = 0; t1 <= steps; ++t1) {
        candidate(1) = grid_point(t1);
        const double value = partial_log_likelihood_value(m, candidate, ties);
        if (value > best_value) {
          best_value = value;
          best.beta = candidate;
          best_steps = {t0, t1};
        }
      }
    }
  }
  for (std::size_t d = 0; d < m.cols(); ++d) {
    if (best_steps[d] == 0 || best_steps[d] == steps) best.on_boundary = true;
  }
  return best;
}

struct DerivativeCheck {
  double gradient_rel_error = 0.0;
  double hessian_rel_error = 0.0;
};

/// Central-difference check of the analytic gradient and Hessian. Errors are
/// worst-case absolute discrepancies relative to the max-norm of the analytic
/// object.
inline DerivativeCheck finite_diff_check(const DesignMatrix& m,
                                         const Eigen::VectorXd& beta,
                                         double step = 1e-5,
                                         TiesMethod ties = TiesMethod::efron) {
  if (step <= 0.0) {
    throw Error::validation("InvalidValue", "finite difference step must be > 0");
  }
  const auto p = beta.size();
  const LikelihoodDerivatives analytic = partial_log_likelihood(m, beta, ties);

  Eigen::VectorXd numeric_grad(p);
  Eigen::MatrixXd numeric_hess(p, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    Eigen::VectorXd up = beta, down = beta;
    up(j) += step;
    down(j) -= step;
    numeric_grad(j) = (partial_log_likelihood_value(m, up, ties) -
                       partial_log_likelihood_value(m, down, ties)) /
                      (2.0 * step);
    const LikelihoodDerivatives gup = partial_log_likelihood(m, up, ties);
    const LikelihoodDerivatives gdown = partial_log_likelihood(m, down, ties);
    numeric_hess.col(j) = (gup.gradient - gdown.gradient) / (2.0 * step);
  }

  DerivativeCheck out;
  const double grad_scale = std::max(analytic.gradient.cwiseAbs().maxCoeff(), 1e-8);
  out.gradient_rel_error =
      (analytic.gradient - numeric_grad).cwiseAbs().maxCoeff() / grad_scale;
  const double hess_scale = std::max(analytic.hessian.cwiseAbs().maxCoeff(), 1e-8);
  out.hessian_rel_error =
      (analytic.hessian - 0.5 * (numeric_hess + numeric_hess.transpose()))
          .cwiseAbs()
          .maxCoeff() /
      hess_scale;
  return out;
}

}  // namespace sponsurv
