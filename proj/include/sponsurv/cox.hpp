#pragma once

#include <Eigen/Dense>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <sponsurv/design.hpp>
#include <sponsurv/error.hpp>

namespace sponsurv {

enum class TiesMethod { efron, breslow };

inline const char* to_token(TiesMethod t) {
  return t == TiesMethod::efron ? "efron" : "breslow";
}

struct LikelihoodDerivatives {
  double value = 0.0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;  // d2/dbeta2 of the log partial likelihood
};

// Breslow cumulative-hazard step function over event times.
struct BaselineHazard {
  std::vector<double> times;       // distinct event times, ascending
  std::vector<double> increments;  // hazard increment at each time

  double cumulative(double t) const {
    double h = 0.0;
    for (std::size_t i = 0; i < times.size() && times[i] <= t; ++i) {
      h += increments[i];
    }
    return h;
  }
  double increment_at(double t) const {
    for (std::size_t i = 0; i < times.size(); ++i) {
      if (times[i] == t) return increments[i];
    }
    return 0.0;
  }
};

struct CoxModel {
  std::vector<std::string> column_names;
  std::vector<std::string> column_blocks;
  Eigen::VectorXd beta;
  Eigen::MatrixXd covariance_model;      // inverse observed information
  Eigen::MatrixXd covariance_clustered;  // sandwich, clusters from the design
  double log_likelihood = 0.0;
  TiesMethod ties = TiesMethod::efron;
  int iterations = 0;
  bool converged = false;
  BaselineHazard baseline;
  std::size_t n_observations = 0;
  std::size_t n_clusters = 0;
  std::size_t n_events = 0;
};

namespace detail {

// Shifted exponential sums over one risk set. Shifting by the in-set maximum
// of eta keeps exp() bounded; all downstream uses are either ratios or logs
// that add the shift back.
struct RiskSums {
  double shift = 0.0;
  double s0 = 0.0;
  Eigen::VectorXd s1;
  Eigen::MatrixXd s2;
  double s0_deaths = 0.0;
  Eigen::VectorXd s1_deaths;
  Eigen::MatrixXd s2_deaths;
  double eta_deaths = 0.0;
  Eigen::VectorXd x_deaths;
};

enum class SumOrder { value_only, first_order, second_order };

inline RiskSums risk_sums(const DesignMatrix& m, const Eigen::VectorXd& eta,
                          const DesignMatrix::RiskSet& rs, SumOrder order) {
  const auto p = static_cast<Eigen::Index>(m.cols());
  RiskSums sums;
  sums.shift = -std::numeric_limits<double>::infinity();
  for (int i : rs.at_risk) sums.shift = std::max(sums.shift, eta(i));
  if (order != SumOrder::value_only) {
    sums.s1 = Eigen::VectorXd::Zero(p);
    sums.s1_deaths = Eigen::VectorXd::Zero(p);
    sums.x_deaths = Eigen::VectorXd::Zero(p);
  }
  if (order == SumOrder::second_order) {
    sums.s2 = Eigen::MatrixXd::Zero(p, p);
    sums.s2_deaths = Eigen::MatrixXd::Zero(p, p);
  }
  for (int i : rs.at_risk) {
    const double r = std::exp(eta(i) - sums.shift);
    sums.s0 += r;
    if (order != SumOrder::value_only) {
      sums.s1.noalias() += r * m.values().row(i).transpose();
      if (order == SumOrder::second_order) {
        sums.s2.noalias() +=
            r * (m.values().row(i).transpose() * m.values().row(i));
      }
    }
  }
  for (int i : rs.deaths) {
    const double r = std::exp(eta(i) - sums.shift);
    sums.eta_deaths += eta(i);
    sums.s0_deaths += r;
    if (order != SumOrder::value_only) {
      sums.x_deaths += m.values().row(i).transpose();
      sums.s1_deaths.noalias() += r * m.values().row(i).transpose();
      if (order == SumOrder::second_order) {
        sums.s2_deaths.noalias() +=
            r * (m.values().row(i).transpose() * m.values().row(i));
      }
    }
  }
  return sums;
}

inline void check_beta_dimension(const DesignMatrix& m, const Eigen::VectorXd& beta) {
  if (static_cast<std::size_t>(beta.size()) != m.cols()) {
    throw Error::validation(
        "DimensionMismatch",
        "beta has " + std::to_string(beta.size()) + " entries but the design has " +
            std::to_string(m.cols()) + " columns");
  }
}

inline void check_has_events(const DesignMatrix& m) {
  if (m.event_count() == 0) {
    throw Error::validation("NoEvents", "design contains no events");
  }
}

}  // namespace detail

/// Log partial likelihood with exact analytic gradient and Hessian, using
/// counting-process risk sets (start, stop] so time-varying covariates are
/// read at each event period. Ties are handled by the Efron or Breslow
/// correction; the two coincide when every event time is unique.
inline LikelihoodDerivatives partial_log_likelihood(const DesignMatrix& m,
                                                    const Eigen::VectorXd& beta,
                                                    TiesMethod ties) {
  detail::check_beta_dimension(m, beta);
  detail::check_has_events(m);
  const auto p = static_cast<Eigen::Index>(m.cols());
  LikelihoodDerivatives out;
  out.gradient = Eigen::VectorXd::Zero(p);
  out.hessian = Eigen::MatrixXd::Zero(p, p);

  const Eigen::VectorXd eta = m.values() * beta;
  for (const auto& rs : m.risk_sets()) {
    const auto sums = detail::risk_sums(m, eta, rs, detail::SumOrder::second_order);
    const double d = static_cast<double>(rs.deaths.size());
    out.value += sums.eta_deaths;
    out.gradient += sums.x_deaths;
    if (ties == TiesMethod::breslow) {
      const Eigen::VectorXd mean = sums.s1 / sums.s0;
      out.value -= d * (sums.shift + std::log(sums.s0));
      out.gradient.noalias() -= d * mean;
      out.hessian.noalias() -= d * (sums.s2 / sums.s0 - mean * mean.transpose());
    } else {
      for (int k = 0; k < static_cast<int>(d); ++k) {
        const double f = k / d;
        const double s0k = sums.s0 - f * sums.s0_deaths;
        const Eigen::VectorXd s1k = sums.s1 - f * sums.s1_deaths;
        const Eigen::MatrixXd s2k = sums.s2 - f * sums.s2_deaths;
        const Eigen::VectorXd mean = s1k / s0k;
        out.value -= sums.shift + std::log(s0k);
        out.gradient.noalias() -= mean;
        out.hessian.noalias() -= s2k / s0k - mean * mean.transpose();
      }
    }
  }
  return out;
}

/// Value-only evaluation; used by the grid-search oracle where derivatives
/// are not needed.
inline double partial_log_likelihood_value(const DesignMatrix& m,
                                           const Eigen::VectorXd& beta,
                                           TiesMethod ties) {
  detail::check_beta_dimension(m, beta);
  detail::check_has_events(m);
  double value = 0.0;
  const Eigen::VectorXd eta = m.values() * beta;
  for (const auto& rs : m.risk_sets()) {
    const auto sums = detail::risk_sums(m, eta, rs, detail::SumOrder::value_only);
    const double d = static_cast<double>(rs.deaths.size());
    value += sums.eta_deaths;
    if (ties == TiesMethod::breslow) {
      value -= d * (sums.shift + std::log(sums.s0));
    } else {
      for (int k = 0; k < static_cast<int>(d); ++k) {
        value -= sums.shift + std::log(sums.s0 - (k / d) * sums.s0_deaths);
      }
    }
  }
  return value;
}

/// Per-row score residuals at `beta`. Rows of one cluster sum to that
/// cluster's contribution to the score; across all rows the residuals sum to
/// the score vector, which is zero at the optimum.
inline Eigen::MatrixXd score_residuals(const DesignMatrix& m,
                                       const Eigen::VectorXd& beta,
                                       TiesMethod ties) {
  detail::check_beta_dimension(m, beta);
  detail::check_has_events(m);
  const auto p = static_cast<Eigen::Index>(m.cols());
  Eigen::MatrixXd residuals =
      Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m.rows()), p);
  const Eigen::VectorXd eta = m.values() * beta;

  for (const auto& rs : m.risk_sets()) {
    const auto sums = detail::risk_sums(m, eta, rs, detail::SumOrder::first_order);
    const double d = static_cast<double>(rs.deaths.size());
    if (ties == TiesMethod::breslow) {
      const Eigen::VectorXd mean = sums.s1 / sums.s0;
      for (int i : rs.at_risk) {
        const double w = std::exp(eta(i) - sums.shift) / sums.s0 * d;
        residuals.row(i).noalias() -=
            w * (m.values().row(i) - mean.transpose());
      }
      for (int i : rs.deaths) {
        residuals.row(i).noalias() += m.values().row(i) - mean.transpose();
      }
    } else {
      // Efron: accumulate the k-step sums once, then sweep the risk set.
      double inv_sum = 0.0;            // sum_k 1/s0k
      double inv_sum_scaled = 0.0;     // sum_k (1 - k/d)/s0k
      Eigen::VectorXd mean_over_k = Eigen::VectorXd::Zero(p);
      Eigen::VectorXd mean_inv = Eigen::VectorXd::Zero(p);         // sum_k m_k/s0k
      Eigen::VectorXd mean_inv_scaled = Eigen::VectorXd::Zero(p);  // scaled version
      for (int k = 0; k < static_cast<int>(d); ++k) {
        const double f = k / d;
        const double s0k = sums.s0 - f * sums.s0_deaths;
        const Eigen::VectorXd mk = (sums.s1 - f * sums.s1_deaths) / s0k;
        inv_sum += 1.0 / s0k;
        inv_sum_scaled += (1.0 - f) / s0k;
        mean_over_k += mk / d;
        mean_inv += mk / s0k;
        mean_inv_scaled += (1.0 - f) * mk / s0k;
      }
      for (int i : rs.at_risk) {
        const double r = std::exp(eta(i) - sums.shift);
        residuals.row(i).noalias() -=
            r * (inv_sum * m.values().row(i) - mean_inv.transpose());
      }
      for (int i : rs.deaths) {
        const double r = std::exp(eta(i) - sums.shift);
        // deaths participate in step k with weight (1 - k/d); undo the
        // full-weight subtraction applied above and add the event part
        residuals.row(i).noalias() +=
            r * ((inv_sum - inv_sum_scaled) * m.values().row(i) -
                 (mean_inv - mean_inv_scaled).transpose());
        residuals.row(i).noalias() +=
            m.values().row(i) - mean_over_k.transpose();
      }
    }
  }
  return residuals;
}

struct FitOptions {
  TiesMethod ties = TiesMethod::efron;
  double tol = 1e-8;
  int max_iter = 100;
  int max_halvings = 20;
  double gradient_tol = 1e-8;
  double beta_bound = 20.0;
};

namespace detail {

inline Eigen::MatrixXd invert_information(const Eigen::MatrixXd& info,
                                          const char* error_code) {
  Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
  const Eigen::VectorXd d = ldlt.vectorD();
  const double dmax = d.maxCoeff();
  if (!(dmax > 0.0) || d.minCoeff() < dmax * 1e-12 || ldlt.info() != Eigen::Success) {
    throw Error::numeric(error_code,
                         "observed information matrix is singular or indefinite");
  }
  Eigen::MatrixXd inv = ldlt.solve(
      Eigen::MatrixXd::Identity(info.rows(), info.cols()));
  return 0.5 * (inv + inv.transpose());
}

}  // namespace detail

/// Newton-Raphson maximization of the partial likelihood with step-halving.
/// Converges when the relative log-likelihood change drops below `tol` or the
/// gradient max-norm drops below `gradient_tol`; iterations never decrease
/// the log likelihood.
inline CoxModel fit_cox(const DesignMatrix& m, FitOptions options = {}) {
  detail::check_has_events(m);
  if (!m.degenerate_columns().empty()) {
    std::string joined;
    for (const auto& c : m.degenerate_columns()) {
      if (!joined.empty()) joined += ", ";
      joined += c;
    }
    throw Error::validation("NonIdentifiable",
                            "zero-variance column(s) in design: " + joined);
  }

  const auto p = static_cast<Eigen::Index>(m.cols());
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  LikelihoodDerivatives cur = partial_log_likelihood(m, beta, options.ties);

  int iter = 0;
  bool converged = false;
  while (iter < options.max_iter) {
    ++iter;
    if (cur.gradient.cwiseAbs().maxCoeff() < options.gradient_tol) {
      converged = true;
      break;
    }
    const Eigen::MatrixXd info = -cur.hessian;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
    const Eigen::VectorXd dvec = ldlt.vectorD();
    const double dmax = dvec.maxCoeff();
    if (!(dmax > 0.0) || dvec.minCoeff() < dmax * 1e-12) {
      throw Error::numeric("NonIdentifiable",
                           "singular Hessian during Newton iteration " +
                               std::to_string(iter));
    }
    const Eigen::VectorXd direction = ldlt.solve(cur.gradient);

    double step = 1.0;
    bool accepted = false;
    Eigen::VectorXd candidate;
    LikelihoodDerivatives next;
    for (int h = 0; h <= options.max_halvings; ++h) {
      candidate = beta + step * direction;
      next = partial_log_likelihood(m, candidate, options.ties);
      if (next.value >= cur.value) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (accepted && candidate.cwiseAbs().maxCoeff() > options.beta_bound) {
      throw Error::numeric(
          "MonotoneLikelihood",
          "coefficient magnitude exceeded " + std::to_string(options.beta_bound) +
              " during iteration; the partial likelihood appears monotone");
    }
    if (!accepted) {
      // no uphill step found at the smallest step size: treat as stalled
      if (cur.gradient.cwiseAbs().maxCoeff() < 1e-5) {
        converged = true;
        break;
      }
      throw Error::numeric("NotConverged",
                           "step-halving failed to improve the log likelihood at "
                           "iteration " +
                               std::to_string(iter));
    }
    const double change = next.value - cur.value;
    beta = candidate;
    cur = next;
    if (change < options.tol * (std::abs(cur.value) + options.tol)) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    throw Error::numeric("NotConverged", "Newton-Raphson did not converge in " +
                                             std::to_string(options.max_iter) +
                                             " iterations");
  }

  CoxModel model;
  model.column_names = m.column_names();
  model.column_blocks = m.column_blocks();
  model.beta = beta;
  model.log_likelihood = cur.value;
  model.ties = options.ties;
  model.iterations = iter;
  model.converged = true;
  model.n_observations = m.rows();
  model.n_clusters = m.cluster_count();
  model.n_events = m.event_count();
  model.covariance_model = detail::invert_information(-cur.hessian, "NonIdentifiable");
  return model;
}

/// Cluster-robust sandwich covariance: V = H^-1 (sum_c g_c g_c^T) H^-1 with
/// g_c the summed score residuals of cluster c and H the observed
/// information at the fitted coefficients.
inline Eigen::MatrixXd clustered_covariance(const CoxModel& model,
                                            const DesignMatrix& m) {
  const auto p = static_cast<Eigen::Index>(m.cols());
  if (model.beta.size() != p) {
    throw Error::validation("DimensionMismatch",
                            "model and design matrix column counts differ");
  }
  const LikelihoodDerivatives at_fit =
      partial_log_likelihood(m, model.beta, model.ties);
  const Eigen::MatrixXd info_inv =
      detail::invert_information(-at_fit.hessian, "SingularInformation");

  const Eigen::MatrixXd residuals = score_residuals(m, model.beta, model.ties);
  Eigen::MatrixXd cluster_scores =
      Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m.cluster_count()), p);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    cluster_scores.row(m.cluster_index()[i]) +=
        residuals.row(static_cast<Eigen::Index>(i));
  }
  const Eigen::MatrixXd meat = cluster_scores.transpose() * cluster_scores;
  Eigen::MatrixXd v = info_inv * meat * info_inv;
  return 0.5 * (v + v.transpose());
}

/// AIC = -2LL + 2k, BIC = -2LL + k ln(n) with n the panel observation count.
inline std::pair<double, double> information_criteria(double log_likelihood, int k,
                                                      long n) {
  if (k < 0 || n < 1) {
    throw Error::validation("InvalidValue",
                            "information criteria need k >= 0 and n >= 1");
  }
  const double minus2 = -2.0 * log_likelihood;
  return {minus2 + 2.0 * k, minus2 + k * std::log(static_cast<double>(n))};
}

/// Variance inflation factors: VIF_j = 1/(1 - R^2_j) from regressing column j
/// on the remaining columns plus an intercept. Perfectly collinear columns
/// report an infinite VIF.
inline std::vector<double> vif(const DesignMatrix& m) {
  const auto p = static_cast<Eigen::Index>(m.cols());
  const auto n = static_cast<Eigen::Index>(m.rows());
  if (p < 2) {
    throw Error::validation("DimensionMismatch", "VIF needs at least two columns");
  }
  if (!m.degenerate_columns().empty()) {
    throw Error::validation("NonIdentifiable",
                            "VIF is undefined for zero-variance columns");
  }
  std::vector<double> out(static_cast<std::size_t>(p));
  Eigen::MatrixXd design(n, p);  // intercept plus the p-1 other columns
  for (Eigen::Index j = 0; j < p; ++j) {
    design.col(0).setOnes();
    Eigen::Index c = 1;
    for (Eigen::Index k = 0; k < p; ++k) {
      if (k == j) continue;
      design.col(c++) = m.values().col(k);
    }
    const Eigen::VectorXd y = m.values().col(j);
    const Eigen::VectorXd coef =
        design.leftCols(p).colPivHouseholderQr().solve(y);
    const double ssr = (y - design.leftCols(p) * coef).squaredNorm();
    const double sst = (y.array() - y.mean()).matrix().squaredNorm();
    const double r2 = 1.0 - ssr / sst;
    out[static_cast<std::size_t>(j)] =
        r2 >= 1.0 - 1e-12 ? std::numeric_limits<double>::infinity()
                          : 1.0 / (1.0 - r2);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Reporting-side statistics
// ---------------------------------------------------------------------------

inline double normal_two_sided_p(double z) {
  return std::erfc(std::abs(z) / std::sqrt(2.0));
}

inline double chi_squared_upper_p(double x, int df) {
  if (x <= 0.0) return 1.0;
  return boost::math::gamma_q(df / 2.0, x / 2.0);
}

/// Renders "19.1% less likely" / "4.2% more likely" / "0.0% change" from a
/// hazard ratio, at one-decimal display precision.
inline std::string percent_change_phrase(double hazard_ratio) {
  const double pct =
      (hazard_ratio < 1.0 ? 1.0 - hazard_ratio : hazard_ratio - 1.0) * 100.0;
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", pct);
  if (std::string(buf) == "0.0") return "0.0% change";
  return std::string(buf) + "% " +
         (hazard_ratio < 1.0 ? "less likely" : "more likely");
}

struct FitReportRow {
  std::string name;
  std::string block;
  double beta = 0.0;
  double se_robust = 0.0;
  double z = 0.0;
  double p = 1.0;
  double hazard_ratio = 1.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::string percent_phrase;
};

struct BlockWald {
  std::string name;
  double chi2 = 0.0;
  int df = 0;
  double p = 1.0;
};

struct FitReport {
  std::vector<FitReportRow> rows;
  BlockWald entered_block;
  double aic = 0.0;
  double bic = 0.0;
  double log_likelihood = 0.0;
  int k_parameters = 0;
};

/// Per-column table: hazard ratio exp(beta), robust z, two-sided normal p,
/// and the 95% CI exp(beta +- 1.96 SE).
inline std::vector<FitReportRow> hazard_ratio_table(const CoxModel& model) {
  std::vector<FitReportRow> rows;
  rows.reserve(model.column_names.size());
  for (Eigen::Index j = 0; j < model.beta.size(); ++j) {
    FitReportRow row;
    row.name = model.column_names[static_cast<std::size_t>(j)];
    row.block = model.column_blocks[static_cast<std::size_t>(j)];
    row.beta = model.beta(j);
    row.se_robust = std::sqrt(model.covariance_clustered(j, j));
    row.z = row.se_robust > 0.0 ? row.beta / row.se_robust : 0.0;
    row.p = normal_two_sided_p(row.z);
    row.hazard_ratio = std::exp(row.beta);
    row.ci_low = std::exp(row.beta - 1.96 * row.se_robust);
    row.ci_high = std::exp(row.beta + 1.96 * row.se_robust);
    row.percent_phrase = percent_change_phrase(row.hazard_ratio);
    rows.push_back(std::move(row));
  }
  return rows;
}

struct HierarchicalResult {
  std::vector<CoxModel> models;
  std::vector<FitReport> reports;
  std::vector<std::pair<std::string, double>> vif_table;  // full design
  TiesMethod ties = TiesMethod::efron;
  std::size_t n_observations = 0;
  std::size_t n_spells = 0;
};

/// Cumulative block entry: Model k contains the columns of blocks 1..k. Each
/// model reports the Wald chi-square of its newly entered block computed from
/// the clustered covariance, plus AIC/BIC/log-likelihood.
inline HierarchicalResult hierarchical_fit(const Dataset& dataset,
                                           const BlockSpec& spec,
                                           FitOptions options = {}) {
  const DesignMatrix full = design_matrix(dataset, spec);
  HierarchicalResult result;
  result.ties = options.ties;
  result.n_observations = dataset.observation_count();
  result.n_spells = dataset.spell_count();

  std::size_t columns_so_far = 0;
  for (const auto& block : spec.blocks) {
    const std::size_t block_begin = columns_so_far;
    columns_so_far += block.columns.size();
    const DesignMatrix sub = full.leading_columns(columns_so_far);

    CoxModel model = fit_cox(sub, options);
    model.covariance_clustered = clustered_covariance(model, sub);

    FitReport report;
    report.rows = hazard_ratio_table(model);
    report.log_likelihood = model.log_likelihood;
    report.k_parameters = static_cast<int>(columns_so_far);
    const auto [aic, bic] = information_criteria(
        model.log_likelihood, report.k_parameters,
        static_cast<long>(dataset.observation_count()));
    report.aic = aic;
    report.bic = bic;

    const auto df = static_cast<Eigen::Index>(block.columns.size());
    const Eigen::VectorXd beta_block =
        model.beta.segment(static_cast<Eigen::Index>(block_begin), df);
    const Eigen::MatrixXd v_block = model.covariance_clustered.block(
        static_cast<Eigen::Index>(block_begin),
        static_cast<Eigen::Index>(block_begin), df, df);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(v_block);
    if (ldlt.info() != Eigen::Success || ldlt.vectorD().minCoeff() <= 0.0) {
      throw Error::numeric("SingularInformation",
                           "block covariance is singular in Wald test for block '" +
                               block.name + "'");
    }
    report.entered_block.name = block.name;
    report.entered_block.df = static_cast<int>(df);
    report.entered_block.chi2 = beta_block.dot(ldlt.solve(beta_block));
    report.entered_block.p =
        chi_squared_upper_p(report.entered_block.chi2, report.entered_block.df);

    result.models.push_back(std::move(model));
    result.reports.push_back(std::move(report));
  }

  if (full.cols() >= 2) {
    const std::vector<double> factors = vif(full);
    for (std::size_t j = 0; j < factors.size(); ++j) {
      result.vif_table.emplace_back(full.column_names()[j], factors[j]);
    }
  }
  return result;
}

}  // namespace sponsurv
