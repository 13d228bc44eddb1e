#pragma once

// Shared builders and brute-force oracles for the Cox tests. The oracles
// recompute risk sets and the tied partial likelihood by direct scanning,
// independently of the library's evaluation path.

#include <cmath>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <sponsurv/cox.hpp>
#include <sponsurv/design.hpp>

namespace cox_fixtures {

using sponsurv::DesignMatrix;
using sponsurv::RowMatrix;
using sponsurv::TiesMethod;

inline DesignMatrix make_matrix(const std::vector<std::vector<double>>& columns,
                                std::vector<double> start,
                                std::vector<double> stop, std::vector<int> event,
                                std::vector<std::string> clusters = {}) {
  const auto n = static_cast<Eigen::Index>(stop.size());
  const auto p = static_cast<Eigen::Index>(columns.size());
  RowMatrix values(n, p);
  std::vector<std::string> names;
  for (Eigen::Index c = 0; c < p; ++c) {
    names.push_back("x" + std::to_string(c + 1));
    for (Eigen::Index r = 0; r < n; ++r) {
      values(r, c) = columns[static_cast<std::size_t>(c)][static_cast<std::size_t>(r)];
    }
  }
  if (clusters.empty()) {
    for (Eigen::Index r = 0; r < n; ++r) {
      clusters.push_back("c" + std::to_string(r));
    }
  }
  return DesignMatrix::from_raw(std::move(names), {}, std::move(values),
                                std::move(start), std::move(stop),
                                std::move(event), std::move(clusters));
}

// Single-interval subjects observed on (0, t].
inline DesignMatrix subjects(const std::vector<std::vector<double>>& columns,
                             const std::vector<double>& times,
                             const std::vector<int>& events,
                             std::vector<std::string> clusters = {}) {
  return make_matrix(columns, std::vector<double>(times.size(), 0.0), times,
                     events, std::move(clusters));
}

// Two events at t=1 and two at t=2, covariate alternating 1/0.
inline DesignMatrix tied_instance() {
  return subjects({{1, 0, 1, 0}}, {1, 1, 2, 2}, {1, 1, 1, 1});
}

inline double tied_instance_breslow_value(double beta) {
  return 2.0 * beta - 2.0 * std::log(2.0 * std::exp(beta) + 2.0) -
         2.0 * std::log(std::exp(beta) + 1.0);
}

// Brute-force log partial likelihood by direct risk-set scanning.
inline double naive_loglik(const DesignMatrix& m, const Eigen::VectorXd& beta,
                           TiesMethod ties) {
  const Eigen::VectorXd eta = m.values() * beta;
  std::set<double> event_times;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    if (m.events()[i]) event_times.insert(m.stop_times()[i]);
  }
  double value = 0.0;
  for (double t : event_times) {
    std::vector<int> deaths, risk;
    for (int i = 0; i < static_cast<int>(m.rows()); ++i) {
      const auto idx = static_cast<std::size_t>(i);
      if (m.start_times()[idx] < t && t <= m.stop_times()[idx]) risk.push_back(i);
      if (m.events()[idx] && m.stop_times()[idx] == t) deaths.push_back(i);
    }
    double risk_sum = 0.0, death_sum = 0.0;
    for (int i : risk) risk_sum += std::exp(eta(i));
    for (int i : deaths) {
      death_sum += std::exp(eta(i));
      value += eta(i);
    }
    const double d = static_cast<double>(deaths.size());
    if (ties == TiesMethod::breslow) {
      value -= d * std::log(risk_sum);
    } else {
      for (int k = 0; k < static_cast<int>(d); ++k) {
        value -= std::log(risk_sum - (k / d) * death_sum);
      }
    }
  }
  return value;
}

struct RandomSurvivalData {
  std::vector<std::vector<double>> columns;
  std::vector<double> times;
  std::vector<int> events;
};

// Random single-covariate subjects with continuous (tie-free) times.
inline DesignMatrix random_tie_free(std::mt19937& rng, int n, int p = 1) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<std::vector<double>> columns(static_cast<std::size_t>(p));
  std::vector<double> times;
  std::vector<int> events;
  for (int i = 0; i < n; ++i) {
    for (auto& col : columns) col.push_back(unif(rng) < 0.5 ? 1.0 : unif(rng));
    times.push_back(0.5 + i * 0.25 + unif(rng) * 0.2);  // strictly increasing
    events.push_back(unif(rng) < 0.75 ? 1 : 0);
  }
  if (std::none_of(events.begin(), events.end(), [](int e) { return e == 1; })) {
    events.front() = 1;
  }
  return subjects(columns, times, events);
}

// Integer times with many coincident events.
inline DesignMatrix random_heavy_ties(std::mt19937& rng, int n, int p = 2) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<std::vector<double>> columns(static_cast<std::size_t>(p));
  std::vector<double> times;
  std::vector<int> events;
  for (int i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      columns[c].push_back(c == 0 ? (unif(rng) < 0.4 ? 1.0 : 0.0)
                                  : 2.0 * unif(rng) - 1.0);
    }
    times.push_back(1.0 + std::floor(unif(rng) * 4.0));  // periods 1..4
    events.push_back(unif(rng) < 0.7 ? 1 : 0);
  }
  if (std::none_of(events.begin(), events.end(), [](int e) { return e == 1; })) {
    events.front() = 1;
  }
  return subjects(columns, times, events);
}

// Counting-process panel rows whose continuous covariate changes per period.
inline DesignMatrix random_time_varying(std::mt19937& rng, int n_subjects,
                                        int max_periods = 5) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<std::vector<double>> columns(2);
  std::vector<double> start, stop;
  std::vector<int> events;
  std::vector<std::string> clusters;
  for (int i = 0; i < n_subjects; ++i) {
    const double fixed = unif(rng) < 0.5 ? 1.0 : 0.0;
    const int duration = 1 + static_cast<int>(unif(rng) * max_periods);
    for (int j = 1; j <= duration; ++j) {
      columns[0].push_back(fixed);
      columns[1].push_back(2.0 * unif(rng) - 1.0);
      start.push_back(j - 1.0);
      stop.push_back(j);
      const bool last = j == duration;
      events.push_back(last && unif(rng) < 0.8 ? 1 : 0);
      clusters.push_back("s" + std::to_string(i));
    }
  }
  if (std::none_of(events.begin(), events.end(), [](int e) { return e == 1; })) {
    events.front() = 1;
  }
  return make_matrix(columns, std::move(start), std::move(stop), std::move(events),
                     std::move(clusters));
}

}  // namespace cox_fixtures
