#pragma once

#include <algorithm>
#include <cmath>
#include <istream>
#include <optional>
#include <ostream>
#include <utility>
#include <vector>

#include <sponsurv/csv.hpp>
#include <sponsurv/error.hpp>
#include <sponsurv/panel.hpp>

namespace sponsurv {

// Discrete survivor curve: values[t] = S(t) with S(0) = 1.
struct SurvivorCurve {
  std::vector<double> values{1.0};

  int max_period() const { return static_cast<int>(values.size()) - 1; }
  double at(int t) const {
    if (t < 0) return 1.0;
    if (t >= static_cast<int>(values.size())) return values.back();
    return values[static_cast<std::size_t>(t)];
  }
};

struct LifeTableRow {
  int period = 0;
  long beginning = 0;
  long ended = 0;
  long censored = 0;
  double hazard = 0.0;
  double survivor = 0.0;
};

// Per-period tabulation of risk counts, events, censorings, hazards, and
// product-limit survivor values. Spells censored at the end of period j stay
// in period j's risk set.
struct LifeTable {
  std::vector<LifeTableRow> rows;

  long total_at_risk() const {
    long n = 0;
    for (const auto& r : rows) n += r.beginning;
    return n;
  }
  long total_events() const {
    long n = 0;
    for (const auto& r : rows) n += r.ended;
    return n;
  }
};

inline LifeTable life_table(const std::vector<SponsorshipSpell>& spells) {
  if (spells.empty()) {
    throw Error::validation("EmptySpells", "no spells to tabulate");
  }
  int max_duration = 0;
  for (const auto& s : spells) max_duration = std::max(max_duration, s.duration);

  LifeTable table;
  table.rows.resize(static_cast<std::size_t>(max_duration));
  for (const auto& s : spells) {
    auto& final_row = table.rows[static_cast<std::size_t>(s.duration - 1)];
    (s.ended ? final_row.ended : final_row.censored) += 1;
  }
  long at_risk = static_cast<long>(spells.size());
  double survivor = 1.0;
  for (int j = 1; j <= max_duration; ++j) {
    auto& row = table.rows[static_cast<std::size_t>(j - 1)];
    row.period = j;
    row.beginning = at_risk;
    row.hazard = static_cast<double>(row.ended) / static_cast<double>(at_risk);
    survivor *= 1.0 - row.hazard;
    row.survivor = survivor;
    at_risk -= row.ended + row.censored;
  }
  return table;
}

// (hazard rate, renewal rate): total events over total at-risk observations.
inline std::pair<double, double> overall_hazard(const LifeTable& table) {
  const double hazard = static_cast<double>(table.total_events()) /
                        static_cast<double>(table.total_at_risk());
  return {hazard, 1.0 - hazard};
}

inline SurvivorCurve survivor_curve(const LifeTable& table) {
  SurvivorCurve curve;
  curve.values.reserve(table.rows.size() + 1);
  for (const auto& row : table.rows) curve.values.push_back(row.survivor);
  return curve;
}

/// Median lifetime by linear interpolation between the last period with
/// S > .5 and the next one; returns the period itself when the curve passes
/// through .5 exactly, and nullopt when the curve never reaches .5.
inline std::optional<double> median_lifetime(const SurvivorCurve& curve) {
  constexpr double kExact = 1e-12;
  const int last = curve.max_period();
  for (int j = 0; j <= last; ++j) {
    if (std::abs(curve.at(j) - 0.5) <= kExact) return static_cast<double>(j);
    if (curve.at(j) < 0.5) {
      const int m = j - 1;
      const double sm = curve.at(m);
      const double sm1 = curve.at(j);
      return m + (sm - 0.5) / (sm - sm1);
    }
  }
  return std::nullopt;  // curve floor above .5
}

// Kernel-smoothed hazard series. Discrete Epanechnikov window of radius
// `bandwidth` with weights 1 - (d/(bandwidth+1))^2, renormalized at the
// boundaries; bandwidth 0 reproduces the raw hazards.
inline std::vector<std::pair<int, double>> smoothed_hazard(const LifeTable& table,
                                                           int bandwidth) {
  if (bandwidth < 0) {
    throw Error::validation("BadBandwidth", "bandwidth must be >= 0");
  }
  const int n = static_cast<int>(table.rows.size());
  std::vector<std::pair<int, double>> out;
  out.reserve(static_cast<std::size_t>(n));
  const double half_width = bandwidth + 1.0;
  for (int j = 0; j < n; ++j) {
    double num = 0.0, den = 0.0;
    for (int d = -bandwidth; d <= bandwidth; ++d) {
      const int i = j + d;
      if (i < 0 || i >= n) continue;
      const double u = d / half_width;
      const double w = 1.0 - u * u;
      num += w * table.rows[static_cast<std::size_t>(i)].hazard;
      den += w;
    }
    out.emplace_back(table.rows[static_cast<std::size_t>(j)].period, num / den);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Exports: CSV with 6-decimal fixed-point, matching the documented format
// `period,beginning,ended,censored,hazard,survivor`.
// ---------------------------------------------------------------------------

inline void write_life_table_csv(const LifeTable& table, std::ostream& out) {
  out << "period,beginning,ended,censored,hazard,survivor\n";
  for (const auto& r : table.rows) {
    out << r.period << ',' << r.beginning << ',' << r.ended << ',' << r.censored
        << ',' << csv::format_fixed(r.hazard, 6) << ','
        << csv::format_fixed(r.survivor, 6) << "\n";
  }
}

inline LifeTable read_life_table_csv(std::istream& in) {
  auto rows = csv::read_rows(in);
  if (rows.size() < 2) {
    throw Error::validation("EmptyInput", "life table file has no rows");
  }
  const std::vector<std::string> expected = {"period",   "beginning", "ended",
                                             "censored", "hazard",    "survivor"};
  for (std::size_t c = 0; c < expected.size(); ++c) {
    if (rows[0].size() <= c || csv::trim(rows[0][c]) != expected[c]) {
      throw Error::validation("MissingColumn",
                              "life table header must be "
                              "'period,beginning,ended,censored,hazard,survivor'");
    }
  }
  LifeTable table;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() < expected.size()) {
      throw Error::validation("InvalidValue",
                              "life table row " + std::to_string(r) + " is short");
    }
    LifeTableRow row;
    row.period = static_cast<int>(csv::parse_long(rows[r][0], r, "period"));
    row.beginning = csv::parse_long(rows[r][1], r, "beginning");
    row.ended = csv::parse_long(rows[r][2], r, "ended");
    row.censored = csv::parse_long(rows[r][3], r, "censored");
    row.hazard = csv::parse_double(rows[r][4], r, "hazard");
    row.survivor = csv::parse_double(rows[r][5], r, "survivor");
    table.rows.push_back(row);
  }
  return table;
}

}  // namespace sponsurv
